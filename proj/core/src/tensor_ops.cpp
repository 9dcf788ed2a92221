// Copyright 2026 The CMSC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "cmsc/autodiff.hpp"

namespace cmsc {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

struct Dims4 {
  int n, c, h, w;
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
};

Dims4 dims_of(const Shape& s, const char* op) {
  if (s.size() == 4) return {s[0], s[1], s[2], s[3]};
  if (s.size() == 3) return {1, s[0], s[1], s[2]};
  throw ShapeError(std::string(op) + ": expected rank 3 or 4 tensor, got " +
                   shape_string(s));
}

Shape with_dims(const Shape& like, int n, int c, int h, int w) {
  if (like.size() == 3) return {c, h, w};
  return {n, c, h, w};
}

// col is (C*9) x (H*W), row index (c*3 + ky)*3 + kx.
template <typename T>
void im2col(const T* x, int channels, int h, int w, T* col) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int c = 0; c < channels; ++c) {
    const T* xc = x + c * plane;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* row = col + ((c * 3 + ky) * 3 + kx) * plane;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          T* out = row + static_cast<std::size_t>(y) * w;
          if (sy < 0 || sy >= h) {
            std::fill(out, out + w, T(0));
            continue;
          }
          const T* src = xc + static_cast<std::size_t>(sy) * w;
          const int x0 = std::max(0, 1 - kx);
          const int x1 = std::min(w, w + 1 - kx);
          for (int xx = 0; xx < x0; ++xx) out[xx] = T(0);
          for (int xx = x0; xx < x1; ++xx) out[xx] = src[xx + kx - 1];
          for (int xx = x1; xx < w; ++xx) out[xx] = T(0);
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, int channels, int h, int w, T* dx) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int c = 0; c < channels; ++c) {
    T* dxc = dx + c * plane;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* row = col + ((c * 3 + ky) * 3 + kx) * plane;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          const T* in = row + static_cast<std::size_t>(y) * w;
          T* dst = dxc + static_cast<std::size_t>(sy) * w;
          const int x0 = std::max(0, 1 - kx);
          const int x1 = std::min(w, w + 1 - kx);
          for (int xx = x0; xx < x1; ++xx) dst[xx + kx - 1] += in[xx];
        }
      }
    }
  }
}

template <typename T>
void check_conv_shapes(const Shape& in, const Shape& weight, const Shape& bias) {
  const Dims4 d = dims_of(in, "conv2d_same");
  if (weight.size() != 4 || weight[2] != 3 || weight[3] != 3) {
    throw ShapeError("conv2d_same: weight must be O x C x 3 x 3, got " +
                     shape_string(weight));
  }
  if (weight[1] != d.c) {
    throw ShapeError("conv2d_same: input has " + std::to_string(d.c) +
                     " channels but weight expects " + std::to_string(weight[1]));
  }
  if (bias.size() != 1 || bias[0] != weight[0]) {
    throw ShapeError("conv2d_same: bias must have " + std::to_string(weight[0]) +
                     " elements, got " + shape_string(bias));
  }
  if (d.h < 1 || d.w < 1) throw ShapeError("conv2d_same: empty spatial extent");
}

}  // namespace

// ---------------------------------------------------------------- kernels

namespace kernels {

template <typename T>
BasicTensor<T> conv2d_same(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                           const BasicTensor<T>& bias) {
  check_conv_shapes<T>(input.shape(), weight.shape(), bias.shape());
  const Dims4 d = dims_of(input.shape(), "conv2d_same");
  const int out_c = weight.dim(0);
  const int k = d.c * 9;
  const auto plane = static_cast<Eigen::Index>(d.plane());
  BasicTensor<T> out(with_dims(input.shape(), d.n, out_c, d.h, d.w));
  AlignedVector<T> col(static_cast<std::size_t>(k) * plane);
  ConstMatMap<T> wm(weight.ptr(), out_c, k);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bv(bias.ptr(), out_c);
  for (int n = 0; n < d.n; ++n) {
    im2col(input.ptr() + n * d.c * d.plane(), d.c, d.h, d.w, col.data());
    MatMap<T> om(out.ptr() + n * out_c * d.plane(), out_c, plane);
    om.noalias() = wm * ConstMatMap<T>(col.data(), k, plane);
    om.colwise() += bv;
  }
  return out;
}

template <typename T>
BasicTensor<T> maxpool2(const BasicTensor<T>& input, std::vector<int>* argmax) {
  const Dims4 d = dims_of(input.shape(), "maxpool2");
  if (d.h % 2 || d.w % 2) {
    throw ShapeError("maxpool2: spatial extent must be even, got " +
                     shape_string(input.shape()));
  }
  const int oh = d.h / 2, ow = d.w / 2;
  BasicTensor<T> out(with_dims(input.shape(), d.n, d.c, oh, ow));
  if (argmax) argmax->assign(out.size(), 0);
  const T* src = input.ptr();
  T* dst = out.ptr();
  std::size_t o = 0;
  for (int p = 0; p < d.n * d.c; ++p) {
    const std::size_t base = p * d.plane();
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x, ++o) {
        std::size_t best = base + static_cast<std::size_t>(2 * y) * d.w + 2 * x;
        const std::size_t cand[3] = {best + 1, best + d.w, best + d.w + 1};
        for (std::size_t c : cand) {
          if (src[c] > src[best]) best = c;
        }
        dst[o] = src[best];
        if (argmax) (*argmax)[o] = static_cast<int>(best);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> avgpool2(const BasicTensor<T>& input) {
  const Dims4 d = dims_of(input.shape(), "avgpool2");
  if (d.h % 2 || d.w % 2) {
    throw ShapeError("avgpool2: spatial extent must be even, got " +
                     shape_string(input.shape()));
  }
  const int oh = d.h / 2, ow = d.w / 2;
  BasicTensor<T> out(with_dims(input.shape(), d.n, d.c, oh, ow));
  const T* src = input.ptr();
  T* dst = out.ptr();
  std::size_t o = 0;
  for (int p = 0; p < d.n * d.c; ++p) {
    const T* s = src + p * d.plane();
    for (int y = 0; y < oh; ++y) {
      const T* r0 = s + static_cast<std::size_t>(2 * y) * d.w;
      const T* r1 = r0 + d.w;
      for (int x = 0; x < ow; ++x, ++o) {
        dst[o] = (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]) * T(0.25);
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> upsample2(const BasicTensor<T>& input) {
  const Dims4 d = dims_of(input.shape(), "upsample2");
  const int oh = d.h * 2, ow = d.w * 2;
  BasicTensor<T> out(with_dims(input.shape(), d.n, d.c, oh, ow));
  const T* src = input.ptr();
  T* dst = out.ptr();
  for (int p = 0; p < d.n * d.c; ++p) {
    const T* s = src + p * d.plane();
    T* o = dst + static_cast<std::size_t>(p) * oh * ow;
    for (int y = 0; y < oh; ++y) {
      const T* row = s + static_cast<std::size_t>(y / 2) * d.w;
      T* orow = o + static_cast<std::size_t>(y) * ow;
      for (int x = 0; x < ow; ++x) orow[x] = row[x / 2];
    }
  }
  return out;
}

template <typename T>
double mean_squared_error(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw ShapeError("mean_squared_error: length mismatch " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += diff * diff;
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace kernels

// ---------------------------------------------------------------- tape

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw StateError("tape: invalid variable handle " + std::to_string(v.id));
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  return const_cast<Node&>(static_cast<const Tape&>(*this).node(v));
}

template <typename T>
Var Tape<T>::constant(BasicTensor<T> value) {
  return record(std::move(value), false, nullptr);
}

template <typename T>
Var Tape<T>::input(BasicTensor<T> value) {
  return record(std::move(value), true, nullptr);
}

template <typename T>
Var Tape<T>::parameter(Parameter<T>& param) {
  Var v = record(param.value, true, nullptr);
  nodes_.back().param = &param;
  return v;
}

template <typename T>
Var Tape<T>::record(BasicTensor<T> value, bool requires_grad, Pullback pullback) {
  if (backward_done_) throw StateError("tape: cannot record after backward()");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.pullback = requires_grad ? std::move(pullback) : Pullback{};
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
const BasicTensor<T>& Tape<T>::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() != n.value.size()) {
    // Unreached nodes report zeros of the right shape.
    const_cast<Node&>(n).grad = BasicTensor<T>(n.value.shape());
  }
  return n.grad;
}

template <typename T>
BasicTensor<T>& Tape<T>::grad_accumulator(Var v) {
  Node& n = node(v);
  if (n.grad.size() != n.value.size() || n.grad.shape() != n.value.shape()) {
    n.grad = BasicTensor<T>(n.value.shape());
  }
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var loss) {
  if (nodes_.empty()) throw StateError("backward: nothing was recorded");
  if (backward_done_) throw StateError("backward: already called on this tape");
  Node& root = node(loss);
  if (root.value.size() != 1) {
    throw ShapeError("backward: loss must be a single element, got " +
                     shape_string(root.value.shape()));
  }
  backward_done_ = true;
  grad_accumulator(loss)[0] = T(1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.pullback) n.pullback(*this, Var{i});
    if (n.param) {
      if (n.param->grad.shape() != n.param->value.shape()) {
        n.param->grad = BasicTensor<T>(n.param->value.shape());
      }
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

// ---------------------------------------------------------------- ops

namespace ops {

template <typename T>
Var conv2d_same(Tape<T>& tape, Var input, Var weight, Var bias) {
  BasicTensor<T> out =
      kernels::conv2d_same(tape.value(input), tape.value(weight), tape.value(bias));
  const bool rg =
      tape.requires_grad(input) || tape.requires_grad(weight) || tape.requires_grad(bias);
  return tape.record(std::move(out), rg, [input, weight, bias](Tape<T>& t, Var self) {
    const BasicTensor<T>& x = t.value(input);
    const BasicTensor<T>& w = t.value(weight);
    const BasicTensor<T>& gy = t.grad(self);
    const Dims4 d = dims_of(x.shape(), "conv2d_same");
    const int out_c = w.dim(0);
    const int k = d.c * 9;
    const auto plane = static_cast<Eigen::Index>(d.plane());
    const bool need_x = t.requires_grad(input);
    const bool need_w = t.requires_grad(weight);
    const bool need_b = t.requires_grad(bias);
    AlignedVector<T> col(static_cast<std::size_t>(k) * plane);
    AlignedVector<T> dcol;
    if (need_x) dcol.resize(col.size());
    T* gw = need_w ? t.grad_accumulator(weight).ptr() : nullptr;
    T* gb = need_b ? t.grad_accumulator(bias).ptr() : nullptr;
    T* gx = need_x ? t.grad_accumulator(input).ptr() : nullptr;
    ConstMatMap<T> wm(w.ptr(), out_c, k);
    for (int n = 0; n < d.n; ++n) {
      ConstMatMap<T> gym(gy.ptr() + n * out_c * d.plane(), out_c, plane);
      if (gb) {
        Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gbv(gb, out_c);
        gbv += gym.rowwise().sum();
      }
      if (gw) {
        im2col(x.ptr() + n * d.c * d.plane(), d.c, d.h, d.w, col.data());
        MatMap<T> gwm(gw, out_c, k);
        gwm.noalias() += gym * ConstMatMap<T>(col.data(), k, plane).transpose();
      }
      if (gx) {
        MatMap<T> dcm(dcol.data(), k, plane);
        dcm.noalias() = wm.transpose() * gym;
        col2im_add(dcol.data(), d.c, d.h, d.w, gx + n * d.c * d.plane());
      }
    }
  });
}

template <typename T>
Var maxpool2(Tape<T>& tape, Var input) {
  const bool rg = tape.requires_grad(input);
  std::vector<int> argmax;
  BasicTensor<T> out = kernels::maxpool2(tape.value(input), rg ? &argmax : nullptr);
  return tape.record(std::move(out), rg,
                     [input, argmax = std::move(argmax)](Tape<T>& t, Var self) {
                       const auto gy = t.grad(self).data();
                       T* gx = t.grad_accumulator(input).ptr();
                       for (std::size_t i = 0; i < gy.size(); ++i) gx[argmax[i]] += gy[i];
                     });
}

template <typename T>
Var avgpool2(Tape<T>& tape, Var input) {
  BasicTensor<T> out = kernels::avgpool2(tape.value(input));
  return tape.record(std::move(out), tape.requires_grad(input), [input](Tape<T>& t, Var self) {
    const BasicTensor<T>& gy = t.grad(self);
    const Dims4 d = dims_of(t.value(input).shape(), "avgpool2");
    T* gx = t.grad_accumulator(input).ptr();
    const int oh = d.h / 2, ow = d.w / 2;
    std::size_t o = 0;
    for (int p = 0; p < d.n * d.c; ++p) {
      T* g = gx + p * d.plane();
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x, ++o) {
          const T v = gy[o] * T(0.25);
          T* r0 = g + static_cast<std::size_t>(2 * y) * d.w + 2 * x;
          r0[0] += v;
          r0[1] += v;
          r0[d.w] += v;
          r0[d.w + 1] += v;
        }
      }
    }
  });
}

template <typename T>
Var upsample2(Tape<T>& tape, Var input) {
  BasicTensor<T> out = kernels::upsample2(tape.value(input));
  return tape.record(std::move(out), tape.requires_grad(input), [input](Tape<T>& t, Var self) {
    const BasicTensor<T>& gy = t.grad(self);
    const Dims4 d = dims_of(t.value(input).shape(), "upsample2");
    T* gx = t.grad_accumulator(input).ptr();
    const int ow = d.w * 2;
    for (int p = 0; p < d.n * d.c; ++p) {
      const T* g = gy.ptr() + p * d.plane() * 4;
      T* dst = gx + p * d.plane();
      for (int y = 0; y < d.h * 2; ++y) {
        const T* row = g + static_cast<std::size_t>(y) * ow;
        T* drow = dst + static_cast<std::size_t>(y / 2) * d.w;
        for (int x = 0; x < ow; ++x) drow[x / 2] += row[x];
      }
    }
  });
}

template <typename T>
Var relu(Tape<T>& tape, Var input) {
  BasicTensor<T> out = tape.value(input);
  for (T& v : out.data()) v = v > T(0) ? v : T(0);
  return tape.record(std::move(out), tape.requires_grad(input), [input](Tape<T>& t, Var self) {
    const auto y = t.value(self).data();
    const auto gy = t.grad(self).data();
    T* gx = t.grad_accumulator(input).ptr();
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] > T(0)) gx[i] += gy[i];
    }
  });
}

template <typename T>
Var bounded_out(Tape<T>& tape, Var input) {
  BasicTensor<T> out = tape.value(input);
  for (T& v : out.data()) v = (std::tanh(v) + T(1)) * T(0.5);
  return tape.record(std::move(out), tape.requires_grad(input), [input](Tape<T>& t, Var self) {
    const auto y = t.value(self).data();
    const auto gy = t.grad(self).data();
    T* gx = t.grad_accumulator(input).ptr();
    // d/dx (tanh x + 1)/2 = (1 - tanh^2)/2 = 2 y (1 - y)
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += gy[i] * T(2) * y[i] * (T(1) - y[i]);
  });
}

template <typename T>
Var concat_channels(Tape<T>& tape, Var a, Var b) {
  const BasicTensor<T>& va = tape.value(a);
  const BasicTensor<T>& vb = tape.value(b);
  const Dims4 da = dims_of(va.shape(), "concat_channels");
  const Dims4 db = dims_of(vb.shape(), "concat_channels");
  if (va.rank() != vb.rank() || da.n != db.n || da.h != db.h || da.w != db.w) {
    throw ShapeError("concat_channels: incompatible shapes " + shape_string(va.shape()) +
                     " and " + shape_string(vb.shape()));
  }
  const int c = da.c + db.c;
  BasicTensor<T> out(with_dims(va.shape(), da.n, c, da.h, da.w));
  const std::size_t sa = da.c * da.plane(), sb = db.c * db.plane();
  for (int n = 0; n < da.n; ++n) {
    std::copy_n(va.ptr() + n * sa, sa, out.ptr() + n * (sa + sb));
    std::copy_n(vb.ptr() + n * sb, sb, out.ptr() + n * (sa + sb) + sa);
  }
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(out), rg, [a, b, sa, sb, n_batch = da.n](Tape<T>& t, Var self) {
    const T* gy = t.grad(self).ptr();
    T* ga = t.requires_grad(a) ? t.grad_accumulator(a).ptr() : nullptr;
    T* gb = t.requires_grad(b) ? t.grad_accumulator(b).ptr() : nullptr;
    for (int n = 0; n < n_batch; ++n) {
      const T* src = gy + n * (sa + sb);
      if (ga) {
        for (std::size_t i = 0; i < sa; ++i) ga[n * sa + i] += src[i];
      }
      if (gb) {
        for (std::size_t i = 0; i < sb; ++i) gb[n * sb + i] += src[sa + i];
      }
    }
  });
}

template <typename T>
Var crop_center(Tape<T>& tape, Var input, int size) {
  const BasicTensor<T>& v = tape.value(input);
  const Dims4 d = dims_of(v.shape(), "crop_center");
  if (size < 1 || size > d.h || size > d.w || (d.h - size) % 2 || (d.w - size) % 2) {
    throw ShapeError("crop_center: cannot take a centred " + std::to_string(size) +
                     " window from " + shape_string(v.shape()));
  }
  const int oy = (d.h - size) / 2, ox = (d.w - size) / 2;
  BasicTensor<T> out(with_dims(v.shape(), d.n, d.c, size, size));
  T* dst = out.ptr();
  for (int p = 0; p < d.n * d.c; ++p) {
    const T* src = v.ptr() + p * d.plane();
    for (int y = 0; y < size; ++y) {
      std::copy_n(src + static_cast<std::size_t>(y + oy) * d.w + ox, size, dst);
      dst += size;
    }
  }
  return tape.record(std::move(out), tape.requires_grad(input),
                     [input, oy, ox, size, d](Tape<T>& t, Var self) {
                       const T* gy = t.grad(self).ptr();
                       T* gx = t.grad_accumulator(input).ptr();
                       for (int p = 0; p < d.n * d.c; ++p) {
                         T* g = gx + p * d.plane();
                         for (int y = 0; y < size; ++y) {
                           T* row = g + static_cast<std::size_t>(y + oy) * d.w + ox;
                           for (int x = 0; x < size; ++x) row[x] += *gy++;
                         }
                       }
                     });
}

template <typename T>
Var mse_loss(Tape<T>& tape, Var pred, Var target) {
  const BasicTensor<T>& p = tape.value(pred);
  const BasicTensor<T>& q = tape.value(target);
  if (p.shape() != q.shape()) {
    throw ShapeError("mse_loss: shape mismatch " + shape_string(p.shape()) + " vs " +
                     shape_string(q.shape()));
  }
  const double loss = kernels::mean_squared_error<T>(p.data(), q.data());
  BasicTensor<T> out(Shape{1}, static_cast<T>(loss));
  const bool rg = tape.requires_grad(pred) || tape.requires_grad(target);
  return tape.record(std::move(out), rg, [pred, target](Tape<T>& t, Var self) {
    const auto p = t.value(pred).data();
    const auto q = t.value(target).data();
    const T g = t.grad(self)[0] * T(2) / static_cast<T>(p.size());
    if (t.requires_grad(pred)) {
      T* gp = t.grad_accumulator(pred).ptr();
      for (std::size_t i = 0; i < p.size(); ++i) gp[i] += g * (p[i] - q[i]);
    }
    if (t.requires_grad(target)) {
      T* gq = t.grad_accumulator(target).ptr();
      for (std::size_t i = 0; i < p.size(); ++i) gq[i] -= g * (p[i] - q[i]);
    }
  });
}

template <typename T>
Var square(Tape<T>& tape, Var a) {
  BasicTensor<T> out = tape.value(a);
  for (T& v : out.data()) v = v * v;
  return tape.record(std::move(out), tape.requires_grad(a), [a](Tape<T>& t, Var self) {
    const auto x = t.value(a).data();
    const auto gy = t.grad(self).data();
    T* gx = t.grad_accumulator(a).ptr();
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += T(2) * x[i] * gy[i];
  });
}

template <typename T>
Var mean(Tape<T>& tape, Var a) {
  const BasicTensor<T>& v = tape.value(a);
  if (v.empty()) throw ShapeError("mean: empty tensor");
  BasicTensor<T> out(Shape{1}, v.sum() / static_cast<T>(v.size()));
  return tape.record(std::move(out), tape.requires_grad(a), [a](Tape<T>& t, Var self) {
    BasicTensor<T>& gx = t.grad_accumulator(a);
    const T g = t.grad(self)[0] / static_cast<T>(gx.size());
    for (T& v : gx.data()) v += g;
  });
}

template <typename T>
Var select(Tape<T>& tape, Var a, std::size_t index) {
  const BasicTensor<T>& v = tape.value(a);
  if (index >= v.size()) {
    throw ShapeError("select: index " + std::to_string(index) + " out of range for " +
                     shape_string(v.shape()));
  }
  BasicTensor<T> out(Shape{1}, v[index]);
  return tape.record(std::move(out), tape.requires_grad(a), [a, index](Tape<T>& t, Var self) {
    t.grad_accumulator(a)[index] += t.grad(self)[0];
  });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  const BasicTensor<T>& va = tape.value(a);
  const BasicTensor<T>& vb = tape.value(b);
  if (va.shape() != vb.shape()) {
    throw ShapeError("add: shape mismatch " + shape_string(va.shape()) + " vs " +
                     shape_string(vb.shape()));
  }
  BasicTensor<T> out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(out), rg, [a, b](Tape<T>& t, Var self) {
    const auto gy = t.grad(self).data();
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      T* g = t.grad_accumulator(v).ptr();
      for (std::size_t i = 0; i < gy.size(); ++i) g[i] += gy[i];
    }
  });
}

}  // namespace ops

#define CMSC_INSTANTIATE(T)                                                          \
  template class Tape<T>;                                                            \
  template Var ops::conv2d_same<T>(Tape<T>&, Var, Var, Var);                         \
  template Var ops::maxpool2<T>(Tape<T>&, Var);                                      \
  template Var ops::avgpool2<T>(Tape<T>&, Var);                                      \
  template Var ops::upsample2<T>(Tape<T>&, Var);                                     \
  template Var ops::relu<T>(Tape<T>&, Var);                                          \
  template Var ops::bounded_out<T>(Tape<T>&, Var);                                   \
  template Var ops::concat_channels<T>(Tape<T>&, Var, Var);                          \
  template Var ops::crop_center<T>(Tape<T>&, Var, int);                              \
  template Var ops::mse_loss<T>(Tape<T>&, Var, Var);                                 \
  template Var ops::square<T>(Tape<T>&, Var);                                        \
  template Var ops::mean<T>(Tape<T>&, Var);                                          \
  template Var ops::add<T>(Tape<T>&, Var, Var);                                      \
  template Var ops::select<T>(Tape<T>&, Var, std::size_t);                           \
  template BasicTensor<T> kernels::conv2d_same<T>(                                   \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);          \
  template BasicTensor<T> kernels::avgpool2<T>(const BasicTensor<T>&);               \
  template BasicTensor<T> kernels::maxpool2<T>(const BasicTensor<T>&, std::vector<int>*); \
  template BasicTensor<T> kernels::upsample2<T>(const BasicTensor<T>&);              \
  template double kernels::mean_squared_error<T>(std::span<const T>, std::span<const T>);

CMSC_INSTANTIATE(float)
CMSC_INSTANTIATE(double)

#undef CMSC_INSTANTIATE

}  // namespace cmsc
