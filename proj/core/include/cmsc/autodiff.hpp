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

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cmsc/tensor.hpp"

namespace cmsc {

/// A named trainable tensor with its gradient accumulator.
template <typename T>
struct Parameter {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, BasicTensor<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(T(0)); }
};

/// Handle to a node recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape. Nodes are appended in forward order; backward() walks
/// them in reverse, calling each node's pullback with its output gradient.
///
/// A tape is single-use: record a forward pass, call backward() once.
template <typename T>
class Tape {
 public:
  /// Pullback: reads grad(self) and accumulates into the grads of inputs.
  using Pullback = std::function<void(Tape&, Var self)>;

  /// Leaf that never receives a gradient.
  Var constant(BasicTensor<T> value);
  /// Leaf whose gradient is kept after backward() (e.g. for probing inputs).
  Var input(BasicTensor<T> value);
  /// Leaf bound to a Parameter; backward() adds into `param.grad`.
  Var parameter(Parameter<T>& param);

  /// Appends an op result. `pullback` may be empty when no input needs grad.
  Var record(BasicTensor<T> value, bool requires_grad, Pullback pullback);

  const BasicTensor<T>& value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  /// Gradient of the last backward() target w.r.t. `v`; zero if unreached.
  const BasicTensor<T>& grad(Var v) const;

  /// Mutable accumulator, allocated on first use. Only valid during backward.
  BasicTensor<T>& grad_accumulator(Var v);

  /// Seeds d(loss)/d(loss) = 1 and runs all pullbacks. `loss` must hold one element.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    BasicTensor<T> value;
    BasicTensor<T> grad;
    bool requires_grad = false;
    Pullback pullback;
    Parameter<T>* param = nullptr;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Differentiable ops over N x C x H x W tensors. Each records one node.
namespace ops {

/// 3x3 convolution with one pixel of zero padding; weight O x C x 3 x 3, bias O.
template <typename T>
Var conv2d_same(Tape<T>& tape, Var input, Var weight, Var bias);

/// 2x2 max pooling, stride 2. Ties resolve to the first element in row-major order.
template <typename T>
Var maxpool2(Tape<T>& tape, Var input);

/// 2x2 average pooling, stride 2.
template <typename T>
Var avgpool2(Tape<T>& tape, Var input);

/// Nearest-neighbour 2x upsampling.
template <typename T>
Var upsample2(Tape<T>& tape, Var input);

template <typename T>
Var relu(Tape<T>& tape, Var input);

/// (tanh(x) + 1) / 2, mapping the reals onto [0, 1].
template <typename T>
Var bounded_out(Tape<T>& tape, Var input);

/// Channel-wise concatenation of two tensors with equal N, H, W.
template <typename T>
Var concat_channels(Tape<T>& tape, Var a, Var b);

/// Central size x size spatial window.
template <typename T>
Var crop_center(Tape<T>& tape, Var input, int size);

/// mean((pred - target)^2) as a one-element tensor.
template <typename T>
Var mse_loss(Tape<T>& tape, Var pred, Var target);

/// Elementwise a * a, used by tests and the grad-check suite.
template <typename T>
Var square(Tape<T>& tape, Var a);

/// Mean over all elements, as a one-element tensor.
template <typename T>
Var mean(Tape<T>& tape, Var a);

/// The single element at flat `index`, as a one-element tensor.
template <typename T>
Var select(Tape<T>& tape, Var a, std::size_t index);

/// Sum of two equally-shaped tensors.
template <typename T>
Var add(Tape<T>& tape, Var a, Var b);

}  // namespace ops

// Non-recording helpers used by inference, the pyramid and the evaluators.
namespace kernels {

template <typename T>
BasicTensor<T> conv2d_same(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                           const BasicTensor<T>& bias);
template <typename T>
BasicTensor<T> avgpool2(const BasicTensor<T>& input);
template <typename T>
BasicTensor<T> maxpool2(const BasicTensor<T>& input, std::vector<int>* argmax = nullptr);
template <typename T>
BasicTensor<T> upsample2(const BasicTensor<T>& input);

/// Mean squared difference; shared by the training loss and the MSE metric.
template <typename T>
double mean_squared_error(std::span<const T> a, std::span<const T> b);

}  // namespace kernels

}  // namespace cmsc
