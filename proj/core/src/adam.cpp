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

#include "cmsc/adam.hpp"

#include <cmath>
#include <limits>

namespace cmsc {

template <typename T>
AdamState<T>::AdamState(std::span<const Parameter<T>> params, AdamOptions options)
    : options_(options) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.emplace_back(p.value.shape());
    v_.emplace_back(p.value.shape());
  }
}

template <typename T>
void AdamState<T>::step(std::span<Parameter<T>> params) {
  if (params.size() != m_.size()) {
    throw StateError("adam: optimizer holds " + std::to_string(m_.size()) +
                     " moment slots but got " + std::to_string(params.size()) +
                     " parameters");
  }
  if (step_ == std::numeric_limits<std::int64_t>::max()) {
    throw StateError("adam: step counter overflow");
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.learning_rate, eps = options_.epsilon;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = params[i];
    if (p.grad.shape() != p.value.shape() || m_[i].shape() != p.value.shape()) {
      throw ShapeError("adam: parameter '" + p.name + "' changed shape");
    }
    T* value = p.value.ptr();
    const T* grad = p.grad.ptr();
    T* m = m_[i].ptr();
    T* v = v_[i].ptr();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = grad[k];
      const double mk = b1 * m[k] + (1.0 - b1) * g;
      const double vk = b2 * v[k] + (1.0 - b2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double mhat = mk / c1;
      const double vhat = vk / c2;
      value[k] = static_cast<T>(value[k] - lr * mhat / (std::sqrt(vhat) + eps));
    }
  }
}

template class AdamState<float>;
template class AdamState<double>;

}  // namespace cmsc
