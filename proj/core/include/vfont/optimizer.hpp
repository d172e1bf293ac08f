// Copyright 2026 The vfont Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>

#include "vfont/nn.hpp"

namespace vfont {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam() = default;
  Adam(const nn::ParameterSet<T>& params, AdamConfig config = {})
      : config_(config), m_(params), v_(params) {}

  void step(nn::ParameterSet<T>& params, const nn::GradientSet<T>& grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
    const T step_size = static_cast<T>(lr / c1);
    const T inv_c2 = static_cast<T>(1.0 / c2);
    const T eps = static_cast<T>(config_.epsilon);
    for (int i = 0; i < params.size(); ++i) {
      auto& m = m_[i];
      auto& v = v_[i];
      const auto& g = grads[i];
      m = b1 * m + (T(1) - b1) * g;
      v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
      params[i].array() -=
          step_size * m.array() / ((v.array() * inv_c2).sqrt() + eps);
    }
  }

  std::int64_t steps_taken() const { return t_; }
  void set_steps_taken(std::int64_t t) { t_ = t; }
  nn::GradientSet<T>& first_moment() { return m_; }
  nn::GradientSet<T>& second_moment() { return v_; }
  const nn::GradientSet<T>& first_moment() const { return m_; }
  const nn::GradientSet<T>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  nn::GradientSet<T> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace vfont
