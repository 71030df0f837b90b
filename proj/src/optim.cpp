// Copyright 2026 the qfsru authors
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

#include "qfsru/optim.hpp"

#include <cmath>

#include "qfsru/errors.hpp"

namespace qfsru::optim {

void adam_step(Tensor& param, const Tensor& grad, AdamMoments& moments, double lr, double wd,
               std::size_t t, const AdamHyper& hyper) {
    if (t == 0) throw ContractError("adam_step: step counter starts at 1");
    if (param.size() != grad.size()) {
        throw DimensionError("adam_step: gradient " + grad.shape_string() +
                             " does not match parameter " + param.shape_string());
    }
    if (moments.first.size() != param.size()) {
        moments.first = Tensor(param.shape());
        moments.second = Tensor(param.shape());
    }
    const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i] + wd * param[i];
        double& m = moments.first[i];
        double& v = moments.second[i];
        m = hyper.beta1 * m + (1.0 - hyper.beta1) * g;
        v = hyper.beta2 * v + (1.0 - hyper.beta2) * g * g;
        param[i] -= lr * (m / c1) / (std::sqrt(v / c2) + hyper.eps);
    }
}

Adam::Adam(std::span<Tensor* const> params, double weight_decay, AdamHyper hyper)
    : params_(params.begin(), params.end()),
      moments_(params.size()),
      weight_decay_(weight_decay),
      hyper_(hyper) {}

void Adam::step(std::span<const Tensor> grads, double lr) {
    if (grads.size() != params_.size()) {
        throw DimensionError("Adam::step: expected " + std::to_string(params_.size()) +
                             " gradients, got " + std::to_string(grads.size()));
    }
    ++t_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        adam_step(*params_[i], grads[i], moments_[i], lr, weight_decay_, t_, hyper_);
    }
}

double clip_global_norm(std::span<Tensor> grads, double max_norm) {
    double sq = 0.0;
    for (const auto& g : grads) {
        for (double v : g.values()) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (auto& g : grads) {
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= s;
        }
    }
    return norm;
}

}  // namespace qfsru::optim
