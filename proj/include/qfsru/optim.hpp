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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qfsru/tensor.hpp"

namespace qfsru::optim {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamMoments {
    Tensor first;
    Tensor second;
};

// One bias-corrected Adam update at step t >= 1. Weight decay enters as an
// L2 term wd * theta added to the gradient.
void adam_step(Tensor& param, const Tensor& grad, AdamMoments& moments, double lr, double wd,
               std::size_t t, const AdamHyper& hyper = {});

// Adam over a fixed, ordered list of parameter tensors.
class Adam {
 public:
    Adam(std::span<Tensor* const> params, double weight_decay, AdamHyper hyper = {});

    void step(std::span<const Tensor> grads, double lr);
    std::size_t steps_taken() const noexcept { return t_; }

 private:
    std::vector<Tensor*> params_;
    std::vector<AdamMoments> moments_;
    double weight_decay_;
    AdamHyper hyper_;
    std::size_t t_ = 0;
};

// Scales all gradients in place so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(std::span<Tensor> grads, double max_norm);

}  // namespace qfsru::optim
