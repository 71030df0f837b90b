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

#include <random>
#include <span>

#include "qfsru/autodiff.hpp"
#include "qfsru/tensor.hpp"

namespace qfsru::objectives {

inline constexpr double kIntraWeight = 0.3;
inline constexpr double kCrossWeight = 0.7;
inline constexpr double kIntraTemperature = 0.07;
inline constexpr double kCrossTemperature = 0.05;
inline constexpr double kAugmentSigma = 0.1;

struct LossBreakdown {
    double ce = 0.0;
    double intra_text = 0.0;
    double intra_image = 0.0;
    double cross = 0.0;
    double total = 0.0;
};

// total = ce + 0.3 * (intra_text + intra_image) / 2 + 0.7 * cross.
LossBreakdown total_loss(double ce, double intra_text, double intra_image, double cross);

// Mean over the batch; labels must be < cols(logits).
double cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

// Mean over anchors i of -log(exp(cos(x_i, y_i)/tau) / sum_j exp(cos(x_i, y_j)/tau)),
// negatives drawn from the batch.
double info_nce(const Tensor& x, const Tensor& y, double tau);
ad::Var info_nce(ad::Tape& tape, ad::Var x, ad::Var y, double tau);

// x + sigma * N(0, 1), each row rescaled back to its original norm.
Tensor augment(const Tensor& x, double sigma, std::mt19937_64& rng);
// Differentiable in x; the noise is a constant drawn from rng.
ad::Var augment(ad::Tape& tape, ad::Var x, double sigma, std::mt19937_64& rng);

// Scalar vars for each term plus their weighted total.
struct LossVars {
    ad::Var ce, intra_text, intra_image, cross, total;
};

// Composes the total objective on the tape. With `contrastive` off the
// contrastive terms are skipped and total == ce.
LossVars build_objective(ad::Tape& tape, ad::Var logits, std::span<const std::size_t> labels,
                         ad::Var t, ad::Var v, bool contrastive, std::mt19937_64& augment_rng,
                         double augment_sigma = kAugmentSigma);

LossBreakdown read_breakdown(const ad::Tape& tape, const LossVars& vars);

}  // namespace qfsru::objectives
