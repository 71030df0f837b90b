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

#include "qfsru/objectives.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "qfsru/errors.hpp"

namespace qfsru::objectives {

LossBreakdown total_loss(double ce, double intra_text, double intra_image, double cross) {
    LossBreakdown b{ce, intra_text, intra_image, cross, 0.0};
    b.total = ce + (kIntraWeight * (intra_text + intra_image) / 2.0 + kCrossWeight * cross);
    return b;
}

double cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
    ad::Tape t;
    const ad::Var z = t.constant(Tensor({logits.rows(), logits.cols()}, logits.values()));
    return t.value(ad::cross_entropy(t, z, labels))[0];
}

ad::Var info_nce(ad::Tape& t, ad::Var x, ad::Var y, double tau) {
    if (!(tau > 0.0)) throw ConfigError("info_nce: temperature must be positive");
    const Tensor& xv = t.value(x);
    const Tensor& yv = t.value(y);
    if (xv.rows() != yv.rows() || xv.cols() != yv.cols()) {
        throw DimensionError("info_nce: " + xv.shape_string() + " vs " + yv.shape_string());
    }
    const ad::Var xn = ad::normalize_rows(t, x);
    const ad::Var yn = ad::normalize_rows(t, y);
    // cos[i, j] = <x_i, y_j>; row i is anchor i scored against every y_j.
    const ad::Var logits = ad::scale(t, ad::linear(t, xn, yn), 1.0 / tau);
    std::vector<std::size_t> diag(xv.rows());
    std::iota(diag.begin(), diag.end(), 0);
    return ad::cross_entropy(t, logits, diag);
}

double info_nce(const Tensor& x, const Tensor& y, double tau) {
    ad::Tape t;
    const ad::Var xv = t.constant(Tensor({x.rows(), x.cols()}, x.values()));
    const ad::Var yv = t.constant(Tensor({y.rows(), y.cols()}, y.values()));
    return t.value(info_nce(t, xv, yv, tau))[0];
}

namespace {

Tensor draw_noise(std::size_t rows, std::size_t cols, double sigma, std::mt19937_64& rng) {
    Tensor n({rows, cols});
    if (sigma == 0.0) return n;
    std::normal_distribution<double> normal(0.0, sigma);
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = normal(rng);
    return n;
}

}  // namespace

Tensor augment(const Tensor& x, double sigma, std::mt19937_64& rng) {
    ad::Tape t;
    const ad::Var xv = t.constant(Tensor({x.rows(), x.cols()}, x.values()));
    return t.value(augment(t, xv, sigma, rng));
}

ad::Var augment(ad::Tape& t, ad::Var x, double sigma, std::mt19937_64& rng) {
    if (!(sigma >= 0.0)) throw ConfigError("augment: sigma must be non-negative");
    if (sigma == 0.0) return x;
    const Tensor& xv = t.value(x);
    const ad::Var noise = t.constant(draw_noise(xv.rows(), xv.cols(), sigma, rng));
    const ad::Var noisy = ad::add(t, x, noise);
    const ad::Var ratio = ad::div_col(t, ad::row_norm(t, x), ad::row_norm(t, noisy));
    return ad::mul_col(t, noisy, ratio);
}

LossVars build_objective(ad::Tape& t, ad::Var logits, std::span<const std::size_t> labels,
                         ad::Var text, ad::Var image, bool contrastive, std::mt19937_64& augment_rng,
                         double augment_sigma) {
    LossVars v;
    v.ce = ad::cross_entropy(t, logits, labels);
    if (!contrastive) {
        v.total = v.ce;
        return v;
    }
    const ad::Var t_aug = augment(t, text, augment_sigma, augment_rng);
    const ad::Var v_aug = augment(t, image, augment_sigma, augment_rng);
    v.intra_text = info_nce(t, text, t_aug, kIntraTemperature);
    v.intra_image = info_nce(t, image, v_aug, kIntraTemperature);
    v.cross = info_nce(t, text, image, kCrossTemperature);
    const ad::Var terms[] = {v.ce, v.intra_text, v.intra_image, v.cross};
    const double weights[] = {1.0, kIntraWeight / 2.0, kIntraWeight / 2.0, kCrossWeight};
    v.total = ad::weighted_sum(t, terms, weights);
    return v;
}

LossBreakdown read_breakdown(const ad::Tape& t, const LossVars& v) {
    auto get = [&](ad::Var x) { return x.valid() ? t.value(x)[0] : 0.0; };
    LossBreakdown b{get(v.ce), get(v.intra_text), get(v.intra_image), get(v.cross), get(v.total)};
    return b;
}

}  // namespace qfsru::objectives
