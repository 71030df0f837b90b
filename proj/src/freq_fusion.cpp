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

#include "qfsru/freq_fusion.hpp"

#include <cmath>

#include "qfsru/errors.hpp"
#include "qfsru/kernels.hpp"

namespace qfsru::fusion {

namespace {

Tensor xavier(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / double(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor t({rows, cols});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
    return t;
}

double logistic(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / double(x.size());
}

// sigma(W * avg(driver) + b), W: [d x 1].
Vector gate(std::span<const double> driver, const Tensor& w, const Tensor& b) {
    const double pooled = mean(driver);
    Vector g(b.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = logistic(w[i] * pooled + b[i]);
    return g;
}

}  // namespace

FusionParams FusionParams::zeros(std::size_t d, std::size_t k) {
    return FusionParams{Tensor({k, d}), Tensor({k}), Tensor({k, d}), Tensor({k}),
                        Tensor({d, 1}), Tensor({d}), Tensor({d, 1}), Tensor({d})};
}

FusionParams FusionParams::random(std::size_t d, std::size_t k, std::mt19937_64& rng) {
    FusionParams p = zeros(d, k);
    p.filter_text_w = xavier(k, d, rng);
    p.filter_image_w = xavier(k, d, rng);
    p.gate_text_w = xavier(d, 1, rng);
    p.gate_image_w = xavier(d, 1, rng);
    return p;
}

std::pair<Vector, Vector> spectral_transform(std::span<const double> t, std::span<const double> v) {
    return {kernels::dft_magnitude(t), kernels::dft_magnitude(v)};
}

Vector filter_compress(std::span<const double> m_freq, const Tensor& w, std::span<const double> b) {
    return kernels::matvec(w, m_freq, b);
}

std::pair<Vector, Vector> co_select(std::span<const double> t_freq, std::span<const double> v_freq,
                                    std::span<const double> t_comp, std::span<const double> v_comp,
                                    const FusionParams& p) {
    const std::size_t d = p.d_model();
    if (t_freq.size() != d || v_freq.size() != d) {
        throw DimensionError("co_select: spectra must have d_model = " + std::to_string(d) +
                             " entries");
    }
    if (t_comp.empty() || v_comp.empty()) throw DimensionError("co_select: empty filter output");
    const Vector g_text = gate(v_comp, p.gate_text_w, p.gate_text_b);
    const Vector g_image = gate(t_comp, p.gate_image_w, p.gate_image_b);
    Vector t_enh(d), v_enh(d);
    for (std::size_t i = 0; i < d; ++i) {
        t_enh[i] = t_freq[i] * g_text[i];
        v_enh[i] = v_freq[i] * g_image[i];
    }
    return {std::move(t_enh), std::move(v_enh)};
}

SpectralFeatures run_stage(std::span<const double> t, std::span<const double> v,
                           const FusionParams& p, const StageOptions& options) {
    SpectralFeatures s;
    if (options.frequency) {
        std::tie(s.t_freq, s.v_freq) = spectral_transform(t, v);
    } else {
        s.t_freq.assign(t.begin(), t.end());
        s.v_freq.assign(v.begin(), v.end());
    }
    if (!options.co_selection) {
        s.t_enhanced = s.t_freq;
        s.v_enhanced = s.v_freq;
        return s;
    }
    const Tensor& img_w = options.tie_filters ? p.filter_text_w : p.filter_image_w;
    const Tensor& img_b = options.tie_filters ? p.filter_text_b : p.filter_image_b;
    s.t_compressed = filter_compress(s.t_freq, p.filter_text_w, p.filter_text_b.span());
    s.v_compressed = filter_compress(s.v_freq, img_w, img_b.span());
    s.g_text = gate(s.v_compressed, p.gate_text_w, p.gate_text_b);
    s.g_image = gate(s.t_compressed, p.gate_image_w, p.gate_image_b);
    std::tie(s.t_enhanced, s.v_enhanced) =
        co_select(s.t_freq, s.v_freq, s.t_compressed, s.v_compressed, p);
    return s;
}

StageVars stage_forward(ad::Tape& tape, ad::Var t, ad::Var v, const FusionVars& p,
                        const StageOptions& options) {
    StageVars out;
    if (options.frequency) {
        out.t_freq = ad::dft_magnitude(tape, t);
        out.v_freq = ad::dft_magnitude(tape, v);
    } else {
        out.t_freq = t;
        out.v_freq = v;
    }
    if (!options.co_selection) {
        out.t_enhanced = out.t_freq;
        out.v_enhanced = out.v_freq;
        return out;
    }
    const ad::Var img_w = options.tie_filters ? p.filter_text_w : p.filter_image_w;
    const ad::Var img_b = options.tie_filters ? p.filter_text_b : p.filter_image_b;
    const ad::Var t_comp = ad::linear(tape, out.t_freq, p.filter_text_w, p.filter_text_b);
    const ad::Var v_comp = ad::linear(tape, out.v_freq, img_w, img_b);
    const ad::Var g_text =
        ad::sigmoid(tape, ad::linear(tape, ad::mean_cols(tape, v_comp), p.gate_text_w, p.gate_text_b));
    const ad::Var g_image =
        ad::sigmoid(tape, ad::linear(tape, ad::mean_cols(tape, t_comp), p.gate_image_w, p.gate_image_b));
    out.t_enhanced = ad::mul(tape, out.t_freq, g_text);
    out.v_enhanced = ad::mul(tape, out.v_freq, g_image);
    return out;
}

}  // namespace qfsru::fusion
