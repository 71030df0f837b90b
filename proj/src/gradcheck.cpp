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

#include "qfsru/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qfsru/freq_fusion.hpp"
#include "qfsru/model.hpp"
#include "qfsru/objectives.hpp"
#include "qfsru/rng.hpp"

namespace qfsru {

namespace {

double evaluate(const std::vector<Tensor>& inputs, const ScalarGraph& graph) {
    ad::Tape t;
    std::vector<ad::Var> leaves;
    for (const auto& x : inputs) leaves.push_back(t.leaf(x));
    return t.value(graph(t, leaves))[0];
}

double norm(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return std::sqrt(s);
}

}  // namespace

GradCheckResult check_gradients(std::string name, const std::vector<Tensor>& inputs,
                                const ScalarGraph& graph, double h, double tol) {
    ad::Tape t;
    std::vector<ad::Var> leaves;
    for (const auto& x : inputs) leaves.push_back(t.leaf(x));
    t.backward(graph(t, leaves));

    GradCheckResult r{std::move(name), 0.0, tol, false};
    std::vector<Tensor> probe = inputs;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Tensor g = t.grad(leaves[k]);
        Tensor fd(inputs[k].shape());
        for (std::size_t i = 0; i < fd.size(); ++i) {
            const double x0 = probe[k][i];
            probe[k][i] = x0 + h;
            const double up = evaluate(probe, graph);
            probe[k][i] = x0 - h;
            const double down = evaluate(probe, graph);
            probe[k][i] = x0;
            fd[i] = (up - down) / (2.0 * h);
        }
        Tensor diff = g;
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= fd[i];
        const double err = norm(diff) / std::max({norm(g), norm(fd), 1e-8});
        r.max_rel_error = std::max(r.max_rel_error, err);
    }
    r.passed = r.max_rel_error <= tol;
    return r;
}

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed) {
    auto rng = rng_stream(seed, "gradcheck");
    std::normal_distribution<double> normal(0.0, 1.0);
    auto randn = [&](std::vector<std::size_t> shape, double scale = 1.0) {
        Tensor x(std::move(shape));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = scale * normal(rng);
        return x;
    };
    // Weighted sum against a fixed random tensor so every output entry matters.
    auto probe = [](ad::Tape& t, ad::Var y, std::uint64_t s) {
        const Tensor& yv = t.value(y);
        Tensor w(yv.shape());
        std::mt19937_64 r(s);
        std::normal_distribution<double> n(0.0, 1.0);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = n(r);
        return ad::mean_rows(t, ad::mean_cols(t, ad::mul(t, y, t.constant(std::move(w)))));
    };

    constexpr std::size_t B = 3, d = 8, K = 4, C = 3;
    std::vector<GradCheckResult> out;

    out.push_back(check_gradients("projection", {randn({B, 5}), randn({d, 5}), randn({d})},
                                  [&](ad::Tape& t, std::span<const ad::Var> v) {
                                      return probe(t, ad::linear(t, v[0], v[1], v[2]), 1);
                                  }));

    out.push_back(check_gradients("dft_magnitude", {randn({B, d})},
                                  [&](ad::Tape& t, std::span<const ad::Var> v) {
                                      return probe(t, ad::dft_magnitude(t, v[0]), 2);
                                  }));
    out.push_back(check_gradients("dft_magnitude_odd", {randn({2, 6})},
                                  [&](ad::Tape& t, std::span<const ad::Var> v) {
                                      return probe(t, ad::dft_magnitude(t, v[0]), 3);
                                  }));

    out.push_back(check_gradients("filter_bank", {randn({B, d}), randn({K, d}), randn({K})},
                                  [&](ad::Tape& t, std::span<const ad::Var> v) {
                                      const ad::Var m = ad::dft_magnitude(t, v[0]);
                                      return probe(t, ad::linear(t, m, v[1], v[2]), 4);
                                  }));

    {
        std::vector<Tensor> in{randn({B, d}), randn({B, d})};
        const auto p = fusion::FusionParams::random(d, K, rng);
        for (const Tensor* x : {&p.filter_text_w, &p.filter_text_b, &p.filter_image_w, &p.filter_image_b,
                                &p.gate_text_w, &p.gate_text_b, &p.gate_image_w, &p.gate_image_b}) {
            in.push_back(*x);
        }
        // Nonzero biases so the gates are not all at the same operating point.
        for (std::size_t i = 2; i < in.size(); ++i) {
            for (std::size_t j = 0; j < in[i].size(); ++j) in[i][j] += 0.3 * normal(rng);
        }
        auto stage = [&](fusion::StageOptions opts, std::uint64_t s) {
            return [opts, s, &probe](ad::Tape& t, std::span<const ad::Var> v) {
                const fusion::FusionVars fv{v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
                const auto sv = fusion::stage_forward(t, v[0], v[1], fv, opts);
                const ad::Var parts[] = {sv.t_enhanced, sv.v_enhanced};
                return probe(t, ad::concat_cols(t, parts), s);
            };
        };
        out.push_back(check_gradients("gated_co_selection", in, stage({true, true, false}, 5)));
        out.push_back(check_gradients("gated_co_selection_tied", in, stage({true, true, true}, 6)));
    }

    out.push_back(check_gradients("sigmoid", {randn({B, d})}, [&](ad::Tape& t, std::span<const ad::Var> v) {
        return probe(t, ad::sigmoid(t, v[0]), 7);
    }));
    out.push_back(check_gradients("gelu", {randn({B, d})}, [&](ad::Tape& t, std::span<const ad::Var> v) {
        return probe(t, ad::gelu(t, v[0]), 8);
    }));
    out.push_back(check_gradients("softmax", {randn({B, d})}, [&](ad::Tape& t, std::span<const ad::Var> v) {
        return probe(t, ad::softmax(t, v[0]), 9);
    }));
    out.push_back(check_gradients("layernorm", {randn({B, d}), randn({d}), randn({d})},
                                  [&](ad::Tape& t, std::span<const ad::Var> v) {
                                      return probe(t, ad::layernorm(t, v[0], v[1], v[2]), 10);
                                  }));
    out.push_back(check_gradients("mean_pool", {randn({B, d})}, [&](ad::Tape& t, std::span<const ad::Var> v) {
        return probe(t, ad::mean_cols(t, v[0]), 11);
    }));
    out.push_back(check_gradients("dropout_fixed_mask", {randn({B, d})},
                                  [&](ad::Tape& t, std::span<const ad::Var> v) {
                                      std::mt19937_64 mask_rng(seed);
                                      return probe(t, ad::dropout(t, v[0], 0.3, mask_rng, true), 12);
                                  }));

    const std::vector<std::size_t> labels{0, 2, 1};
    out.push_back(check_gradients("cross_entropy", {randn({B, C})}, [&](ad::Tape& t, std::span<const ad::Var> v) {
        return ad::cross_entropy(t, v[0], labels);
    }));

    {
        model::ModelConfig mc;
        mc.d_model = 4;
        mc.classes = C;
        mc.hidden1 = 6;
        mc.hidden2 = 5;
        const auto params = model::init_params(mc, seed);
        const auto& h = params.head;
        std::vector<Tensor> in{randn({B, mc.fused_dim()}), h.w1, h.b1, h.ln1_gamma, h.ln1_beta,
                               h.w2, h.b2, h.ln2_gamma, h.ln2_beta, h.w3, h.b3};
        for (std::size_t i = 2; i < in.size(); ++i) {
            for (std::size_t j = 0; j < in[i].size(); ++j) in[i][j] += 0.2 * normal(rng);
        }
        out.push_back(check_gradients("mlp_classifier", in, [&](ad::Tape& t, std::span<const ad::Var> v) {
            const model::ClassifierVars cv{v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
            std::mt19937_64 mask_rng(seed + 1);
            const ad::Var logits = model::classifier_forward(t, v[0], cv, 0.1, true, mask_rng);
            return ad::cross_entropy(t, logits, labels);
        }));
    }

    out.push_back(check_gradients("info_nce", {randn({B, d}), randn({B, d})},
                                  [&](ad::Tape& t, std::span<const ad::Var> v) {
                                      return objectives::info_nce(t, v[0], v[1], objectives::kCrossTemperature);
                                  }));
    out.push_back(check_gradients("augment", {randn({B, d})}, [&](ad::Tape& t, std::span<const ad::Var> v) {
        std::mt19937_64 noise_rng(seed + 2);
        return probe(t, objectives::augment(t, v[0], objectives::kAugmentSigma, noise_rng), 13);
    }));
    out.push_back(check_gradients("total_objective", {randn({B, C}), randn({B, d}), randn({B, d})},
                                  [&](ad::Tape& t, std::span<const ad::Var> v) {
                                      std::mt19937_64 noise_rng(seed + 3);
                                      return objectives::build_objective(t, v[0], labels, v[1], v[2], true,
                                                                         noise_rng, objectives::kAugmentSigma)
                                          .total;
                                  }));
    return out;
}

}  // namespace qfsru
