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

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qfsru/errors.hpp"
#include "qfsru/freq_fusion.hpp"

using namespace qfsru;
using namespace qfsru::fusion;

namespace {

// Literal transcription: g = 1 / (1 + exp(-(w * mean(comp) + b))).
Vector oracle_gate(const Vector& comp, const Tensor& w, const Tensor& b) {
    long double m = 0;
    for (double c : comp) m += c;
    m /= comp.size();
    Vector g(b.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = double(1.0L / (1.0L + std::exp(-(w[i] * m + b[i]))));
    return g;
}

FusionParams random_params(std::size_t d, std::size_t k, std::mt19937_64& rng) {
    FusionParams p = FusionParams::random(d, k, rng);
    for (Tensor* t : {&p.filter_text_b, &p.filter_image_b, &p.gate_text_b, &p.gate_image_b}) {
        *t = oracle::random_tensor(t->shape(), rng, 0.5);
    }
    return p;
}

}  // namespace

TEST_CASE("spectral transform: DC, shift invariance, oracle") {
    const Vector c(8, 1.5);
    const auto [tf, vf] = spectral_transform(c, c);
    CHECK(tf[0] == doctest::Approx(12.0));
    for (std::size_t i = 1; i < 8; ++i) CHECK(std::abs(tf[i]) <= 1e-12);

    std::mt19937_64 rng(1);
    const Vector v = oracle::random_vector(16, rng);
    Vector shifted(16);
    for (std::size_t i = 0; i < 16; ++i) shifted[(i + 5) % 16] = v[i];
    CHECK(oracle::max_abs_diff(spectral_transform(v, v).second, spectral_transform(v, shifted).second) <= 1e-12);

    const Vector t = oracle::random_vector(256, rng);
    CHECK(oracle::max_abs_diff(spectral_transform(t, t).first, oracle::naive_magnitude(t)) <= 1e-9);
}

TEST_CASE("filter_compress") {
    const Vector m{1, 2, 3, 4};
    CHECK(filter_compress(m, Tensor::identity(4), Vector(4, 0.0)) == m);
    CHECK(filter_compress(m, Tensor({4, 4}), Vector{7, 8, 9, 10}) == Vector{7, 8, 9, 10});
    std::mt19937_64 rng(2);
    const Tensor w = oracle::random_tensor({4, 16}, rng);
    const Vector x = oracle::random_vector(16, rng), b = oracle::random_vector(4, rng);
    CHECK(oracle::max_abs_diff(filter_compress(x, w, b), oracle::naive_matvec(w, x, b)) <= 1e-12);
}

TEST_CASE("co_select: half gate, saturated gate, oracle") {
    std::mt19937_64 rng(3);
    const Vector tf = oracle::random_vector(8, rng), vf = oracle::random_vector(8, rng);
    const Vector tc = oracle::random_vector(4, rng), vc = oracle::random_vector(4, rng);

    FusionParams zero = FusionParams::zeros(8, 4);
    const auto [th, vh] = co_select(tf, vf, tc, vc, zero);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(th[i] == 0.5 * tf[i]);
        CHECK(vh[i] == 0.5 * vf[i]);
    }

    FusionParams sat = zero;
    sat.gate_text_b.fill(50.0);
    sat.gate_image_b.fill(50.0);
    const auto [ts, vs] = co_select(tf, vf, tc, vc, sat);
    CHECK(oracle::max_abs_diff(ts, tf) <= 1e-12);
    CHECK(oracle::max_abs_diff(vs, vf) <= 1e-12);

    const FusionParams p = random_params(8, 4, rng);
    const auto [te, ve] = co_select(tf, vf, tc, vc, p);
    const Vector gt = oracle_gate(vc, p.gate_text_w, p.gate_text_b);
    const Vector gv = oracle_gate(tc, p.gate_image_w, p.gate_image_b);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(std::abs(te[i] - tf[i] * gt[i]) <= 1e-12);
        CHECK(std::abs(ve[i] - vf[i] * gv[i]) <= 1e-12);
    }
    CHECK_THROWS_AS(co_select(Vector(7), vf, tc, vc, p), DimensionError);
}

TEST_CASE("gates stay inside (0, 1] and never amplify") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        FusionParams p = random_params(16, 4, rng);
        for (Tensor* t : {&p.gate_text_w, &p.gate_image_w}) *t = oracle::random_tensor(t->shape(), rng, 3.0);
        const Vector t = oracle::random_vector(16, rng, 2.0), v = oracle::random_vector(16, rng, 2.0);
        const auto s = run_stage(t, v, p);
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(s.g_text[i] > 0.0);
            CHECK(s.g_text[i] <= 1.0);
            CHECK(s.g_image[i] > 0.0);
            CHECK(s.g_image[i] <= 1.0);
            CHECK(std::abs(s.t_enhanced[i]) <= std::abs(s.t_freq[i]));
            CHECK(std::abs(s.v_enhanced[i]) <= std::abs(s.v_freq[i]));
        }
    }
}

TEST_CASE("spatial-only stage is the identity on projected features") {
    std::mt19937_64 rng(5);
    const FusionParams p = random_params(8, 4, rng);
    const Vector t = oracle::random_vector(8, rng), v = oracle::random_vector(8, rng);
    const auto s = run_stage(t, v, p, StageOptions{false, false, false});
    CHECK(s.t_enhanced == t);
    CHECK(s.v_enhanced == v);
    const auto nofft = run_stage(t, v, p, StageOptions{false, true, false});
    CHECK(nofft.t_freq == t);
    CHECK(nofft.t_enhanced != t);
}

TEST_CASE("tape stage matches the tape-free stage") {
    std::mt19937_64 rng(6);
    const FusionParams p = random_params(8, 4, rng);
    const Tensor t = oracle::random_tensor({3, 8}, rng), v = oracle::random_tensor({3, 8}, rng);
    for (const StageOptions opts : {StageOptions{true, true, false}, StageOptions{true, true, true},
                                    StageOptions{false, true, false}, StageOptions{true, false, false}}) {
        ad::Tape tape;
        const FusionVars fv{tape.leaf(p.filter_text_w), tape.leaf(p.filter_text_b), tape.leaf(p.filter_image_w),
                            tape.leaf(p.filter_image_b), tape.leaf(p.gate_text_w), tape.leaf(p.gate_text_b),
                            tape.leaf(p.gate_image_w),  tape.leaf(p.gate_image_b)};
        const auto sv = stage_forward(tape, tape.constant(t), tape.constant(v), fv, opts);
        for (std::size_t r = 0; r < 3; ++r) {
            const Vector tr(t.row(r).begin(), t.row(r).end()), vr(v.row(r).begin(), v.row(r).end());
            const auto s = run_stage(tr, vr, p, opts);
            const auto& te = tape.value(sv.t_enhanced);
            const auto& ve = tape.value(sv.v_enhanced);
            CHECK(oracle::max_abs_diff(Vector(te.row(r).begin(), te.row(r).end()), s.t_enhanced) <= 1e-12);
            CHECK(oracle::max_abs_diff(Vector(ve.row(r).begin(), ve.row(r).end()), s.v_enhanced) <= 1e-12);
        }
    }
}
