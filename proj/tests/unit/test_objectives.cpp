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
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "qfsru/errors.hpp"
#include "qfsru/objectives.hpp"

using namespace qfsru;
using namespace qfsru::objectives;

namespace {

double oracle_info_nce(const Tensor& x, const Tensor& y, double tau) {
    const std::size_t B = x.rows(), d = x.cols();
    auto cosine = [&](std::size_t i, std::size_t j) {
        long double xy = 0, xx = 0, yy = 0;
        for (std::size_t k = 0; k < d; ++k) {
            xy += x.at(i, k) * y.at(j, k);
            xx += x.at(i, k) * x.at(i, k);
            yy += y.at(j, k) * y.at(j, k);
        }
        return xy / std::sqrt(xx * yy);
    };
    long double loss = 0;
    for (std::size_t i = 0; i < B; ++i) {
        long double denom = 0;
        for (std::size_t j = 0; j < B; ++j) denom += std::exp(cosine(i, j) / tau);
        loss += -std::log(std::exp(cosine(i, i) / tau) / denom);
    }
    return double(loss / B);
}

double row_norm(const Tensor& x, std::size_t r) {
    double s = 0.0;
    for (double v : x.row(r)) s += v * v;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("total loss weights") {
    const auto b = total_loss(1.0, 2.0, 4.0, 0.5);
    CHECK(b.total == doctest::Approx(1.0 + 0.3 * 3.0 + 0.7 * 0.5));
    CHECK(total_loss(0.25, 0, 0, 0).total == 0.25);
}

TEST_CASE("cross entropy hand values") {
    CHECK(cross_entropy(Tensor({2, 4}), std::vector<std::size_t>{0, 3}) == doctest::Approx(std::log(4.0)));
    const Tensor z({1, 3}, Vector{2, 1, 0});
    const double e = std::exp(1.0);
    CHECK(cross_entropy(z, std::vector<std::size_t>{0}) == doctest::Approx(-std::log(e * e / (e * e + e + 1))));
    // Shift invariance and large logits stay finite.
    const Tensor big({1, 3}, Vector{1002, 1001, 1000});
    CHECK(cross_entropy(big, std::vector<std::size_t>{0}) == doctest::Approx(cross_entropy(z, std::vector<std::size_t>{0})));
    CHECK_THROWS(cross_entropy(z, std::vector<std::size_t>{3}));
}

TEST_CASE("info_nce matches a direct oracle") {
    std::mt19937_64 rng(1);
    for (std::size_t B : {1u, 2u, 5u, 16u}) {
        const Tensor x = oracle::random_tensor({B, 8}, rng), y = oracle::random_tensor({B, 8}, rng);
        for (double tau : {kIntraTemperature, kCrossTemperature, 1.0}) {
            CHECK(info_nce(x, y, tau) == doctest::Approx(oracle_info_nce(x, y, tau)).epsilon(1e-10));
        }
    }
}

TEST_CASE("info_nce properties") {
    std::mt19937_64 rng(2);
    const Tensor x = oracle::random_tensor({6, 8}, rng), y = oracle::random_tensor({6, 8}, rng);
    CHECK(info_nce(x, y, 0.1) >= 0.0);
    // A batch of one has no negatives.
    CHECK(info_nce(oracle::random_tensor({1, 8}, rng), oracle::random_tensor({1, 8}, rng), 0.1) == doctest::Approx(0.0));
    // Orthonormal, perfectly aligned pairs: loss -> log(1 + (B-1) e^{-1/tau}).
    const Tensor eye = Tensor::identity(4);
    CHECK(info_nce(eye, eye, 0.05) == doctest::Approx(std::log(1.0 + 3.0 * std::exp(-20.0))));
    // Row scaling and joint permutation leave it unchanged.
    Tensor xs = x, xp({6, 8}), yp({6, 8});
    for (std::size_t i = 0; i < 8; ++i) xs.at(2, i) *= 7.5;
    const std::size_t perm[] = {3, 0, 5, 1, 4, 2};
    for (std::size_t r = 0; r < 6; ++r) {
        for (std::size_t c = 0; c < 8; ++c) {
            xp.at(r, c) = x.at(perm[r], c);
            yp.at(r, c) = y.at(perm[r], c);
        }
    }
    CHECK(info_nce(xs, y, 0.1) == doctest::Approx(info_nce(x, y, 0.1)).epsilon(1e-12));
    CHECK(info_nce(xp, yp, 0.1) == doctest::Approx(info_nce(x, y, 0.1)).epsilon(1e-12));
    // Aligned pairs score lower than mismatched ones.
    CHECK(info_nce(x, x, 0.1) < info_nce(x, y, 0.1));

    CHECK_THROWS_AS(info_nce(x, y, 0.0), ConfigError);
    CHECK_THROWS_AS(info_nce(x, Tensor({5, 8}, 1.0), 0.1), DimensionError);
    CHECK_THROWS_AS(info_nce(Tensor({2, 8}), Tensor({2, 8}, 1.0), 0.1), DegenerateInputError);
}

TEST_CASE("augment keeps row norms and is seeded") {
    std::mt19937_64 rng(3);
    const Tensor x = oracle::random_tensor({5, 16}, rng);
    std::mt19937_64 a(9), b(9), c(10);
    const Tensor xa = augment(x, kAugmentSigma, a);
    CHECK(xa.values() == augment(x, kAugmentSigma, b).values());
    CHECK(xa.values() != augment(x, kAugmentSigma, c).values());
    CHECK(xa.values() != x.values());
    for (std::size_t r = 0; r < 5; ++r) CHECK(row_norm(xa, r) == doctest::Approx(row_norm(x, r)).epsilon(1e-12));
    std::mt19937_64 z(1);
    CHECK(augment(x, 0.0, z).values() == x.values());
    CHECK_THROWS_AS(augment(x, -0.1, z), ConfigError);
}

TEST_CASE("build_objective composes the terms") {
    std::mt19937_64 rng(4);
    const std::vector<std::size_t> labels{0, 1, 2, 1};
    const Tensor logits = oracle::random_tensor({4, 3}, rng);
    const Tensor t = oracle::random_tensor({4, 8}, rng), v = oracle::random_tensor({4, 8}, rng);

    ad::Tape off;
    std::mt19937_64 r0(5);
    const auto lv0 = build_objective(off, off.constant(logits), labels, off.constant(t), off.constant(v), false, r0);
    const auto b0 = read_breakdown(off, lv0);
    CHECK(b0.total == b0.ce);
    CHECK(b0.ce == cross_entropy(logits, labels));
    CHECK(b0.cross == 0.0);

    ad::Tape on;
    std::mt19937_64 r1(5);
    const auto lv1 = build_objective(on, on.constant(logits), labels, on.constant(t), on.constant(v), true, r1);
    const auto b1 = read_breakdown(on, lv1);
    CHECK(b1.ce == b0.ce);
    CHECK(b1.cross == doctest::Approx(oracle_info_nce(t, v, kCrossTemperature)).epsilon(1e-10));
    CHECK(b1.intra_text > 0.0);
    CHECK(b1.intra_image > 0.0);
    CHECK(b1.total == doctest::Approx(total_loss(b1.ce, b1.intra_text, b1.intra_image, b1.cross).total).epsilon(1e-14));
    CHECK(b1.total > b1.ce);
}
