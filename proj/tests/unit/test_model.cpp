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
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "qfsru/errors.hpp"
#include "qfsru/model.hpp"

using namespace qfsru;
using namespace qfsru::model;

namespace {

ModelConfig small_config(FusionMode mode = FusionMode::FreqOnly) {
    ModelConfig c;
    c.d_model = 8;
    c.text_dim = 12;
    c.image_dim = 8;
    c.classes = 3;
    c.hidden1 = 10;
    c.hidden2 = 6;
    c.fusion_mode = mode;
    return c;
}

// Eval-mode head, written out directly.
Vector oracle_head(const Vector& z, const ClassifierParams& h) {
    auto lin = [](const Vector& x, const Tensor& w, const Tensor& b) {
        return oracle::naive_matvec(w, x, b.values());
    };
    auto ln_gelu = [](Vector x, const Tensor& g, const Tensor& b) {
        long double mean = 0, var = 0;
        for (double v : x) mean += v;
        mean /= x.size();
        for (double v : x) var += (v - mean) * (v - mean);
        var /= x.size();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double n = double((x[i] - mean) / std::sqrt(var + 1e-5L)) * g[i] + b[i];
            x[i] = 0.5 * n * (1.0 + std::erf(n / std::sqrt(2.0)));
        }
        return x;
    };
    const Vector a = ln_gelu(lin(z, h.w1, h.b1), h.ln1_gamma, h.ln1_beta);
    const Vector b = ln_gelu(lin(a, h.w2, h.b2), h.ln2_gamma, h.ln2_beta);
    return lin(b, h.w3, h.b3);
}

void perturb(ModelParams& p, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 0.1);
    for (auto& [name, t] : p.named()) {
        for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] += n(rng);
    }
}

}  // namespace

TEST_CASE("init: shapes, identity projection, fixed parameter order") {
    const auto c = small_config();
    const auto p = init_params(c, 7);
    CHECK(p.image_proj_w.values() == Tensor::identity(8).values());
    CHECK(p.text_proj_w.shape() == std::vector<std::size_t>{8, 12});
    CHECK(p.head.w1.shape() == std::vector<std::size_t>{10, 16});
    CHECK(p.head.w3.shape() == std::vector<std::size_t>{3, 6});
    for (double g : p.head.ln1_gamma.values()) CHECK(g == 1.0);
    for (double b : p.text_proj_b.values()) CHECK(b == 0.0);
    const double limit = std::sqrt(6.0 / (10 + 16));
    for (double w : p.head.w1.values()) CHECK(std::abs(w) <= limit);

    const auto named = p.named();
    REQUIRE(named.size() == 22);
    CHECK(named.front().first == "text_proj_w");
    CHECK(named.back().first == "mlp_b3");

    CHECK(init_params(c, 7).head.w2.values() == p.head.w2.values());
    CHECK(init_params(c, 8).head.w2.values() != p.head.w2.values());
    CHECK(init_params(small_config(FusionMode::FreqPlusKnowledge), 7).head.w1.cols() == 24);

    auto bad = c;
    bad.dropout = 1.0;
    CHECK_THROWS_AS(init_params(bad, 1), ConfigError);
}

TEST_CASE("fuse concatenates in fixed order") {
    const Vector t{1, 2}, v{3, 4}, k{5, 6};
    CHECK(fuse(t, v, std::nullopt, FusionMode::FreqOnly) == Vector{1, 2, 3, 4});
    CHECK(fuse(t, v, std::span<const double>(k), FusionMode::FreqOnly) == Vector{1, 2, 3, 4});
    CHECK(fuse(t, v, std::span<const double>(k), FusionMode::FreqPlusKnowledge) == Vector{1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(fuse(t, v, std::nullopt, FusionMode::FreqPlusKnowledge), ConfigError);
    CHECK_THROWS_AS(fuse(t, Vector{1}, std::nullopt, FusionMode::FreqOnly), DimensionError);
    CHECK(parse_fusion_mode(to_string(FusionMode::FreqPlusKnowledge)) == FusionMode::FreqPlusKnowledge);
    CHECK_THROWS_AS(parse_fusion_mode("late"), ConfigError);
}

TEST_CASE("classifier head matches a direct oracle in eval mode") {
    std::mt19937_64 rng(2);
    auto p = init_params(small_config(), 3);
    perturb(p, rng);
    for (int rep = 0; rep < 5; ++rep) {
        const Vector z = oracle::random_vector(16, rng);
        std::mt19937_64 unused(0);
        const Vector logits = classify(z, p.head, false, unused);
        REQUIRE(logits.size() == 3);
        CHECK(oracle::max_abs_diff(logits, oracle_head(z, p.head)) <= 1e-10);
    }
    std::mt19937_64 unused(0);
    CHECK_THROWS_AS(classify(Vector(15, 1.0), p.head, false, unused), DimensionError);
}

TEST_CASE("dropout only in training; eval is deterministic") {
    std::mt19937_64 rng(4);
    const auto p = init_params(small_config(), 5);
    const Vector z = oracle::random_vector(16, rng);
    std::mt19937_64 r1(1), r2(2);
    CHECK(classify(z, p.head, false, r1) == classify(z, p.head, false, r2));
    std::mt19937_64 r3(1), r4(2);
    CHECK(classify(z, p.head, true, r3, 0.5) != classify(z, p.head, true, r4, 0.5));
}

TEST_CASE("checkpoint round trip is exact") {
    std::mt19937_64 rng(6);
    Checkpoint ck{small_config(FusionMode::FreqPlusKnowledge), {}};
    ck.params = init_params(ck.config, 9);
    perturb(ck.params, rng);
    const std::string text = serialize_checkpoint(ck);
    const Checkpoint back = parse_checkpoint(text);
    CHECK(back.config.fusion_mode == FusionMode::FreqPlusKnowledge);
    CHECK(back.config.hidden1 == 10);
    const auto a = ck.params.named();
    const auto b = back.params.named();
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].second->shape() == b[i].second->shape());
        CHECK(a[i].second->values() == b[i].second->values());
    }
    CHECK(serialize_checkpoint(back) == text);

    const auto path = std::filesystem::temp_directory_path() / "qfsru_test_model.ckpt.json";
    save_checkpoint(path, ck);
    CHECK(serialize_checkpoint(load_checkpoint(path)) == text);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint errors") {
    CHECK_THROWS_AS(parse_checkpoint("{not json"), ParseError);
    CHECK_THROWS_AS(parse_checkpoint(R"({"format":"other"})"), SchemaError);
    CHECK_THROWS_AS(parse_checkpoint(R"({"format":"qfsru-checkpoint","version":99})"), SchemaError);

    Checkpoint ck{small_config(), {}};
    ck.params = init_params(ck.config, 1);
    std::string text = serialize_checkpoint(ck);
    const auto pos = text.find("\"hidden1\":10");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"hidden1\":11");
    CHECK_THROWS_AS(parse_checkpoint(text), SchemaError);
}
