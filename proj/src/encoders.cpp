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

#include "qfsru/encoders.hpp"

#include <cmath>
#include <random>
#include <string>

#include "qfsru/errors.hpp"
#include "qfsru/kernels.hpp"
#include "qfsru/log.hpp"
#include "qfsru/rng.hpp"

namespace qfsru {

namespace {

Vector token_vector(std::int64_t token) {
    std::mt19937_64 rng = rng_stream(static_cast<std::uint64_t>(token), "token-embedding");
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(kTextEmbeddingDim)));
    Vector v(kTextEmbeddingDim);
    for (auto& x : v) x = normal(rng);
    return v;
}

}  // namespace

Vector embed_text_stub(std::span<const std::int64_t> tokens) {
    Vector sum(kTextEmbeddingDim, 0.0);
    std::size_t count = 0;
    for (auto tok : tokens) {
        if (tok < 0) throw SchemaError("token ids must be non-negative");
        if (tok == kPadToken) continue;
        const Vector e = token_vector(tok);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += e[i];
        ++count;
    }
    if (count == 0) {
        log::warn("question has only pad tokens; using a zero text embedding");
        return sum;
    }
    for (auto& x : sum) x /= static_cast<double>(count);
    return sum;
}

Vector text_features(const Sample& sample) {
    if (sample.question_features) return *sample.question_features;
    if (sample.question_tokens) return embed_text_stub(*sample.question_tokens);
    throw SchemaError("sample \"" + sample.id + "\" has no question encoding");
}

Vector project_text(std::span<const double> text, const Tensor& w, std::span<const double> b) {
    return kernels::matvec(w, text, b);
}

Vector project_image(std::span<const double> image, const Tensor& w, std::span<const double> b) {
    return kernels::matvec(w, image, b);
}

}  // namespace qfsru
