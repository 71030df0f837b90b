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

#include <cstdint>
#include <span>

#include "qfsru/dataset.hpp"
#include "qfsru/tensor.hpp"

namespace qfsru {

// Stand-in for pretrained word embeddings: every token id owns a fixed
// pseudo-random 300-d vector (seeded by a hash of the id); the question is
// the mean over non-pad tokens. An all-pad question yields zeros and a
// warning.
Vector embed_text_stub(std::span<const std::int64_t> tokens);

// 300-d text vector for a sample, from stored features or the stub.
Vector text_features(const Sample& sample);

// Affine maps into model space: W_t [d_model x 300], W_v [d_model x image_dim].
Vector project_text(std::span<const double> text, const Tensor& w, std::span<const double> b);
Vector project_image(std::span<const double> image, const Tensor& w, std::span<const double> b);

}  // namespace qfsru
