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
#include <vector>

#include "qfsru/dataset.hpp"

namespace qfsru {

struct SyntheticConfig {
    std::size_t classes = 4;
    std::size_t per_class = 500;
    std::size_t d_model = 64;
    double noise = 0.3;
    std::uint64_t seed = 1;
    // Samples sharing one image (and its features).
    std::size_t questions_per_image = 2;
    // Extra knowledge entries at non-class frequencies.
    std::size_t distractors = 8;
    // Peak of each clean sinusoid before noise.
    double amplitude = 0.5;
    // Adjacent frequencies per class band; each sample draws one. Narrowed
    // (with a warning) when the bands would overlap.
    std::size_t band_width = 4;
};

struct SyntheticData {
    DatasetManifest manifest;
    std::vector<KnowledgeEntry> knowledge;
};

// Class c is a cosine at a cycle count drawn from its band
// [class_frequency(c), class_frequency(c) + band_width) with a random phase,
// plus Gaussian noise, in both modalities: image features span d_model
// samples, question features span 300. Phase and frequency vary per sample,
// so the class lives in the magnitude spectrum, not in any fixed spatial
// pattern. The knowledge base holds the mean clean magnitude spectrum of each
// band ("proto-c") followed by off-band distractor spectra.
SyntheticData generate_synthetic(const SyntheticConfig& config);

// Lowest cycle count of class c's band.
std::size_t class_frequency(std::size_t c, std::size_t classes, std::size_t d_model);

}  // namespace qfsru
