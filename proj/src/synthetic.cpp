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

#include "qfsru/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qfsru/errors.hpp"
#include "qfsru/kernels.hpp"
#include "qfsru/log.hpp"
#include "qfsru/rng.hpp"

namespace qfsru {

namespace {

Vector cosine_wave(std::size_t length, std::size_t cycles, double phase, double amplitude = 1.0) {
    Vector v(length);
    for (std::size_t n = 0; n < length; ++n) {
        v[n] = amplitude * std::cos(2.0 * std::numbers::pi * double(cycles) * double(n) / double(length) + phase);
    }
    return v;
}

void add_noise(Vector& v, double sigma, std::mt19937_64& rng) {
    if (sigma == 0.0) return;
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& x : v) x += normal(rng);
}

}  // namespace

std::size_t class_frequency(std::size_t c, std::size_t classes, std::size_t d_model) {
    return 1 + c * (d_model / 2) / classes;
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
    if (!kernels::is_power_of_two(cfg.d_model)) {
        throw ConfigError("synthetic d_model must be a power of two, got " +
                          std::to_string(cfg.d_model));
    }
    if (cfg.classes > cfg.d_model / 2) {
        throw ConfigError("too many classes for d_model " + std::to_string(cfg.d_model) +
                          ": at most d_model/2 distinct frequency bands exist");
    }
    if (cfg.band_width == 0) throw ConfigError("band_width must be positive");
    if (!(cfg.amplitude > 0.0)) throw ConfigError("amplitude must be positive");
    if (cfg.per_class == 0) throw ConfigError("per_class must be positive");
    if (cfg.questions_per_image == 0) throw ConfigError("questions_per_image must be positive");
    if (!(cfg.noise >= 0.0)) throw ConfigError("noise must be non-negative");

    SyntheticData out;
    auto& m = out.manifest;
    m.class_count = cfg.classes;
    m.d_model = cfg.d_model;
    m.layout = FeatureLayout::Precomputed;

    const std::size_t spacing = (cfg.d_model / 2) / cfg.classes;
    std::size_t band = cfg.band_width;
    if (band > spacing) {
        log::warn("band_width " + std::to_string(band) + " overlaps neighbouring classes; using " +
                  std::to_string(spacing));
        band = spacing;
    }

    std::mt19937_64 rng = rng_stream(cfg.seed, "synthetic");
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    for (std::size_t c = 0; c < cfg.classes; ++c) {
        const std::size_t f = class_frequency(c, cfg.classes, cfg.d_model);
        Vector image;
        for (std::size_t i = 0; i < cfg.per_class; ++i) {
            const std::size_t image_index = i / cfg.questions_per_image;
            if (i % cfg.questions_per_image == 0) {
                image = cosine_wave(cfg.d_model, f + rng() % band, phase(rng), cfg.amplitude);
                add_noise(image, cfg.noise, rng);
            }
            Vector text = cosine_wave(kTextEmbeddingDim, f + rng() % band, phase(rng), cfg.amplitude);
            add_noise(text, cfg.noise, rng);

            Sample s;
            s.id = "c" + std::to_string(c) + "-q" + std::to_string(i);
            s.image_id = "c" + std::to_string(c) + "-img" + std::to_string(image_index);
            s.image_features = image;
            s.question_features = std::move(text);
            s.answer_class = c;
            m.samples.push_back(std::move(s));
        }
    }

    for (std::size_t c = 0; c < cfg.classes; ++c) {
        const std::size_t f = class_frequency(c, cfg.classes, cfg.d_model);
        Vector proto(cfg.d_model, 0.0);
        for (std::size_t b = 0; b < band; ++b) {
            const Vector mag = kernels::dft_magnitude(cosine_wave(cfg.d_model, f + b, 0.0));
            for (std::size_t k = 0; k < proto.size(); ++k) proto[k] += mag[k] / double(band);
        }
        out.knowledge.push_back({"proto-" + std::to_string(c),
                                 "mean magnitude spectrum of class " + std::to_string(c) + " (" +
                                     std::to_string(f) + " to " + std::to_string(f + band - 1) + " cycles)",
                                 std::move(proto)});
    }

    std::vector<std::size_t> free_bands;
    for (std::size_t f = 1; f <= cfg.d_model / 2; ++f) {
        bool used = false;
        for (std::size_t c = 0; c < cfg.classes; ++c) {
            const std::size_t lo = class_frequency(c, cfg.classes, cfg.d_model);
            used = used || (f >= lo && f < lo + band);
        }
        if (!used) free_bands.push_back(f);
    }
    for (std::size_t j = 0; j < cfg.distractors && !free_bands.empty(); ++j) {
        const std::size_t f = free_bands[rng() % free_bands.size()];
        Vector wave = cosine_wave(cfg.d_model, f, phase(rng), cfg.amplitude);
        add_noise(wave, std::max(cfg.noise, 0.05), rng);
        out.knowledge.push_back({"distractor-" + std::to_string(j),
                                 "off-band spectrum (" + std::to_string(f) + " cycles)",
                                 kernels::dft_magnitude(wave)});
    }
    return out;
}

}  // namespace qfsru
