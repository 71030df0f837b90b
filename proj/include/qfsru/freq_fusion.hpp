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

#include <random>
#include <span>
#include <utility>

#include "qfsru/autodiff.hpp"
#include "qfsru/tensor.hpp"

// Frequency-spectrum stage: magnitude spectra of the projected text and
// image vectors, K learnable filter banks per modality, and cross-modal
// gated co-selection.
//
// Gates act on the full-width spectrum. Each modality's K filter outputs are
// averaged to one scalar, mapped through a [d_model x 1] weight plus a
// d_model bias, and squashed by a sigmoid; the text gate is driven by the
// image filters and vice versa.
namespace qfsru::fusion {

inline constexpr std::size_t kDefaultFilterBanks = 4;

struct FusionParams {
    Tensor filter_text_w;   // [K x d]
    Tensor filter_text_b;   // [K]
    Tensor filter_image_w;  // [K x d]
    Tensor filter_image_b;  // [K]
    Tensor gate_text_w;     // [d x 1]
    Tensor gate_text_b;     // [d]
    Tensor gate_image_w;    // [d x 1]
    Tensor gate_image_b;    // [d]

    static FusionParams zeros(std::size_t d_model, std::size_t banks = kDefaultFilterBanks);
    // Xavier-uniform filters and gate weights, zero biases.
    static FusionParams random(std::size_t d_model, std::size_t banks, std::mt19937_64& rng);

    std::size_t d_model() const noexcept { return gate_text_b.size(); }
    std::size_t banks() const noexcept { return filter_text_b.size(); }
};

struct StageOptions {
    bool frequency = true;     // off: spectra replaced by the spatial vectors
    bool co_selection = true;  // off: enhanced == freq
    bool tie_filters = false;  // image side reuses the text filter bank
};

struct SpectralFeatures {
    Vector t_freq, v_freq;
    Vector t_compressed, v_compressed;
    Vector t_enhanced, v_enhanced;
    Vector g_text, g_image;
};

std::pair<Vector, Vector> spectral_transform(std::span<const double> t, std::span<const double> v);

// f[k] = sum_j W[k, j] m[j] + b[k].
Vector filter_compress(std::span<const double> m_freq, const Tensor& w, std::span<const double> b);

// Returns (t_enhanced, v_enhanced).
std::pair<Vector, Vector> co_select(std::span<const double> t_freq, std::span<const double> v_freq,
                                    std::span<const double> t_comp, std::span<const double> v_comp,
                                    const FusionParams& params);

// Whole stage on one sample, without a tape.
SpectralFeatures run_stage(std::span<const double> t, std::span<const double> v,
                           const FusionParams& params, const StageOptions& options = {});

// Tape leaves for FusionParams.
struct FusionVars {
    ad::Var filter_text_w, filter_text_b, filter_image_w, filter_image_b;
    ad::Var gate_text_w, gate_text_b, gate_image_w, gate_image_b;
};

struct StageVars {
    ad::Var t_freq, v_freq, t_enhanced, v_enhanced;
};

// Batched, differentiable stage over [B x d] inputs.
StageVars stage_forward(ad::Tape& tape, ad::Var t, ad::Var v, const FusionVars& params,
                        const StageOptions& options);

}  // namespace qfsru::fusion
