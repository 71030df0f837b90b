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
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qfsru/autodiff.hpp"
#include "qfsru/dataset.hpp"
#include "qfsru/freq_fusion.hpp"
#include "qfsru/tensor.hpp"

namespace qfsru::model {

inline constexpr std::size_t kHidden1 = 1024;
inline constexpr std::size_t kHidden2 = 256;
inline constexpr double kDropout = 0.1;

// freq_only: [t || v] (2 d_model wide); freq_plus_knowledge: [t || v || k_agg].
enum class FusionMode { FreqOnly, FreqPlusKnowledge };
std::string to_string(FusionMode m);
FusionMode parse_fusion_mode(const std::string& s);

struct ModelConfig {
    std::size_t d_model = kDefaultModelDim;
    std::size_t text_dim = kTextEmbeddingDim;
    std::size_t image_dim = kVitFeatureDim;
    std::size_t classes = 2;
    std::size_t filter_banks = fusion::kDefaultFilterBanks;
    std::size_t hidden1 = kHidden1;
    std::size_t hidden2 = kHidden2;
    double dropout = kDropout;
    FusionMode fusion_mode = FusionMode::FreqOnly;

    std::size_t fused_dim() const noexcept {
        return (fusion_mode == FusionMode::FreqOnly ? 2 : 3) * d_model;
    }
};

struct ClassifierParams {
    Tensor w1, b1, ln1_gamma, ln1_beta;
    Tensor w2, b2, ln2_gamma, ln2_beta;
    Tensor w3, b3;
};

struct ModelParams {
    Tensor text_proj_w, text_proj_b;
    Tensor image_proj_w, image_proj_b;
    fusion::FusionParams fusion;
    ClassifierParams head;

    // Fixed order shared by the optimizer, gradient lists and checkpoints.
    std::vector<std::pair<std::string, Tensor*>> named();
    std::vector<std::pair<std::string, const Tensor*>> named() const;
};

// Square projections start at the identity, every other weight matrix is
// Xavier-uniform; biases zero, LayerNorm gains one.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Tape leaves mirroring ModelParams::named() order.
struct ClassifierVars {
    ad::Var w1, b1, ln1_gamma, ln1_beta, w2, b2, ln2_gamma, ln2_beta, w3, b3;
};

struct ModelVars {
    ad::Var text_proj_w, text_proj_b, image_proj_w, image_proj_b;
    fusion::FusionVars fusion;
    ClassifierVars head;
    std::vector<ad::Var> all;  // named() order
};

ModelVars bind(ad::Tape& tape, const ModelParams& params);

// Concatenation in fixed order. k_agg is required in FreqPlusKnowledge mode
// and ignored otherwise.
Vector fuse(std::span<const double> t_enh, std::span<const double> v_enh,
            std::optional<std::span<const double>> k_agg, FusionMode mode);

// Linear -> LayerNorm -> GELU -> Dropout, twice, then Linear. Dropout only
// when train is set.
ad::Var classifier_forward(ad::Tape& tape, ad::Var z, const ClassifierVars& head, double dropout,
                           bool train, std::mt19937_64& rng);

// Logits for one fused vector, without keeping a tape.
Vector classify(std::span<const double> z, const ClassifierParams& head, bool train,
                std::mt19937_64& rng, double dropout = kDropout);

struct Checkpoint {
    ModelConfig config;
    ModelParams params;
};

inline constexpr int kCheckpointVersion = 1;

// JSON: {"format":"qfsru-checkpoint","version":1,"config":{...},
//        "tensors":[{"name","shape","data"}...]}
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qfsru::model
