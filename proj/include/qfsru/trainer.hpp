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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qfsru/dataset.hpp"
#include "qfsru/metrics.hpp"
#include "qfsru/model.hpp"
#include "qfsru/objectives.hpp"
#include "qfsru/quantum_rag.hpp"

namespace qfsru::train {

// Switches for each ablation row.
struct AblationFlags {
    bool frequency = true;
    bool retrieval = true;
    bool contrastive = true;
    bool co_selection = true;
    bool tie_filters = false;
    qrag::Similarity similarity = qrag::Similarity::Fidelity;
    model::FusionMode fusion_mode = model::FusionMode::FreqOnly;
};

struct TrainConfig {
    double lr = 5e-5;
    double weight_decay = 1e-5;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 50;
    double lr_decay = 0.98;
    std::size_t decay_every = 5;
    std::size_t patience = 10;
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    bool clip_gradients = true;
    double clip_norm = 5.0;
    double dropout = model::kDropout;
    std::size_t filter_banks = fusion::kDefaultFilterBanks;
    std::size_t hidden1 = model::kHidden1;
    std::size_t hidden2 = model::kHidden2;
    std::size_t top_k = qrag::kDefaultTopK;
    double retrieval_temperature = qrag::kDefaultTemperature;
    double augment_sigma = objectives::kAugmentSigma;
    // Contrastive terms on the magnitude spectra instead of the projections.
    bool contrastive_on_spectra = false;
    AblationFlags flags;

    // Throws ConfigError on non-positive sizes/rates or inconsistent flags.
    void validate() const;
};

// lr * decay^floor(epoch / decay_every), epoch counted from 0.
double learning_rate(const TrainConfig& config, std::size_t epoch);

// Image ids are shuffled by seed and dealt round-robin into k folds; every
// sample inherits its image's fold.
std::vector<std::size_t> make_folds(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed);

// The manifest's own fold column when every sample carries one, make_folds
// otherwise. A partial fold column or a fold >= k is a SchemaError.
std::vector<std::size_t> resolve_folds(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed);

// Row-aligned model inputs extracted once from a manifest.
struct PreparedData {
    Tensor text;   // [N x 300]
    Tensor image;  // [N x image_dim]
    std::vector<std::size_t> labels;
    std::vector<std::string> image_ids;
    std::size_t classes = 0;
    std::size_t d_model = 0;

    std::size_t size() const noexcept { return labels.size(); }
};

PreparedData prepare(const DatasetManifest& manifest);

model::ModelConfig model_config(const TrainConfig& config, const PreparedData& data);

struct ForwardVars {
    ad::Var logits;
    ad::Var t_proj, v_proj;
    ad::Var t_freq, v_freq;
    ad::Var t_enhanced, v_enhanced;
};

// Full pipeline on a batch of rows: projections, frequency stage,
// retrieval (detached), fusion and classifier.
ForwardVars forward(ad::Tape& tape, const model::ModelVars& vars, const PreparedData& data,
                    std::span<const std::size_t> rows, const qrag::KnowledgeIndex* kb,
                    const TrainConfig& config, bool train, std::mt19937_64& dropout_rng);

// Class probabilities [rows x C] in eval mode.
Tensor predict(const model::Checkpoint& ckpt, const PreparedData& data,
               std::span<const std::size_t> rows, const qrag::KnowledgeIndex* kb,
               const TrainConfig& config);

struct EpochLog {
    std::size_t epoch = 0;
    double lr = 0.0;
    objectives::LossBreakdown train_loss;  // mean over batches
    double val_accuracy = 0.0;
};

struct FoldResult {
    model::Checkpoint best;
    metrics::FoldMetrics best_metrics;
    std::size_t best_epoch = 0;
    std::vector<EpochLog> history;
};

// Trains on rows not in `fold`, validates on rows in `fold`, and keeps the
// checkpoint with the best validation accuracy.
FoldResult train_fold(const TrainConfig& config, const PreparedData& data,
                      std::span<const std::size_t> fold_of_row, std::size_t fold,
                      const qrag::KnowledgeIndex* kb);

metrics::FoldMetrics evaluate(const model::Checkpoint& ckpt, const PreparedData& data,
                              std::span<const std::size_t> rows, const qrag::KnowledgeIndex* kb,
                              const TrainConfig& config);

struct CrossValidationResult {
    std::vector<FoldResult> folds;
    metrics::MetricsReport report;
};

// Runs folds [0, fold_limit) (all folds when fold_limit is 0).
CrossValidationResult cross_validate(const TrainConfig& config, const DatasetManifest& manifest,
                                     const qrag::KnowledgeIndex* kb, std::size_t fold_limit = 0);

struct AblationVariant {
    std::string name;
    AblationFlags flags;
};

// The full model followed by one row per removed or swapped component, in
// the order the ablation table lists them.
std::vector<AblationVariant> ablation_variants();

struct AblationRow {
    std::string variant;
    metrics::MetricsReport report;
};

std::vector<AblationRow> run_ablation_suite(const TrainConfig& config, const DatasetManifest& manifest,
                                            const qrag::KnowledgeIndex* kb, std::size_t fold_limit = 0);

// "variant,fold,accuracy,f1,precision,recall,auc" with one line per fold.
std::string metrics_csv(std::span<const AblationRow> rows);
// {"variant": {"accuracy": {"mean","std"}, ...}, ...}
std::string summary_json(std::span<const AblationRow> rows);

}  // namespace qfsru::train
