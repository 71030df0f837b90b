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
#include <string>
#include <vector>

#include "qfsru/tensor.hpp"

namespace qfsru {

inline constexpr std::size_t kDefaultModelDim = 256;
inline constexpr std::size_t kTextEmbeddingDim = 300;
inline constexpr std::size_t kVitFeatureDim = 768;
inline constexpr std::size_t kMaxQuestionTokens = 50;
inline constexpr std::int64_t kPadToken = 0;

enum class FeatureLayout { Vit, Precomputed };

std::string to_string(FeatureLayout layout);
FeatureLayout parse_feature_layout(const std::string& s);

struct Sample {
    std::string id;
    std::string image_id;
    Vector image_features;
    // Exactly one of the two question encodings is set.
    std::optional<std::vector<std::int64_t>> question_tokens;
    std::optional<Vector> question_features;
    std::size_t answer_class = 0;
    // Fold assigned in the file, if any.
    std::optional<std::size_t> fold;
};

struct DatasetManifest {
    std::vector<Sample> samples;
    std::size_t class_count = 0;
    std::size_t d_model = kDefaultModelDim;
    FeatureLayout layout = FeatureLayout::Precomputed;

    std::size_t image_dim() const noexcept {
        return layout == FeatureLayout::Vit ? kVitFeatureDim : d_model;
    }
};

struct KnowledgeEntry {
    std::string id;
    std::string text;
    Vector embedding;
};

// JSONL: header {"meta":{"C","d_model","feature_layout"}} followed by one
// sample per line. Token lists are truncated or padded to 50 with id 0.
DatasetManifest load_dataset(const std::filesystem::path& path);
DatasetManifest parse_dataset(const std::string& text);
std::string serialize_dataset(const DatasetManifest& manifest);
void write_dataset(const std::filesystem::path& path, const DatasetManifest& manifest);

// Checks every invariant load_dataset enforces; throws SchemaError.
void validate_manifest(const DatasetManifest& manifest);

std::vector<KnowledgeEntry> load_knowledge_base(const std::filesystem::path& path,
                                                std::optional<std::size_t> d_model = {});
std::vector<KnowledgeEntry> parse_knowledge_base(const std::string& text,
                                                 std::optional<std::size_t> d_model = {});
std::string serialize_knowledge_base(const std::vector<KnowledgeEntry>& kb);
void write_knowledge_base(const std::filesystem::path& path, const std::vector<KnowledgeEntry>& kb);

}  // namespace qfsru
