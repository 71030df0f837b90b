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

#include "qfsru/dataset.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "qfsru/errors.hpp"
#include "qfsru/fileio.hpp"

namespace qfsru {

using nlohmann::json;

namespace {

Vector read_vector(const json& j, const char* field, std::size_t line) {
    if (!j.is_array()) throw ParseError(std::string(field) + " must be an array", line);
    Vector v;
    v.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw ParseError(std::string(field) + " must hold numbers", line);
        const double d = x.get<double>();
        if (!std::isfinite(d)) throw SchemaError(std::string(field) + " holds a non-finite value");
        v.push_back(d);
    }
    return v;
}

std::string read_string(const json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(std::string("missing string field \"") + field + "\"", line);
    }
    return it->get<std::string>();
}

json parse_line(const std::string& text, std::size_t line) {
    try {
        json j = json::parse(text);
        if (!j.is_object()) throw ParseError("expected a JSON object", line);
        return j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r") == std::string::npos;
}

std::string schema_prefix(const std::string& id, std::size_t line) {
    return "sample \"" + id + "\" (line " + std::to_string(line) + "): ";
}

Sample parse_sample(const json& j, const DatasetManifest& m, std::size_t line) {
    Sample s;
    s.id = read_string(j, "id", line);
    s.image_id = read_string(j, "image_id", line);
    const auto where = schema_prefix(s.id, line);

    auto img = j.find("image_features");
    if (img == j.end()) throw ParseError("missing field \"image_features\"", line);
    s.image_features = read_vector(*img, "image_features", line);
    if (s.image_features.size() != m.image_dim()) {
        throw SchemaError(where + "image_features has " +
                          std::to_string(s.image_features.size()) + " values, layout " +
                          to_string(m.layout) + " needs " + std::to_string(m.image_dim()));
    }

    const bool has_tokens = j.contains("question_tokens");
    const bool has_features = j.contains("question_features");
    if (has_tokens == has_features) {
        throw SchemaError(where + "exactly one of question_tokens / question_features required");
    }
    if (has_tokens) {
        const auto& arr = j.at("question_tokens");
        if (!arr.is_array()) throw ParseError("question_tokens must be an array", line);
        std::vector<std::int64_t> tokens;
        for (const auto& t : arr) {
            if (!t.is_number_integer()) throw ParseError("question_tokens must be integers", line);
            const auto id = t.get<std::int64_t>();
            if (id < 0) throw SchemaError(where + "negative token id");
            tokens.push_back(id);
        }
        tokens.resize(kMaxQuestionTokens, kPadToken);
        s.question_tokens = std::move(tokens);
    } else {
        s.question_features = read_vector(j.at("question_features"), "question_features", line);
        if (s.question_features->size() != kTextEmbeddingDim) {
            throw SchemaError(where + "question_features must have " +
                              std::to_string(kTextEmbeddingDim) + " values");
        }
    }

    auto cls = j.find("answer_class");
    if (cls == j.end() || !cls->is_number_integer()) {
        throw ParseError("missing integer field \"answer_class\"", line);
    }
    const auto c = cls->get<std::int64_t>();
    if (c < 0 || static_cast<std::size_t>(c) >= m.class_count) {
        throw SchemaError(where + "answer_class " + std::to_string(c) + " outside [0, " +
                          std::to_string(m.class_count) + ")");
    }
    s.answer_class = static_cast<std::size_t>(c);

    if (auto f = j.find("fold"); f != j.end()) {
        if (!f->is_number_unsigned()) throw ParseError("fold must be a non-negative integer", line);
        s.fold = f->get<std::size_t>();
    }
    return s;
}

}  // namespace

std::string to_string(FeatureLayout layout) {
    return layout == FeatureLayout::Vit ? "vit" : "precomputed";
}

FeatureLayout parse_feature_layout(const std::string& s) {
    if (s == "vit") return FeatureLayout::Vit;
    if (s == "precomputed") return FeatureLayout::Precomputed;
    throw SchemaError("unknown feature_layout \"" + s + "\" (expected vit or precomputed)");
}

void validate_manifest(const DatasetManifest& m) {
    if (m.class_count < 1) throw SchemaError("class count C must be positive");
    if (m.d_model < 1) throw SchemaError("d_model must be positive");
    std::map<std::string, std::size_t> fold_of_image;
    for (const auto& s : m.samples) {
        if (s.answer_class >= m.class_count) {
            throw SchemaError("sample \"" + s.id + "\": answer_class out of range");
        }
        if (s.image_features.size() != m.image_dim()) {
            throw SchemaError("sample \"" + s.id + "\": image feature width mismatch");
        }
        if (s.question_tokens.has_value() == s.question_features.has_value()) {
            throw SchemaError("sample \"" + s.id +
                              "\": exactly one of question_tokens / question_features required");
        }
        if (s.question_features && s.question_features->size() != kTextEmbeddingDim) {
            throw SchemaError("sample \"" + s.id + "\": question_features width mismatch");
        }
        if (s.fold) {
            auto [it, inserted] = fold_of_image.emplace(s.image_id, *s.fold);
            if (!inserted && it->second != *s.fold) {
                throw SchemaError("image \"" + s.image_id + "\" is split across folds");
            }
        }
    }
}

DatasetManifest parse_dataset(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    std::optional<DatasetManifest> m;
    while (std::getline(in, raw)) {
        ++line;
        if (blank(raw)) continue;
        json j = parse_line(raw, line);
        if (!m) {
            auto meta = j.find("meta");
            if (meta == j.end() || !meta->is_object()) {
                throw ParseError("first line must be the {\"meta\": {...}} header", line);
            }
            DatasetManifest header;
            const auto c = meta->value("C", std::int64_t{0});
            const auto d = meta->value("d_model", static_cast<std::int64_t>(kDefaultModelDim));
            if (c < 1) throw SchemaError("meta.C must be a positive integer");
            if (d < 1) throw SchemaError("meta.d_model must be a positive integer");
            header.class_count = static_cast<std::size_t>(c);
            header.d_model = static_cast<std::size_t>(d);
            header.layout = parse_feature_layout(meta->value("feature_layout", "precomputed"));
            m = std::move(header);
            continue;
        }
        m->samples.push_back(parse_sample(j, *m, line));
    }
    if (!m) throw SchemaError("dataset has no meta header; class count C is unknown");
    validate_manifest(*m);
    return *std::move(m);
}

DatasetManifest load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file(path));
}

std::string serialize_dataset(const DatasetManifest& m) {
    std::string out;
    json header = {{"meta",
                    {{"C", m.class_count},
                     {"d_model", m.d_model},
                     {"feature_layout", to_string(m.layout)}}}};
    out += header.dump() + "\n";
    for (const auto& s : m.samples) {
        json j;
        j["id"] = s.id;
        j["image_id"] = s.image_id;
        if (s.question_tokens) {
            j["question_tokens"] = *s.question_tokens;
        } else if (s.question_features) {
            j["question_features"] = *s.question_features;
        }
        j["image_features"] = s.image_features;
        j["answer_class"] = s.answer_class;
        if (s.fold) j["fold"] = *s.fold;
        out += j.dump() + "\n";
    }
    return out;
}

void write_dataset(const std::filesystem::path& path, const DatasetManifest& m) {
    write_file_atomic(path, serialize_dataset(m));
}

std::vector<KnowledgeEntry> parse_knowledge_base(const std::string& text,
                                                 std::optional<std::size_t> d_model) {
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    std::vector<KnowledgeEntry> kb;
    while (std::getline(in, raw)) {
        ++line;
        if (blank(raw)) continue;
        json j = parse_line(raw, line);
        KnowledgeEntry e;
        e.id = read_string(j, "id", line);
        e.text = read_string(j, "text", line);
        auto emb = j.find("embedding");
        if (emb == j.end()) throw ParseError("missing field \"embedding\"", line);
        e.embedding = read_vector(*emb, "embedding", line);
        if (e.embedding.empty()) throw SchemaError("knowledge entry \"" + e.id + "\": empty embedding");
        const std::size_t width = d_model ? *d_model : (kb.empty() ? e.embedding.size()
                                                                    : kb.front().embedding.size());
        if (e.embedding.size() != width) {
            throw SchemaError("knowledge entry \"" + e.id + "\" (line " + std::to_string(line) +
                              "): embedding has " + std::to_string(e.embedding.size()) +
                              " values, expected " + std::to_string(width));
        }
        double sq = 0.0;
        for (double x : e.embedding) sq += x * x;
        if (!(sq > 0.0)) {
            throw SchemaError("knowledge entry \"" + e.id + "\" (line " + std::to_string(line) +
                              "): embedding has zero norm");
        }
        kb.push_back(std::move(e));
    }
    return kb;
}

std::vector<KnowledgeEntry> load_knowledge_base(const std::filesystem::path& path,
                                                std::optional<std::size_t> d_model) {
    return parse_knowledge_base(read_file(path), d_model);
}

std::string serialize_knowledge_base(const std::vector<KnowledgeEntry>& kb) {
    std::string out;
    for (const auto& e : kb) {
        json j = {{"id", e.id}, {"text", e.text}, {"embedding", e.embedding}};
        out += j.dump() + "\n";
    }
    return out;
}

void write_knowledge_base(const std::filesystem::path& path, const std::vector<KnowledgeEntry>& kb) {
    write_file_atomic(path, serialize_knowledge_base(kb));
}

}  // namespace qfsru
