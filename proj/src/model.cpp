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

#include "qfsru/model.hpp"

#include <cmath>

#include <json.hpp>

#include "qfsru/errors.hpp"
#include "qfsru/fileio.hpp"
#include "qfsru/rng.hpp"

namespace qfsru::model {

using nlohmann::json;

namespace {

Tensor xavier(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / double(rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Tensor t({rows, cols});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
    return t;
}

Tensor projection(std::size_t out, std::size_t in, std::mt19937_64& rng) {
    if (out == in) return Tensor::identity(out);
    return xavier(out, in, rng);
}

}  // namespace

std::string to_string(FusionMode m) {
    return m == FusionMode::FreqOnly ? "freq_only" : "freq_plus_knowledge";
}

FusionMode parse_fusion_mode(const std::string& s) {
    if (s == "freq_only") return FusionMode::FreqOnly;
    if (s == "freq_plus_knowledge") return FusionMode::FreqPlusKnowledge;
    throw ConfigError("unknown fusion mode \"" + s + "\" (expected freq_only or freq_plus_knowledge)");
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() {
    auto& f = fusion;
    auto& h = head;
    return {{"text_proj_w", &text_proj_w},       {"text_proj_b", &text_proj_b},
            {"image_proj_w", &image_proj_w},     {"image_proj_b", &image_proj_b},
            {"filter_text_w", &f.filter_text_w}, {"filter_text_b", &f.filter_text_b},
            {"filter_image_w", &f.filter_image_w}, {"filter_image_b", &f.filter_image_b},
            {"gate_text_w", &f.gate_text_w},     {"gate_text_b", &f.gate_text_b},
            {"gate_image_w", &f.gate_image_w},   {"gate_image_b", &f.gate_image_b},
            {"mlp_w1", &h.w1},                   {"mlp_b1", &h.b1},
            {"ln1_gamma", &h.ln1_gamma},         {"ln1_beta", &h.ln1_beta},
            {"mlp_w2", &h.w2},                   {"mlp_b2", &h.b2},
            {"ln2_gamma", &h.ln2_gamma},         {"ln2_beta", &h.ln2_beta},
            {"mlp_w3", &h.w3},                   {"mlp_b3", &h.b3}};
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named() const {
    auto mutable_view = const_cast<ModelParams*>(this)->named();
    std::vector<std::pair<std::string, const Tensor*>> out;
    out.reserve(mutable_view.size());
    for (auto& [name, t] : mutable_view) out.emplace_back(name, t);
    return out;
}

ModelParams init_params(const ModelConfig& c, std::uint64_t seed) {
    if (c.classes < 1) throw ConfigError("model needs at least one class");
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) {
        throw ConfigError("dropout rate must lie in [0, 1)");
    }
    std::mt19937_64 rng = rng_stream(seed, "init");
    ModelParams p;
    p.text_proj_w = projection(c.d_model, c.text_dim, rng);
    p.text_proj_b = Tensor({c.d_model});
    p.image_proj_w = projection(c.d_model, c.image_dim, rng);
    p.image_proj_b = Tensor({c.d_model});
    p.fusion = fusion::FusionParams::random(c.d_model, c.filter_banks, rng);
    auto& h = p.head;
    h.w1 = xavier(c.hidden1, c.fused_dim(), rng);
    h.b1 = Tensor({c.hidden1});
    h.ln1_gamma = Tensor({c.hidden1}, 1.0);
    h.ln1_beta = Tensor({c.hidden1});
    h.w2 = xavier(c.hidden2, c.hidden1, rng);
    h.b2 = Tensor({c.hidden2});
    h.ln2_gamma = Tensor({c.hidden2}, 1.0);
    h.ln2_beta = Tensor({c.hidden2});
    h.w3 = xavier(c.classes, c.hidden2, rng);
    h.b3 = Tensor({c.classes});
    return p;
}

ModelVars bind(ad::Tape& tape, const ModelParams& params) {
    ModelVars v;
    for (const auto& [name, t] : params.named()) v.all.push_back(tape.leaf(*t));
    const auto& a = v.all;
    v.text_proj_w = a[0];
    v.text_proj_b = a[1];
    v.image_proj_w = a[2];
    v.image_proj_b = a[3];
    v.fusion = {a[4], a[5], a[6], a[7], a[8], a[9], a[10], a[11]};
    v.head = {a[12], a[13], a[14], a[15], a[16], a[17], a[18], a[19], a[20], a[21]};
    return v;
}

Vector fuse(std::span<const double> t_enh, std::span<const double> v_enh,
            std::optional<std::span<const double>> k_agg, FusionMode mode) {
    if (t_enh.size() != v_enh.size()) throw DimensionError("fuse: text and image widths differ");
    Vector z(t_enh.begin(), t_enh.end());
    z.insert(z.end(), v_enh.begin(), v_enh.end());
    if (mode == FusionMode::FreqPlusKnowledge) {
        if (!k_agg) throw ConfigError("fuse: freq_plus_knowledge mode needs the aggregated knowledge vector");
        if (k_agg->size() != t_enh.size()) throw DimensionError("fuse: knowledge width differs");
        z.insert(z.end(), k_agg->begin(), k_agg->end());
    }
    return z;
}

ad::Var classifier_forward(ad::Tape& t, ad::Var z, const ClassifierVars& h, double dropout,
                           bool train, std::mt19937_64& rng) {
    if (t.value(z).cols() != t.value(h.w1).cols()) {
        throw DimensionError("classifier: fused input has " + std::to_string(t.value(z).cols()) +
                             " values, first layer expects " + std::to_string(t.value(h.w1).cols()));
    }
    ad::Var x = ad::linear(t, z, h.w1, h.b1);
    x = ad::layernorm(t, x, h.ln1_gamma, h.ln1_beta);
    x = ad::gelu(t, x);
    x = ad::dropout(t, x, dropout, rng, train);
    x = ad::linear(t, x, h.w2, h.b2);
    x = ad::layernorm(t, x, h.ln2_gamma, h.ln2_beta);
    x = ad::gelu(t, x);
    x = ad::dropout(t, x, dropout, rng, train);
    return ad::linear(t, x, h.w3, h.b3);
}

Vector classify(std::span<const double> z, const ClassifierParams& head, bool train,
                std::mt19937_64& rng, double dropout) {
    ad::Tape t;
    const ad::Var zin = t.constant(Tensor({1, z.size()}, Vector(z.begin(), z.end())));
    const ClassifierVars h{t.constant(head.w1),        t.constant(head.b1),
                           t.constant(head.ln1_gamma), t.constant(head.ln1_beta),
                           t.constant(head.w2),        t.constant(head.b2),
                           t.constant(head.ln2_gamma), t.constant(head.ln2_beta),
                           t.constant(head.w3),        t.constant(head.b3)};
    return t.value(classifier_forward(t, zin, h, dropout, train, rng)).values();
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    const auto& c = ckpt.config;
    json j;
    j["format"] = "qfsru-checkpoint";
    j["version"] = kCheckpointVersion;
    j["config"] = {{"d_model", c.d_model},         {"text_dim", c.text_dim},
                   {"image_dim", c.image_dim},     {"classes", c.classes},
                   {"filter_banks", c.filter_banks}, {"hidden1", c.hidden1},
                   {"hidden2", c.hidden2},         {"dropout", c.dropout},
                   {"fusion_mode", to_string(c.fusion_mode)}};
    j["tensors"] = json::array();
    for (const auto& [name, t] : ckpt.params.named()) {
        j["tensors"].push_back({{"name", name}, {"shape", t->shape()}, {"data", t->values()}});
    }
    return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (j.value("format", "") != "qfsru-checkpoint") throw SchemaError("not a qfsru checkpoint");
    if (j.value("version", 0) != kCheckpointVersion) {
        throw SchemaError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
    }
    Checkpoint ckpt;
    try {
        const auto& cj = j.at("config");
        auto& c = ckpt.config;
        c.d_model = cj.at("d_model").get<std::size_t>();
        c.text_dim = cj.at("text_dim").get<std::size_t>();
        c.image_dim = cj.at("image_dim").get<std::size_t>();
        c.classes = cj.at("classes").get<std::size_t>();
        c.filter_banks = cj.at("filter_banks").get<std::size_t>();
        c.hidden1 = cj.at("hidden1").get<std::size_t>();
        c.hidden2 = cj.at("hidden2").get<std::size_t>();
        c.dropout = cj.at("dropout").get<double>();
        c.fusion_mode = parse_fusion_mode(cj.at("fusion_mode").get<std::string>());

        ckpt.params = init_params(c, 0);
        auto slots = ckpt.params.named();
        const auto& tensors = j.at("tensors");
        if (tensors.size() != slots.size()) {
            throw SchemaError("checkpoint holds " + std::to_string(tensors.size()) +
                              " tensors, expected " + std::to_string(slots.size()));
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const auto& tj = tensors[i];
            if (tj.at("name").get<std::string>() != slots[i].first) {
                throw SchemaError("checkpoint tensor " + std::to_string(i) + " is \"" +
                                  tj.at("name").get<std::string>() + "\", expected \"" +
                                  slots[i].first + "\"");
            }
            Tensor t(tj.at("shape").get<std::vector<std::size_t>>(),
                     tj.at("data").get<std::vector<double>>());
            if (t.shape() != slots[i].second->shape()) {
                throw SchemaError("checkpoint tensor \"" + slots[i].first + "\" has shape " +
                                  t.shape_string() + ", expected " +
                                  slots[i].second->shape_string());
            }
            *slots[i].second = std::move(t);
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed checkpoint: ") + e.what());
    }
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return parse_checkpoint(read_file(path));
}

}  // namespace qfsru::model
