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

#include "qfsru/config.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "qfsru/errors.hpp"
#include "qfsru/fileio.hpp"

namespace qfsru {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("bad value \"" + v + "\" for " + key);
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError("bad boolean \"" + v + "\" for " + key + " (use true/false)");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(const std::string& v) { return v; }

template <class T>
T parse_as(const std::string& key, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
        return parse_bool(key, v);
    } else if constexpr (std::is_same_v<T, std::string>) {
        return v;
    } else {
        return parse_number<T>(key, v);
    }
}

template <class T>
ConfigKey field(std::string name, std::string help, T RunConfig::*member) {
    return {name, std::move(help),
            [member, name](RunConfig& c, const std::string& v) { c.*member = parse_as<T>(name, v); },
            [member](const RunConfig& c) { return fmt(c.*member); }};
}

// Accessor-based variant for nested structs.
template <class T, class Get>
ConfigKey nested(std::string name, std::string help, Get get) {
    return {name, std::move(help),
            [get, name](RunConfig& c, const std::string& v) { get(c) = parse_as<T>(name, v); },
            [get](const RunConfig& c) { return fmt(get(const_cast<RunConfig&>(c))); }};
}

#define TRAIN_KEY(T, member, help) \
    nested<T>(#member, help, [](RunConfig& c) -> T& { return c.train.member; })
#define FLAG_KEY(member, help) \
    nested<bool>(#member, help, [](RunConfig& c) -> bool& { return c.train.flags.member; })
#define SYNTH_KEY(T, name, member, help) \
    nested<T>(name, help, [](RunConfig& c) -> T& { return c.synth.member; })

std::vector<ConfigKey> build_keys() {
    std::vector<ConfigKey> k;
    k.push_back(field<std::string>("data", "dataset JSONL path", &RunConfig::data));
    k.push_back(field<std::string>("kb", "knowledge base JSONL path", &RunConfig::kb));
    k.push_back(field<std::string>("checkpoint", "checkpoint JSON path", &RunConfig::checkpoint));
    k.push_back(field<std::string>("queries", "retrieval query JSONL path", &RunConfig::queries));
    k.push_back(field<std::string>("out_dir", "output directory", &RunConfig::out_dir));
    k.push_back(field<std::size_t>("workers", "OpenMP worker threads", &RunConfig::workers));
    k.push_back(field<std::size_t>("fold", "held-out fold for eval", &RunConfig::fold));
    k.push_back(field<std::size_t>("fold_limit", "run only the first N folds (0 = all)", &RunConfig::fold_limit));
    k.push_back(field<std::size_t>("max_samples", "spectrum: export at most N samples (0 = all)",
                                   &RunConfig::max_samples));
    k.push_back({"seed", "seed for every random stream",
                 [](RunConfig& c, const std::string& v) {
                     c.train.seed = parse_number<std::uint64_t>("seed", v);
                     c.synth.seed = c.train.seed;
                 },
                 [](const RunConfig& c) { return std::to_string(c.train.seed); }});
    k.push_back(TRAIN_KEY(double, lr, "base learning rate"));
    k.push_back(TRAIN_KEY(double, weight_decay, "L2 weight decay"));
    k.push_back(TRAIN_KEY(std::size_t, batch_size, "mini-batch size"));
    k.push_back(TRAIN_KEY(std::size_t, max_epochs, "epoch cap"));
    k.push_back(TRAIN_KEY(double, lr_decay, "step decay factor"));
    k.push_back(TRAIN_KEY(std::size_t, decay_every, "epochs between decays"));
    k.push_back(TRAIN_KEY(std::size_t, patience, "early-stopping patience in epochs"));
    k.push_back(TRAIN_KEY(std::size_t, folds, "cross-validation folds"));
    k.push_back(TRAIN_KEY(bool, clip_gradients, "clip the global gradient norm"));
    k.push_back(TRAIN_KEY(double, clip_norm, "global gradient norm cap"));
    k.push_back(TRAIN_KEY(double, dropout, "classifier dropout rate"));
    k.push_back(TRAIN_KEY(std::size_t, filter_banks, "filter-bank outputs per modality"));
    k.push_back(TRAIN_KEY(std::size_t, hidden1, "first hidden width"));
    k.push_back(TRAIN_KEY(std::size_t, hidden2, "second hidden width"));
    k.push_back(TRAIN_KEY(std::size_t, top_k, "knowledge entries retrieved"));
    k.push_back(TRAIN_KEY(double, retrieval_temperature, "softmax temperature over similarities"));
    k.push_back(TRAIN_KEY(double, augment_sigma, "augmentation noise scale"));
    k.push_back(TRAIN_KEY(bool, contrastive_on_spectra, "contrastive terms on spectra, not projections"));
    k.push_back(FLAG_KEY(frequency, "FFT magnitude stage"));
    k.push_back(FLAG_KEY(retrieval, "knowledge retrieval"));
    k.push_back(FLAG_KEY(contrastive, "contrastive terms in the loss"));
    k.push_back(FLAG_KEY(co_selection, "cross-modal gating"));
    k.push_back(FLAG_KEY(tie_filters, "share one filter bank across modalities"));
    k.push_back({"similarity", "fidelity | cosine",
                 [](RunConfig& c, const std::string& v) { c.train.flags.similarity = qrag::parse_similarity(v); },
                 [](const RunConfig& c) { return qrag::to_string(c.train.flags.similarity); }});
    k.push_back({"fusion_mode", "freq_only | freq_plus_knowledge",
                 [](RunConfig& c, const std::string& v) { c.train.flags.fusion_mode = model::parse_fusion_mode(v); },
                 [](const RunConfig& c) { return model::to_string(c.train.flags.fusion_mode); }});
    k.push_back(SYNTH_KEY(std::size_t, "classes", classes, "synth: number of classes"));
    k.push_back(SYNTH_KEY(std::size_t, "per_class", per_class, "synth: samples per class"));
    k.push_back(SYNTH_KEY(std::size_t, "d_model", d_model, "synth: feature width (power of two)"));
    k.push_back(SYNTH_KEY(double, "noise", noise, "synth: Gaussian noise scale"));
    k.push_back(SYNTH_KEY(std::size_t, "questions_per_image", questions_per_image, "synth: questions per image"));
    k.push_back(SYNTH_KEY(std::size_t, "distractors", distractors, "synth: off-band knowledge entries"));
    k.push_back(SYNTH_KEY(double, "amplitude", amplitude, "synth: clean sinusoid amplitude"));
    k.push_back(SYNTH_KEY(std::size_t, "band_width", band_width, "synth: frequencies per class band"));
    return k;
}

#undef TRAIN_KEY
#undef FLAG_KEY
#undef SYNTH_KEY

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = build_keys();
    return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    for (const auto& k : config_keys()) {
        if (k.name == key) {
            try {
                k.set(config, value);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError(key + ": " + e.what());
            }
            return;
        }
    }
    throw ConfigError("unknown config key \"" + key + "\"");
}

void parse_config_text(RunConfig& config, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", number);
        try {
            apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), number);
        }
    }
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
    parse_config_text(config, read_file(path));
}

std::string serialize_config(const RunConfig& config) {
    std::string out;
    for (const auto& k : config_keys()) out += k.name + " = " + k.get(config) + "\n";
    return out;
}

}  // namespace qfsru
