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

// qfsru command-line driver.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfsru/config.hpp"
#include "qfsru/errors.hpp"
#include "qfsru/fileio.hpp"
#include "qfsru/freq_fusion.hpp"
#include "qfsru/gradcheck.hpp"
#include "qfsru/kernels.hpp"
#include "qfsru/log.hpp"
#include "qfsru/model.hpp"
#include "qfsru/quantum_rag.hpp"
#include "qfsru/synthetic.hpp"
#include "qfsru/trainer.hpp"

namespace fs = std::filesystem;
using namespace qfsru;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

std::string dashed(std::string s) {
    for (auto& ch : s) if (ch == '_') ch = '-';
    return s;
}

// Flag values are kept as strings and applied through the same setters the
// config file uses, after the file, so flags win.
struct FlagValues {
    std::string config_path;
    std::map<std::string, std::string> given;
};

void add_config_flags(CLI::App& cmd, FlagValues& flags) {
    cmd.add_option("--config", flags.config_path, "plain-text key = value config file");
    for (const auto& key : config_keys()) {
        const std::string name = key.name;
        cmd.add_option_function<std::string>(
               "--" + dashed(name), [&flags, name](const std::string& v) { flags.given[name] = v; },
               key.help)
            ->type_name("");
    }
}

RunConfig resolve(const FlagValues& flags) {
    RunConfig cfg;
    if (!flags.config_path.empty()) load_config_file(cfg, flags.config_path);
    for (const auto& key : config_keys()) {
        if (auto it = flags.given.find(key.name); it != flags.given.end()) {
            apply_setting(cfg, key.name, it->second);
        }
    }
    if (cfg.workers == 0) throw ConfigError("workers must be at least 1");
    kernels::set_worker_count(static_cast<int>(cfg.workers));
    return cfg;
}

const std::string& require_path(const std::string& path, const char* key) {
    if (path.empty()) throw ConfigError("--" + dashed(key) + " is required");
    return path;
}

std::optional<qrag::KnowledgeIndex> maybe_kb(const RunConfig& cfg, std::size_t d_model, bool required) {
    if (cfg.kb.empty()) {
        if (required) throw ConfigError("--kb is required when fusion_mode is freq_plus_knowledge");
        return std::nullopt;
    }
    return qrag::KnowledgeIndex(load_knowledge_base(cfg.kb, d_model));
}

bool needs_kb(const train::TrainConfig& c) {
    return c.flags.fusion_mode == model::FusionMode::FreqPlusKnowledge;
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

int cmd_synth(const RunConfig& cfg) {
    const auto data = generate_synthetic(cfg.synth);
    const fs::path out(cfg.out_dir);
    write_dataset(out / "dataset.jsonl", data.manifest);
    write_knowledge_base(out / "kb.jsonl", data.knowledge);
    std::cout << "wrote " << data.manifest.samples.size() << " samples to " << (out / "dataset.jsonl").string()
              << " and " << data.knowledge.size() << " knowledge entries to " << (out / "kb.jsonl").string()
              << "\n";
    return kOk;
}

int cmd_train(const RunConfig& cfg) {
    const auto manifest = load_dataset(require_path(cfg.data, "data"));
    const auto kb = maybe_kb(cfg, manifest.d_model, needs_kb(cfg.train));
    const auto result = train::cross_validate(cfg.train, manifest, kb ? &*kb : nullptr, cfg.fold_limit);

    const fs::path out(cfg.out_dir);
    std::string history = "fold,epoch,lr,ce,intra_text,intra_image,cross,total,val_accuracy\n";
    for (std::size_t f = 0; f < result.folds.size(); ++f) {
        const auto& fr = result.folds[f];
        model::save_checkpoint(out / ("fold-" + std::to_string(f) + ".ckpt.json"), fr.best);
        for (const auto& e : fr.history) {
            char buf[256];
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.9g,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", f, e.epoch, e.lr,
                          e.train_loss.ce, e.train_loss.intra_text, e.train_loss.intra_image,
                          e.train_loss.cross, e.train_loss.total, e.val_accuracy);
            history += buf;
        }
        std::cout << "fold " << f << ": best epoch " << fr.best_epoch << ", accuracy "
                  << fmt6(fr.best_metrics.accuracy) << ", f1 " << fmt6(fr.best_metrics.f1) << "\n";
    }
    const train::AblationRow row{"train", result.report};
    write_file_atomic(out / "metrics.csv", train::metrics_csv(std::span(&row, 1)));
    write_file_atomic(out / "summary.json", train::summary_json(std::span(&row, 1)));
    write_file_atomic(out / "history.csv", history);
    write_file_atomic(out / "run.conf", serialize_config(cfg));
    std::cout << "mean accuracy " << fmt6(result.report.accuracy.mean) << " +- "
              << fmt6(result.report.accuracy.std) << "\n";
    return kOk;
}

int cmd_eval(const RunConfig& cfg) {
    const auto ckpt = model::load_checkpoint(require_path(cfg.checkpoint, "checkpoint"));
    const auto manifest = load_dataset(require_path(cfg.data, "data"));
    train::TrainConfig tc = cfg.train;
    tc.flags.fusion_mode = ckpt.config.fusion_mode;
    const auto kb = maybe_kb(cfg, manifest.d_model, needs_kb(tc));
    if (cfg.fold >= tc.folds) throw ConfigError("--fold must be below --folds");
    const auto data = train::prepare(manifest);
    const auto folds = train::resolve_folds(manifest, tc.folds, tc.seed);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        if (folds[i] == cfg.fold) rows.push_back(i);
    }
    if (rows.empty()) throw SchemaError("fold " + std::to_string(cfg.fold) + " is empty");
    const auto m = train::evaluate(ckpt, data, rows, kb ? &*kb : nullptr, tc);
    nlohmann::ordered_json j{{"fold", cfg.fold},      {"samples", rows.size()}, {"accuracy", m.accuracy},
                             {"f1", m.f1},            {"precision", m.precision}, {"recall", m.recall},
                             {"auc", m.auc}};
    const std::string text = j.dump(2) + "\n";
    write_file_atomic(fs::path(cfg.out_dir) / "eval.json", text);
    std::cout << text;
    return kOk;
}

// Query lines are either {"id": ..., "vector": [...]} or a bare array.
int cmd_retrieve(const RunConfig& cfg) {
    const qrag::KnowledgeIndex kb(load_knowledge_base(require_path(cfg.kb, "kb")));
    const std::string text = read_file(require_path(cfg.queries, "queries"));
    const qrag::RetrievalOptions opts{cfg.train.top_k, cfg.train.retrieval_temperature, cfg.train.flags.similarity};
    std::istringstream in(text);
    std::string line, out;
    std::size_t number = 0, count = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("query is not valid JSON: ") + e.what(), number);
        }
        std::string id = "q" + std::to_string(count);
        const nlohmann::json* vec = &j;
        if (j.is_object()) {
            if (j.contains("id")) id = j.at("id").get<std::string>();
            if (!j.contains("vector")) throw ParseError("query object needs a \"vector\" field", number);
            vec = &j.at("vector");
        }
        if (!vec->is_array()) throw ParseError("query vector must be an array of numbers", number);
        std::vector<double> q;
        for (const auto& x : *vec) {
            if (!x.is_number()) throw ParseError("query vector must be an array of numbers", number);
            q.push_back(x.get<double>());
        }
        if (q.size() != kb.dim()) {
            throw DimensionError("query on line " + std::to_string(number) + " has width " +
                                 std::to_string(q.size()) + ", knowledge base has " + std::to_string(kb.dim()));
        }
        const auto r = qrag::retrieve(q, kb, opts);
        nlohmann::ordered_json o{{"query", id}, {"ids", r.ids}, {"similarities", r.similarities},
                                 {"weights", r.weights}};
        out += o.dump() + "\n";
        ++count;
    }
    write_file_atomic(fs::path(cfg.out_dir) / "retrieval.jsonl", out);
    std::cout << out;
    return kOk;
}

int cmd_gradcheck(const RunConfig& cfg) {
    const auto results = run_gradcheck_suite(cfg.train.seed);
    std::string csv = "op,max_rel_error,tolerance,status\n";
    bool ok = true;
    for (const auto& r : results) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-26s %.3e  (tol %.0e)  %s\n", r.name.c_str(), r.max_rel_error, r.tolerance,
                      r.passed ? "PASS" : "FAIL");
        std::cout << buf;
        std::snprintf(buf, sizeof buf, "%s,%.6e,%.1e,%s\n", r.name.c_str(), r.max_rel_error, r.tolerance,
                      r.passed ? "PASS" : "FAIL");
        csv += buf;
        ok = ok && r.passed;
    }
    write_file_atomic(fs::path(cfg.out_dir) / "gradcheck.csv", csv);
    return ok ? kOk : kNumeric;
}

// Magnitude spectra of the projected features. Projections come from
// --checkpoint when given, from a fresh initialisation under --seed otherwise.
int cmd_spectrum(const RunConfig& cfg) {
    const auto manifest = load_dataset(require_path(cfg.data, "data"));
    const auto data = train::prepare(manifest);
    model::ModelParams params;
    if (!cfg.checkpoint.empty()) {
        auto ckpt = model::load_checkpoint(cfg.checkpoint);
        if (ckpt.config.d_model != data.d_model || ckpt.config.image_dim != data.image.cols()) {
            throw SchemaError("checkpoint feature widths do not match the dataset");
        }
        params = std::move(ckpt.params);
    } else {
        params = model::init_params(train::model_config(cfg.train, data), cfg.train.seed);
    }
    const std::size_t n = cfg.max_samples ? std::min(cfg.max_samples, data.size()) : data.size();
    std::string csv = "sample_id,modality,bin,magnitude\n";
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = kernels::matvec(params.text_proj_w, data.text.row(i), params.text_proj_b.span());
        const auto v = kernels::matvec(params.image_proj_w, data.image.row(i), params.image_proj_b.span());
        const auto [tf, vf] = fusion::spectral_transform(t, v);
        const std::string& id = manifest.samples[i].id;
        for (const auto& [name, spec] : {std::pair{"text", &tf}, std::pair{"image", &vf}}) {
            for (std::size_t k = 0; k < spec->size(); ++k) {
                std::snprintf(buf, sizeof buf, ",%zu,%.9g\n", k, (*spec)[k]);
                csv += id + "," + name + buf;
            }
        }
    }
    write_file_atomic(fs::path(cfg.out_dir) / "spectrum.csv", csv);
    std::cout << "wrote spectra for " << n << " samples to " << (fs::path(cfg.out_dir) / "spectrum.csv").string()
              << "\n";
    return kOk;
}

int cmd_ablate(const RunConfig& cfg) {
    const auto manifest = load_dataset(require_path(cfg.data, "data"));
    const qrag::KnowledgeIndex kb(load_knowledge_base(require_path(cfg.kb, "kb"), manifest.d_model));
    const auto rows = train::run_ablation_suite(cfg.train, manifest, &kb, cfg.fold_limit);
    const fs::path out(cfg.out_dir);
    write_file_atomic(out / "ablation.csv", train::metrics_csv(rows));
    write_file_atomic(out / "ablation_summary.json", train::summary_json(rows));
    for (const auto& r : rows) {
        std::printf("%-30s accuracy %.4f +- %.4f\n", r.variant.c_str(), r.report.accuracy.mean,
                    r.report.accuracy.std);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-domain fusion with fidelity-based knowledge retrieval"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "suppress warnings");

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const Sub subs[] = {
        {"synth", "generate a synthetic dataset and knowledge base", cmd_synth},
        {"train", "grouped k-fold training; writes checkpoints and metrics.csv", cmd_train},
        {"eval", "evaluate a checkpoint on one held-out fold", cmd_eval},
        {"retrieve", "top-K knowledge retrieval for query vectors", cmd_retrieve},
        {"gradcheck", "finite-difference check of every differentiable op", cmd_gradcheck},
        {"spectrum", "export magnitude spectra as CSV", cmd_spectrum},
        {"ablate", "run every ablation variant; writes ablation.csv", cmd_ablate},
    };
    std::vector<FlagValues> flags(std::size(subs));
    std::vector<CLI::App*> commands;
    for (std::size_t i = 0; i < std::size(subs); ++i) {
        auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_config_flags(*cmd, flags[i]);
        commands.push_back(cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    log::set_quiet(quiet);

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!commands[i]->parsed()) continue;
        try {
            return subs[i].run(resolve(flags[i]));
        } catch (const ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kUsage;
        } catch (const NumericError& e) {
            std::cerr << "numeric failure: " << e.what() << "\n";
            return kNumeric;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kData;
        }
    }
    return kUsage;
}
