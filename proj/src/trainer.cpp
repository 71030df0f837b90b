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

#include "qfsru/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include <json.hpp>

#include "qfsru/encoders.hpp"
#include "qfsru/errors.hpp"
#include "qfsru/optim.hpp"
#include "qfsru/rng.hpp"

namespace qfsru::train {

namespace {

constexpr std::size_t kEvalBatch = 256;

Tensor gather_rows(const Tensor& src, std::span<const std::size_t> rows) {
    const std::size_t n = src.cols();
    Tensor out({rows.size(), n});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(src.data() + rows[i] * n, n, out.data() + i * n);
    }
    return out;
}

std::string fold_tag(const char* stream, std::size_t fold) {
    return std::string(stream) + "-fold" + std::to_string(fold);
}

}  // namespace

void TrainConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(lr, "lr");
    positive(batch_size, "batch_size");
    positive(max_epochs, "max_epochs");
    positive(lr_decay, "lr_decay");
    positive(decay_every, "decay_every");
    positive(folds, "folds");
    positive(filter_banks, "filter_banks");
    positive(hidden1, "hidden1");
    positive(hidden2, "hidden2");
    positive(top_k, "top_k");
    positive(retrieval_temperature, "retrieval_temperature");
    if (clip_gradients) positive(clip_norm, "clip_norm");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    if (augment_sigma < 0.0) throw ConfigError("augment_sigma must be non-negative");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (flags.fusion_mode == model::FusionMode::FreqPlusKnowledge && !flags.retrieval) {
        throw ConfigError("fusion_mode freq_plus_knowledge requires retrieval to be enabled");
    }
}

double learning_rate(const TrainConfig& c, std::size_t epoch) {
    return c.lr * std::pow(c.lr_decay, static_cast<double>(epoch / c.decay_every));
}

std::vector<std::size_t> make_folds(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("need at least 2 folds");
    std::vector<std::string> images;
    std::map<std::string, std::size_t> index;
    for (const auto& s : manifest.samples) {
        if (index.emplace(s.image_id, images.size()).second) images.push_back(s.image_id);
    }
    if (images.size() < k) {
        throw ConfigError("only " + std::to_string(images.size()) + " distinct image ids for " +
                          std::to_string(k) + " folds");
    }
    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), 0);
    auto rng = rng_stream(seed, "folds");
    // Fisher-Yates with an explicit draw so the permutation is library independent.
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng() % i]);
    }
    std::vector<std::size_t> fold_of_image(images.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) fold_of_image[order[pos]] = pos % k;
    std::vector<std::size_t> fold_of_sample;
    fold_of_sample.reserve(manifest.samples.size());
    for (const auto& s : manifest.samples) fold_of_sample.push_back(fold_of_image[index.at(s.image_id)]);
    return fold_of_sample;
}

std::vector<std::size_t> resolve_folds(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed) {
    const auto given = std::count_if(manifest.samples.begin(), manifest.samples.end(),
                                     [](const Sample& s) { return s.fold.has_value(); });
    if (given == 0) return make_folds(manifest, k, seed);
    if (static_cast<std::size_t>(given) != manifest.samples.size()) {
        throw SchemaError("only " + std::to_string(given) + " of " + std::to_string(manifest.samples.size()) +
                          " samples carry a fold");
    }
    std::vector<std::size_t> folds;
    for (const auto& s : manifest.samples) {
        if (*s.fold >= k) {
            throw SchemaError("sample \"" + s.id + "\" is in fold " + std::to_string(*s.fold) + " but only " +
                              std::to_string(k) + " folds are configured");
        }
        folds.push_back(*s.fold);
    }
    return folds;
}

PreparedData prepare(const DatasetManifest& manifest) {
    validate_manifest(manifest);
    PreparedData d;
    const std::size_t n = manifest.samples.size();
    if (n == 0) throw SchemaError("dataset has no samples");
    d.classes = manifest.class_count;
    d.d_model = manifest.d_model;
    d.text = Tensor({n, kTextEmbeddingDim});
    d.image = Tensor({n, manifest.image_dim()});
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = manifest.samples[i];
        const Vector t = text_features(s);
        std::copy(t.begin(), t.end(), d.text.row(i).begin());
        std::copy(s.image_features.begin(), s.image_features.end(), d.image.row(i).begin());
        d.labels.push_back(s.answer_class);
        d.image_ids.push_back(s.image_id);
    }
    return d;
}

model::ModelConfig model_config(const TrainConfig& c, const PreparedData& data) {
    model::ModelConfig m;
    m.d_model = data.d_model;
    m.text_dim = data.text.cols();
    m.image_dim = data.image.cols();
    m.classes = data.classes;
    m.filter_banks = c.filter_banks;
    m.hidden1 = c.hidden1;
    m.hidden2 = c.hidden2;
    m.dropout = c.dropout;
    m.fusion_mode = c.flags.fusion_mode;
    return m;
}

ForwardVars forward(ad::Tape& t, const model::ModelVars& vars, const PreparedData& data,
                    std::span<const std::size_t> rows, const qrag::KnowledgeIndex* kb,
                    const TrainConfig& c, bool train, std::mt19937_64& dropout_rng) {
    ForwardVars out;
    const ad::Var text = t.constant(gather_rows(data.text, rows));
    const ad::Var image = t.constant(gather_rows(data.image, rows));
    out.t_proj = ad::linear(t, text, vars.text_proj_w, vars.text_proj_b);
    out.v_proj = ad::linear(t, image, vars.image_proj_w, vars.image_proj_b);

    const fusion::StageOptions stage{c.flags.frequency, c.flags.co_selection, c.flags.tie_filters};
    const auto sv = fusion::stage_forward(t, out.t_proj, out.v_proj, vars.fusion, stage);
    out.t_freq = sv.t_freq;
    out.v_freq = sv.v_freq;
    out.t_enhanced = sv.t_enhanced;
    out.v_enhanced = sv.v_enhanced;

    std::vector<ad::Var> parts{sv.t_enhanced, sv.v_enhanced};
    if (c.flags.fusion_mode == model::FusionMode::FreqPlusKnowledge) {
        if (!c.flags.retrieval) {
            throw ConfigError("fusion_mode freq_plus_knowledge requires retrieval to be enabled");
        }
        if (kb == nullptr) throw RetrievalError("retrieval is enabled but no knowledge base was given");
        const Tensor& te = t.value(sv.t_enhanced);
        const Tensor& ve = t.value(sv.v_enhanced);
        Tensor q({te.rows(), te.cols()});
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = 0.5 * (te[i] + ve[i]);
        const qrag::RetrievalOptions opts{c.top_k, c.retrieval_temperature, c.flags.similarity};
        parts.push_back(t.constant(qrag::retrieve_batch(q, *kb, opts)));
    }
    const ad::Var z = ad::concat_cols(t, parts);
    out.logits = model::classifier_forward(t, z, vars.head, c.dropout, train, dropout_rng);
    return out;
}

Tensor predict(const model::Checkpoint& ckpt, const PreparedData& data,
               std::span<const std::size_t> rows, const qrag::KnowledgeIndex* kb,
               const TrainConfig& config) {
    if (ckpt.config.classes != data.classes) {
        throw SchemaError("checkpoint predicts " + std::to_string(ckpt.config.classes) +
                          " classes, dataset has " + std::to_string(data.classes));
    }
    if (ckpt.config.d_model != data.d_model || ckpt.config.image_dim != data.image.cols()) {
        throw SchemaError("checkpoint feature widths do not match the dataset");
    }
    TrainConfig c = config;
    c.flags.fusion_mode = ckpt.config.fusion_mode;
    std::mt19937_64 unused(0);
    Tensor probs({rows.size(), data.classes});
    for (std::size_t start = 0; start < rows.size(); start += kEvalBatch) {
        const auto chunk = rows.subspan(start, std::min(kEvalBatch, rows.size() - start));
        ad::Tape t;
        const auto vars = model::bind(t, ckpt.params);
        const auto fv = forward(t, vars, data, chunk, kb, c, false, unused);
        const ad::Var p = ad::softmax(t, fv.logits);
        const Tensor& pv = t.value(p);
        std::copy(pv.values().begin(), pv.values().end(), probs.data() + start * data.classes);
    }
    return probs;
}

metrics::FoldMetrics evaluate(const model::Checkpoint& ckpt, const PreparedData& data,
                              std::span<const std::size_t> rows, const qrag::KnowledgeIndex* kb,
                              const TrainConfig& config) {
    const Tensor probs = predict(ckpt, data, rows, kb, config);
    std::vector<std::size_t> labels;
    labels.reserve(rows.size());
    for (auto r : rows) labels.push_back(data.labels[r]);
    return metrics::compute_metrics(probs, labels);
}

FoldResult train_fold(const TrainConfig& c, const PreparedData& data,
                      std::span<const std::size_t> fold_of_row, std::size_t fold,
                      const qrag::KnowledgeIndex* kb) {
    c.validate();
    if (fold_of_row.size() != data.size()) {
        throw DimensionError("fold assignment length differs from the dataset");
    }
    std::vector<std::size_t> train_rows, val_rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
        (fold_of_row[i] == fold ? val_rows : train_rows).push_back(i);
    }
    if (train_rows.empty() || val_rows.empty()) {
        throw ConfigError("fold " + std::to_string(fold) + " leaves an empty train or validation split");
    }

    model::Checkpoint current{model_config(c, data), {}};
    current.params = model::init_params(current.config, c.seed);
    std::vector<Tensor*> slots;
    for (auto& [name, p] : current.params.named()) slots.push_back(p);
    optim::Adam adam(slots, c.weight_decay);

    auto shuffle_rng = rng_stream(c.seed, fold_tag("shuffle", fold));
    auto dropout_rng = rng_stream(c.seed, fold_tag("dropout", fold));
    auto augment_rng = rng_stream(c.seed, fold_tag("augment", fold));

    FoldResult result;
    double best_accuracy = -1.0;
    std::size_t stale_epochs = 0;
    for (std::size_t epoch = 0; epoch < c.max_epochs; ++epoch) {
        const double lr = learning_rate(c, epoch);
        for (std::size_t i = train_rows.size(); i > 1; --i) {
            std::swap(train_rows[i - 1], train_rows[shuffle_rng() % i]);
        }
        objectives::LossBreakdown sum;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_rows.size(); start += c.batch_size) {
            const std::span<const std::size_t> batch(
                train_rows.data() + start, std::min(c.batch_size, train_rows.size() - start));
            std::vector<std::size_t> labels;
            for (auto r : batch) labels.push_back(data.labels[r]);
            ad::Tape tape;
            std::vector<Tensor> grads;
            objectives::LossBreakdown b;
            try {
                const auto vars = model::bind(tape, current.params);
                const auto fv = forward(tape, vars, data, batch, kb, c, true, dropout_rng);
                const ad::Var ct = c.contrastive_on_spectra ? fv.t_freq : fv.t_proj;
                const ad::Var cv = c.contrastive_on_spectra ? fv.v_freq : fv.v_proj;
                const auto loss = objectives::build_objective(tape, fv.logits, labels, ct, cv,
                                                              c.flags.contrastive, augment_rng,
                                                              c.augment_sigma);
                b = objectives::read_breakdown(tape, loss);
                tape.backward(loss.total);
                grads.reserve(vars.all.size());
                for (auto v : vars.all) grads.push_back(tape.grad(v));
                for (const auto& g : grads) g.require_finite("gradient");
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batches) + ": " + e.what());
            }
            if (c.clip_gradients) optim::clip_global_norm(grads, c.clip_norm);
            adam.step(grads, lr);
            sum.ce += b.ce;
            sum.intra_text += b.intra_text;
            sum.intra_image += b.intra_image;
            sum.cross += b.cross;
            sum.total += b.total;
            ++batches;
        }
        const double nb = static_cast<double>(batches);
        EpochLog log{epoch, lr,
                     {sum.ce / nb, sum.intra_text / nb, sum.intra_image / nb, sum.cross / nb, sum.total / nb},
                     0.0};
        const auto val = evaluate(current, data, val_rows, kb, c);
        log.val_accuracy = val.accuracy;
        result.history.push_back(log);

        if (val.accuracy > best_accuracy) {
            best_accuracy = val.accuracy;
            result.best = current;
            result.best_metrics = val;
            result.best_epoch = epoch;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
        }
        if (stale_epochs > 0 && stale_epochs >= c.patience) break;
    }
    return result;
}

CrossValidationResult cross_validate(const TrainConfig& c, const DatasetManifest& manifest,
                                     const qrag::KnowledgeIndex* kb, std::size_t fold_limit) {
    c.validate();
    const auto data = prepare(manifest);
    const auto folds = resolve_folds(manifest, c.folds, c.seed);
    const std::size_t runs = fold_limit == 0 ? c.folds : std::min(fold_limit, c.folds);
    CrossValidationResult out;
    std::vector<metrics::FoldMetrics> per_fold;
    for (std::size_t f = 0; f < runs; ++f) {
        out.folds.push_back(train_fold(c, data, folds, f, kb));
        per_fold.push_back(out.folds.back().best_metrics);
    }
    out.report = metrics::summarize(std::move(per_fold));
    return out;
}

std::vector<AblationVariant> ablation_variants() {
    AblationFlags full;
    full.fusion_mode = model::FusionMode::FreqPlusKnowledge;
    std::vector<AblationVariant> v;
    v.push_back({"Q-FSRU (Full)", full});
    auto with = [&](const char* name, auto edit) {
        AblationFlags f = full;
        edit(f);
        v.push_back({name, f});
    };
    with("w/o Frequency Processing", [](AblationFlags& f) { f.frequency = false; });
    with("w/o Quantum Retrieval", [](AblationFlags& f) {
        f.retrieval = false;
        f.fusion_mode = model::FusionMode::FreqOnly;
    });
    with("w/o Contrastive Learning", [](AblationFlags& f) { f.contrastive = false; });
    with("Spatial-only Fusion", [](AblationFlags& f) {
        f.frequency = false;
        f.co_selection = false;
    });
    with("Cosine Similarity", [](AblationFlags& f) { f.similarity = qrag::Similarity::Cosine; });
    with("w/o Cross-Modal Co-selection", [](AblationFlags& f) { f.co_selection = false; });
    return v;
}

std::vector<AblationRow> run_ablation_suite(const TrainConfig& config, const DatasetManifest& manifest,
                                            const qrag::KnowledgeIndex* kb, std::size_t fold_limit) {
    std::vector<AblationRow> rows;
    for (const auto& variant : ablation_variants()) {
        TrainConfig c = config;
        c.flags = variant.flags;
        c.flags.tie_filters = config.flags.tie_filters;
        rows.push_back({variant.name, cross_validate(c, manifest, kb, fold_limit).report});
    }
    return rows;
}

std::string metrics_csv(std::span<const AblationRow> rows) {
    std::string out = "variant,fold,accuracy,f1,precision,recall,auc\n";
    char buf[256];
    for (const auto& row : rows) {
        for (std::size_t f = 0; f < row.report.folds.size(); ++f) {
            const auto& m = row.report.folds[f];
            std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n", f, m.accuracy, m.f1,
                          m.precision, m.recall, m.auc);
            out += row.variant + buf;
        }
    }
    return out;
}

std::string summary_json(std::span<const AblationRow> rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& row : rows) {
        const auto& r = row.report;
        auto ms = [](const metrics::MeanStd& s) { return nlohmann::ordered_json{{"mean", s.mean}, {"std", s.std}}; };
        j[row.variant] = {{"folds", r.folds.size()},
                          {"accuracy", ms(r.accuracy)},
                          {"f1", ms(r.f1)},
                          {"precision", ms(r.precision)},
                          {"recall", ms(r.recall)},
                          {"auc", ms(r.auc)}};
    }
    return j.dump(2) + "\n";
}

}  // namespace qfsru::train
