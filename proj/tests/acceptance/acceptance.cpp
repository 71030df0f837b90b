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

// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "qfsru/gradcheck.hpp"
#include "qfsru/kernels.hpp"
#include "qfsru/log.hpp"
#include "qfsru/objectives.hpp"
#include "qfsru/quantum_rag.hpp"
#include "qfsru/synthetic.hpp"
#include "qfsru/trainer.hpp"

#ifndef QFSRU_CLI_PATH
#define QFSRU_CLI_PATH "qfsru"
#endif

using namespace qfsru;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Vector randn(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    Vector v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

Outcome fidelity_suite() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    double self_err = 0, sym_err = 0, path_err = 0, lo = 1, hi = 0;
    for (int i = 0; i < 100; ++i) {
        const auto a = qrag::density(qrag::normalize_to_state(randn(16, rng)));
        const auto b = qrag::density(qrag::normalize_to_state(randn(16, rng)));
        const double fab = qrag::fidelity(a, b);
        self_err = std::max({self_err, std::abs(qrag::fidelity(a, a) - 1.0),
                             std::abs(qrag::fidelity_general(a, a) - 1.0)});
        sym_err = std::max({sym_err, std::abs(fab - qrag::fidelity(b, a)),
                            std::abs(qrag::fidelity_general(a, b) - qrag::fidelity_general(b, a))});
        path_err = std::max(path_err, std::abs(fab - qrag::fidelity_general(a, b)));
        lo = std::min(lo, fab);
        hi = std::max(hi, fab);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    o.require(self_err <= 1e-9, "self fidelity error " + fmt("%.3g", self_err));
    o.require(sym_err <= 1e-9, "symmetry error " + fmt("%.3g", sym_err));
    o.require(lo >= 0.0 && hi <= 1.0, "fidelity out of [0,1]");
    o.require(path_err <= 1e-7, "pure vs general " + fmt("%.3g", path_err));
    o.require(secs < 5.0, "runtime " + fmt("%.2f s", secs));
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("max path diff ") + fmt("%.2e", path_err) +
                ", " + fmt("%.3f s", secs);
    return o;
}

Outcome dft_suite() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    double oracle_err = 0, parseval = 0, shift = 0, conj = 0;
    for (std::size_t d : {4u, 64u, 256u}) {
        for (int rep = 0; rep < 5; ++rep) {
            const Vector x = randn(d, rng);
            const auto X = kernels::dft(x);
            long double energy_x = 0, energy_X = 0;
            for (std::size_t k = 0; k < d; ++k) {
                std::complex<long double> s = 0;
                for (std::size_t n = 0; n < d; ++n) {
                    const long double ang = -2.0L * std::acos(-1.0L) * (long double)((k * n) % d) / d;
                    s += (long double)x[n] * std::complex<long double>(std::cos(ang), std::sin(ang));
                }
                oracle_err = std::max(oracle_err, double(std::abs(std::complex<long double>(X[k]) - s)));
                energy_X += std::norm(std::complex<long double>(X[k]));
                energy_x += (long double)x[k] * x[k];
            }
            parseval = std::max(parseval, double(std::abs(energy_X / d - energy_x) / energy_x));
            const Vector m = kernels::dft_magnitude(x);
            for (std::size_t s : {1u, 3u}) {
                Vector y(d);
                for (std::size_t n = 0; n < d; ++n) y[(n + s) % d] = x[n];
                const Vector my = kernels::dft_magnitude(y);
                for (std::size_t k = 0; k < d; ++k) shift = std::max(shift, std::abs(my[k] - m[k]));
            }
            for (std::size_t k = 1; k < d; ++k) {
                conj = std::max(conj, std::abs(X[k] - std::conj(X[d - k])));
            }
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    o.require(oracle_err <= 1e-9, "oracle error " + fmt("%.3g", oracle_err));
    o.require(parseval <= 1e-9, "Parseval error " + fmt("%.3g", parseval));
    o.require(shift <= 1e-9, "shift error " + fmt("%.3g", shift));
    o.require(conj <= 1e-9, "conjugate symmetry error " + fmt("%.3g", conj));
    o.require(secs < 5.0, "runtime " + fmt("%.2f s", secs));
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("oracle ") + fmt("%.2e", oracle_err) + ", " +
                fmt("%.3f s", secs);
    return o;
}

Outcome gradient_suite() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto results = run_gradcheck_suite(7);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    double worst = 0;
    std::set<std::string> names;
    for (const auto& r : results) {
        names.insert(r.name);
        worst = std::max(worst, r.max_rel_error);
        o.require(r.max_rel_error <= 1e-4, r.name + " error " + fmt("%.3g", r.max_rel_error));
    }
    for (const char* needed : {"projection", "filter_bank", "gated_co_selection", "dft_magnitude", "layernorm",
                               "gelu", "mlp_classifier", "cross_entropy", "info_nce"}) {
        o.require(names.count(needed) == 1, std::string("missing check ") + needed);
    }
    o.require(secs < 30.0, "runtime " + fmt("%.2f s", secs));
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(results.size()) + " ops, worst " +
                fmt("%.2e", worst) + ", " + fmt("%.3f s", secs);
    return o;
}

Outcome retrieval_oracle() {
    Outcome o;
    std::mt19937_64 rng(404);
    std::vector<KnowledgeEntry> entries;
    for (int i = 0; i < 200; ++i) entries.push_back({"e" + std::to_string(i), "", randn(16, rng)});
    const qrag::KnowledgeIndex kb(entries);
    double wsum_err = 0;
    for (int q = 0; q < 100; ++q) {
        const Vector query = randn(16, rng);
        const auto r = qrag::retrieve(query, kb);
        // Brute force: fidelity from density matrices; ranking by squared cosine of unit vectors.
        const auto rq = qrag::density(qrag::normalize_to_state(query));
        std::vector<double> fid(200), cos2(200);
        long double qn = 0;
        for (double v : query) qn += (long double)v * v;
        for (std::size_t i = 0; i < 200; ++i) {
            fid[i] = qrag::fidelity_general(rq, qrag::density(qrag::normalize_to_state(entries[i].embedding)));
            long double dot = 0, en = 0;
            for (std::size_t k = 0; k < 16; ++k) {
                dot += (long double)query[k] * entries[i].embedding[k];
                en += (long double)entries[i].embedding[k] * entries[i].embedding[k];
            }
            cos2[i] = double(dot * dot / (qn * en));
        }
        auto top3 = [](const std::vector<double>& s) {
            std::vector<std::size_t> idx(s.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
            idx.resize(3);
            return idx;
        };
        o.require(r.indices == top3(fid), "top-3 differs from brute-force fidelity (query " + std::to_string(q) + ")");
        o.require(top3(cos2) == top3(fid), "fidelity ranking differs from squared cosine (query " + std::to_string(q) + ")");
        double wsum = 0;
        for (double w : r.weights) wsum += w;
        wsum_err = std::max(wsum_err, std::abs(wsum - 1.0));
    }
    o.require(wsum_err <= 1e-12, "weight sum error " + fmt("%.3g", wsum_err));
    if (o.pass) o.detail = "100 queries, weight sum error " + fmt("%.1e", wsum_err);
    return o;
}

Outcome loss_identity() {
    Outcome o;
    std::mt19937_64 rng(505);
    double worst = 0;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t B = 2 + rep % 7;
        Tensor logits({B, 4}, randn(B * 4, rng)), t({B, 16}, randn(B * 16, rng)), v({B, 16}, randn(B * 16, rng));
        std::vector<std::size_t> labels(B);
        for (auto& l : labels) l = rng() % 4;
        ad::Tape tape;
        std::mt19937_64 aug(rep);
        const auto lv = objectives::build_objective(tape, tape.constant(logits), labels, tape.constant(t),
                                                    tape.constant(v), true, aug);
        const auto b = objectives::read_breakdown(tape, lv);
        const double expect = b.ce + 0.3 * (b.intra_text + b.intra_image) / 2.0 + 0.7 * b.cross;
        worst = std::max(worst, std::abs(b.total - expect));
    }
    o.require(worst <= 1e-12, "total mismatch " + fmt("%.3g", worst));
    const double single = objectives::info_nce(Tensor({1, 8}, randn(8, rng)), Tensor({1, 8}, randn(8, rng)), 0.05);
    o.require(std::abs(single) <= 1e-12, "B=1 InfoNCE " + fmt("%.3g", single));
    // Every row identical: all similarities equal, so the loss is log B.
    const Vector row = randn(8, rng);
    Vector rows;
    for (int i = 0; i < 6; ++i) rows.insert(rows.end(), row.begin(), row.end());
    const double uniform = objectives::info_nce(Tensor({6, 8}, rows), Tensor({6, 8}, rows), 0.07);
    o.require(std::abs(uniform - std::log(6.0)) <= 1e-12, "uniform case " + fmt("%.15g", uniform));
    if (o.pass) o.detail = "max |total - identity| " + fmt("%.1e", worst);
    return o;
}

struct SynthFixture {
    SyntheticData data;
    std::unique_ptr<qrag::KnowledgeIndex> kb;
    train::PreparedData prepared;
    std::vector<std::size_t> folds;
};

const SynthFixture& fixture() {
    static const SynthFixture f = [] {
        SynthFixture s;
        SyntheticConfig sc;  // C=4, 500/class, d_model=64, sigma 0.3, seed 1
        s.data = generate_synthetic(sc);
        s.kb = std::make_unique<qrag::KnowledgeIndex>(s.data.knowledge);
        s.prepared = train::prepare(s.data.manifest);
        s.folds = train::make_folds(s.data.manifest, 5, 1);
        return s;
    }();
    return f;
}

train::TrainConfig long_run(train::AblationFlags flags) {
    train::TrainConfig c;
    c.max_epochs = 30;
    c.patience = 30;  // so epoch 30 is always reached
    c.flags = flags;
    return c;
}

train::AblationFlags variant(const std::string& name) {
    for (const auto& v : train::ablation_variants()) {
        if (v.name == name) return v.flags;
    }
    std::fprintf(stderr, "unknown variant %s\n", name.c_str());
    std::exit(2);
}

train::FoldResult full_run;

Outcome training_convergence() {
    Outcome o;
    const auto& f = fixture();
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto t0 = Clock::now();
    full_run = train::train_fold(long_run(variant("Q-FSRU (Full)")), f.prepared, f.folds, 0, f.kb.get());
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    omp_set_num_threads(saved);
    const auto& h = full_run.history;
    o.require(h.size() == 30, "ran " + std::to_string(h.size()) + " epochs");
    o.require(full_run.best_metrics.accuracy >= 0.95, "best accuracy " + fmt("%.4f", full_run.best_metrics.accuracy));
    if (!h.empty()) {
        o.require(h.back().train_loss.total < h.front().train_loss.total,
                  "loss epoch 30 " + fmt("%.4f", h.back().train_loss.total) + " >= epoch 1 " +
                      fmt("%.4f", h.front().train_loss.total));
    }
    o.require(secs < 600.0, "runtime " + fmt("%.1f s", secs));
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("accuracy ") +
                fmt("%.4f", full_run.best_metrics.accuracy) + " at epoch " + std::to_string(full_run.best_epoch + 1) +
                ", loss " + fmt("%.4f", h.empty() ? 0.0 : h.front().train_loss.total) + " -> " +
                fmt("%.4f", h.empty() ? 0.0 : h.back().train_loss.total) + ", " + fmt("%.1f s", secs);
    return o;
}

Outcome ablation_direction() {
    Outcome o;
    const auto& f = fixture();
    auto acc = [&](const char* name) {
        return train::train_fold(long_run(variant(name)), f.prepared, f.folds, 0, f.kb.get()).best_metrics.accuracy;
    };
    if (full_run.history.empty()) {
        full_run = train::train_fold(long_run(variant("Q-FSRU (Full)")), f.prepared, f.folds, 0, f.kb.get());
    }
    const double full = full_run.best_metrics.accuracy;
    const double spatial = acc("Spatial-only Fusion");
    const double no_freq = acc("w/o Frequency Processing");
    const double no_rag = acc("w/o Quantum Retrieval");
    const double no_con = acc("w/o Contrastive Learning");
    o.require(full - spatial >= 0.05, "full - spatial = " + fmt("%.4f", full - spatial));
    o.require(no_freq < no_rag && no_freq < no_con, "w/o frequency is not the worst of the three");
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("full ") + fmt("%.4f", full) + ", spatial " +
                fmt("%.4f", spatial) + ", w/o freq " + fmt("%.4f", no_freq) + ", w/o retrieval " +
                fmt("%.4f", no_rag) + ", w/o contrastive " + fmt("%.4f", no_con);
    return o;
}

Outcome protocol_fidelity() {
    Outcome o;
    train::TrainConfig c;
    for (std::size_t e = 0; e < 200; ++e) {
        const double expect = 5e-5 * std::pow(0.98, double(e / 5));
        if (train::learning_rate(c, e) != expect) {
            o.require(false, "lr at epoch " + std::to_string(e));
            break;
        }
    }
    const auto& f = fixture();
    // Exhaustive pair scan for image leakage across folds.
    const auto& s = f.data.manifest.samples;
    std::size_t crossings = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            crossings += s[i].image_id == s[j].image_id && f.folds[i] != f.folds[j];
        }
    }
    o.require(crossings == 0, std::to_string(crossings) + " image pairs cross folds");
    // Early stopping with the default patience of 10.
    train::TrainConfig es;
    es.flags = variant("Q-FSRU (Full)");
    const auto r = train::train_fold(es, f.prepared, f.folds, 0, f.kb.get());
    std::size_t stale = 0;
    double best = -1;
    for (const auto& e : r.history) {
        stale = e.val_accuracy > best ? 0 : stale + 1;
        best = std::max(best, e.val_accuracy);
    }
    if (r.history.size() < es.max_epochs) {
        o.require(stale == 10, "stopped after " + std::to_string(stale) + " stale epochs");
    } else {
        o.require(stale <= 10, "ran past patience");
    }
    o.require(r.history.size() <= es.max_epochs, "ran past max_epochs");
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("stopped after ") + std::to_string(r.history.size()) +
                " epochs (best " + std::to_string(r.best_epoch + 1) + "), " + std::to_string(s.size()) +
                " samples scanned";
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    Outcome o;
    const fs::path work = fs::temp_directory_path() / ("qfsru_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(work);
    const std::string cli = QFSRU_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = "\"" + cli + "\" -q " + args + " > \"" + (work / "log.txt").string() + "\" 2>&1";
        return std::system(cmd.c_str());
    };
    const std::string data = (work / "dataset.jsonl").string(), kb = (work / "kb.jsonl").string();
    o.require(run("synth --classes 4 --per-class 60 --d-model 32 --out-dir \"" + work.string() + "\"") == 0,
              "synth failed");
    const std::string common = "train --data \"" + data + "\" --kb \"" + kb +
                               "\" --max-epochs 3 --hidden1 64 --hidden2 32 --fold-limit 2 --seed 5 "
                               "--fusion-mode freq_plus_knowledge --workers 2 --out-dir ";
    o.require(run(common + "\"" + (work / "a").string() + "\"") == 0, "first train failed");
    o.require(run(common + "\"" + (work / "b").string() + "\"") == 0, "second train failed");
    const std::string a = slurp(work / "a" / "metrics.csv"), b = slurp(work / "b" / "metrics.csv");
    o.require(!a.empty(), "metrics.csv missing");
    o.require(a == b, "metrics.csv differs between runs");
    if (o.pass) o.detail = std::to_string(a.size()) + " identical bytes";
    fs::remove_all(work);
    return o;
}

}  // namespace

// Optional arguments pick criteria by number; none runs all nine.
int main(int argc, char** argv) {
    log::set_quiet(true);
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"fidelity suite", fidelity_suite},
        {"DFT suite", dft_suite},
        {"gradient suite", gradient_suite},
        {"retrieval oracle", retrieval_oracle},
        {"loss identity", loss_identity},
        {"training convergence", training_convergence},
        {"ablation direction", ablation_direction},
        {"protocol fidelity", protocol_fidelity},
        {"determinism", determinism},
    };
    int failed = 0, n = 0;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    for (const auto& [name, run] : criteria) {
        ++n;
        if (!only.empty() && !only.count(n)) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
