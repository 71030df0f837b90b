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

#include "qfsru/quantum_rag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qfsru/errors.hpp"
#include "qfsru/linalg.hpp"

namespace qfsru::qrag {

namespace {

constexpr double kZeroNorm = 1e-12;
constexpr double kTraceTol = 1e-9;
constexpr double kPsdTol = 1e-8;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void scan_one(const Vector& q, const KnowledgeIndex& kb, Similarity sim, Vector& out, std::size_t i) {
    const double c = dot(q, kb.unit_states()[i]);
    out[i] = sim == Similarity::Fidelity ? std::min(1.0, c * c) : c;
}

void require_query(std::span<const double> q, const KnowledgeIndex& kb) {
    if (kb.size() == 0) throw RetrievalError("knowledge base is empty");
    if (q.size() != kb.dim()) {
        throw DimensionError("query has " + std::to_string(q.size()) +
                             " values, knowledge embeddings have " + std::to_string(kb.dim()));
    }
}

}  // namespace

QuantumState QuantumState::from_features(std::span<const double> x) {
    const double norm = std::sqrt(dot(x, x));
    if (!(norm > kZeroNorm)) {
        throw DegenerateInputError("cannot form a quantum state from a (near-)zero vector");
    }
    Vector a(x.begin(), x.end());
    for (auto& v : a) v /= norm;
    return QuantumState(std::move(a));
}

DensityMatrix DensityMatrix::pure(const QuantumState& psi) {
    const auto& a = psi.amplitudes();
    const std::size_t d = a.size();
    Tensor rho({d, d});
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) rho.at(i, j) = a[i] * a[j];
    }
    return DensityMatrix(std::move(rho), a);
}

DensityMatrix DensityMatrix::from_matrix(Tensor rho) {
    if (rho.rank() != 2 || rho.rows() != rho.cols()) {
        throw ContractError("density matrix must be square, got " + rho.shape_string());
    }
    const auto eig = linalg::symmetric_eig(rho);  // checks symmetry
    for (double l : eig.values) {
        if (l < -kPsdTol) {
            throw NumericError("density matrix is not positive semidefinite (eigenvalue " +
                               std::to_string(l) + ")");
        }
    }
    DensityMatrix m(std::move(rho), std::nullopt);
    if (std::abs(m.trace() - 1.0) > kTraceTol) {
        throw ContractError("density matrix trace is " + std::to_string(m.trace()) + ", expected 1");
    }
    return m;
}

double DensityMatrix::trace() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < rho_.rows(); ++i) t += rho_.at(i, i);
    return t;
}

double fidelity(const QuantumState& a, const QuantumState& b) {
    if (a.dim() != b.dim()) throw DimensionError("fidelity: state dimensions differ");
    const double c = dot(a.amplitudes(), b.amplitudes());
    return std::clamp(c * c, 0.0, 1.0);
}

double fidelity_general(const DensityMatrix& rho_q, const DensityMatrix& rho_k) {
    if (rho_q.dim() != rho_k.dim()) throw DimensionError("fidelity: dimensions differ");
    const Tensor root_q = linalg::psd_sqrt(rho_q.matrix(), kPsdTol);
    Tensor inner = linalg::matmul(linalg::matmul(root_q, rho_k.matrix()), root_q);
    // Symmetrize away rounding before the eigensolve.
    const std::size_t d = inner.rows();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double avg = 0.5 * (inner.at(i, j) + inner.at(j, i));
            inner.at(i, j) = inner.at(j, i) = avg;
        }
    }
    const auto eig = linalg::symmetric_eig(inner);
    const double floor = linalg::rank_floor(eig.values);
    double tr = 0.0;
    for (double l : eig.values) {
        if (l < -kPsdTol) {
            throw NumericError("fidelity: intermediate matrix has eigenvalue " + std::to_string(l));
        }
        if (l > floor) tr += std::sqrt(l);
    }
    return std::clamp(tr * tr, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho_q, const DensityMatrix& rho_k) {
    if (rho_q.pure_state() && rho_k.pure_state()) {
        if (rho_q.dim() != rho_k.dim()) throw DimensionError("fidelity: dimensions differ");
        const double c = dot(*rho_q.pure_state(), *rho_k.pure_state());
        return std::clamp(c * c, 0.0, 1.0);
    }
    return fidelity_general(rho_q, rho_k);
}

Vector form_query(std::span<const double> t_enhanced, std::span<const double> v_enhanced) {
    if (t_enhanced.size() != v_enhanced.size()) {
        throw DimensionError("form_query: text and image vectors differ in length");
    }
    Vector q(t_enhanced.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = 0.5 * (t_enhanced[i] + v_enhanced[i]);
    return q;
}

std::string to_string(Similarity s) {
    return s == Similarity::Fidelity ? "fidelity" : "cosine";
}

Similarity parse_similarity(const std::string& s) {
    if (s == "fidelity") return Similarity::Fidelity;
    if (s == "cosine") return Similarity::Cosine;
    throw ConfigError("unknown similarity \"" + s + "\" (expected fidelity or cosine)");
}

KnowledgeIndex::KnowledgeIndex(std::vector<KnowledgeEntry> entries) : entries_(std::move(entries)) {
    units_.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (dim_ == 0) dim_ = e.embedding.size();
        if (e.embedding.size() != dim_) {
            throw SchemaError("knowledge entry \"" + e.id + "\" has a different embedding width");
        }
        units_.push_back(QuantumState::from_features(e.embedding).amplitudes());
    }
}

Vector similarity_scan(const QuantumState& q, const KnowledgeIndex& kb, Similarity sim) {
    Vector out(kb.size());
    const auto n = static_cast<std::ptrdiff_t>(kb.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        scan_one(q.amplitudes(), kb, sim, out, static_cast<std::size_t>(i));
    }
    return out;
}

namespace serial {

Vector similarity_scan(const QuantumState& q, const KnowledgeIndex& kb, Similarity sim) {
    Vector out(kb.size());
    for (std::size_t i = 0; i < kb.size(); ++i) scan_one(q.amplitudes(), kb, sim, out, i);
    return out;
}

}  // namespace serial

namespace {

RetrievalResult select_top(const Vector& sims, const KnowledgeIndex& kb, const RetrievalOptions& o) {
    std::vector<std::size_t> order(sims.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(o.top_k),
                      order.end(), [&](std::size_t a, std::size_t b) {
                          if (sims[a] != sims[b]) return sims[a] > sims[b];
                          return a < b;
                      });
    RetrievalResult r;
    r.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(o.top_k));
    for (auto i : r.indices) {
        r.ids.push_back(kb.entries()[i].id);
        r.similarities.push_back(sims[i]);
    }
    const double mx = r.similarities.front() / o.temperature;
    double total = 0.0;
    for (double s : r.similarities) {
        r.weights.push_back(std::exp(s / o.temperature - mx));
        total += r.weights.back();
    }
    for (auto& w : r.weights) w /= total;
    r.k_agg.assign(kb.dim(), 0.0);
    for (std::size_t j = 0; j < r.indices.size(); ++j) {
        const auto& e = kb.entries()[r.indices[j]].embedding;
        for (std::size_t i = 0; i < e.size(); ++i) r.k_agg[i] += r.weights[j] * e[i];
    }
    return r;
}

void check_options(const KnowledgeIndex& kb, const RetrievalOptions& o) {
    if (kb.size() == 0) throw RetrievalError("knowledge base is empty");
    if (o.top_k == 0) throw ConfigError("top_k must be positive");
    if (o.top_k > kb.size()) {
        throw ConfigError("top_k " + std::to_string(o.top_k) + " exceeds knowledge base size " +
                          std::to_string(kb.size()));
    }
    if (!(o.temperature > 0.0)) throw ConfigError("retrieval temperature must be positive");
}

}  // namespace

RetrievalResult retrieve(std::span<const double> q, const KnowledgeIndex& kb,
                         const RetrievalOptions& o) {
    check_options(kb, o);
    require_query(q, kb);
    const auto state = QuantumState::from_features(q);
    return select_top(similarity_scan(state, kb, o.similarity), kb, o);
}

Tensor retrieve_batch(const Tensor& queries, const KnowledgeIndex& kb, const RetrievalOptions& o) {
    check_options(kb, o);
    if (queries.cols() != kb.dim()) {
        throw DimensionError("retrieve_batch: query width " + std::to_string(queries.cols()) +
                             " does not match knowledge width " + std::to_string(kb.dim()));
    }
    const std::size_t rows = queries.rows();
    Tensor out({rows, kb.dim()});
    // Per-row states first so a degenerate query throws outside the parallel region.
    std::vector<QuantumState> states;
    states.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) states.push_back(QuantumState::from_features(queries.row(r)));
    const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        const auto res = select_top(serial::similarity_scan(states[r], kb, o.similarity), kb, o);
        std::copy(res.k_agg.begin(), res.k_agg.end(), out.row(static_cast<std::size_t>(r)).begin());
    }
    return out;
}

}  // namespace qfsru::qrag
