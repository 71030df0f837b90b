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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfsru/dataset.hpp"
#include "qfsru/tensor.hpp"

namespace qfsru::qrag {

inline constexpr std::size_t kDefaultTopK = 3;
inline constexpr double kDefaultTemperature = 0.1;

// Unit-norm real amplitude vector.
class QuantumState {
 public:
    // x / ||x||. Throws DegenerateInputError when ||x|| <= 1e-12.
    static QuantumState from_features(std::span<const double> x);

    const Vector& amplitudes() const noexcept { return amplitudes_; }
    std::size_t dim() const noexcept { return amplitudes_.size(); }

 private:
    explicit QuantumState(Vector a) : amplitudes_(std::move(a)) {}
    Vector amplitudes_;
};

inline QuantumState normalize_to_state(std::span<const double> x) {
    return QuantumState::from_features(x);
}

// Symmetric PSD matrix with unit trace.
class DensityMatrix {
 public:
    // |psi><psi|; remembers psi so pure-pair fidelity can skip the eigensolve.
    static DensityMatrix pure(const QuantumState& psi);
    // Validates symmetry (1e-10), trace (1e-9) and eigenvalues >= -1e-8.
    static DensityMatrix from_matrix(Tensor rho);

    const Tensor& matrix() const noexcept { return rho_; }
    const std::optional<Vector>& pure_state() const noexcept { return pure_; }
    std::size_t dim() const noexcept { return rho_.rows(); }
    double trace() const noexcept;

 private:
    DensityMatrix(Tensor rho, std::optional<Vector> pure) : rho_(std::move(rho)), pure_(std::move(pure)) {}
    Tensor rho_;
    std::optional<Vector> pure_;
};

inline DensityMatrix density(const QuantumState& psi) {
    return DensityMatrix::pure(psi);
}

// (Tr sqrt(sqrt(rho_q) rho_k sqrt(rho_q)))^2. Uses |<psi_q|psi_k>|^2 when both
// inputs are pure, the eigendecomposition route otherwise.
double fidelity(const DensityMatrix& rho_q, const DensityMatrix& rho_k);
// Always the eigendecomposition route.
double fidelity_general(const DensityMatrix& rho_q, const DensityMatrix& rho_k);
// |<a|b>|^2.
double fidelity(const QuantumState& a, const QuantumState& b);

// (t_enhanced + v_enhanced) / 2.
Vector form_query(std::span<const double> t_enhanced, std::span<const double> v_enhanced);

enum class Similarity { Fidelity, Cosine };
std::string to_string(Similarity s);
Similarity parse_similarity(const std::string& s);

// Knowledge base with unit states cached per entry.
class KnowledgeIndex {
 public:
    explicit KnowledgeIndex(std::vector<KnowledgeEntry> entries);

    const std::vector<KnowledgeEntry>& entries() const noexcept { return entries_; }
    const std::vector<Vector>& unit_states() const noexcept { return units_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t dim() const noexcept { return dim_; }

 private:
    std::vector<KnowledgeEntry> entries_;
    std::vector<Vector> units_;
    std::size_t dim_ = 0;
};

struct RetrievalOptions {
    std::size_t top_k = kDefaultTopK;
    double temperature = kDefaultTemperature;
    Similarity similarity = Similarity::Fidelity;
};

struct RetrievalResult {
    std::vector<std::size_t> indices;  // into the knowledge base
    std::vector<std::string> ids;
    Vector similarities;  // descending
    Vector weights;       // softmax(similarities / temperature)
    Vector k_agg;         // sum_j weights[j] * raw embedding_j
};

// Similarity of the query state to every entry. OpenMP over entries.
Vector similarity_scan(const QuantumState& q, const KnowledgeIndex& kb, Similarity similarity);

namespace serial {
Vector similarity_scan(const QuantumState& q, const KnowledgeIndex& kb, Similarity similarity);
}

// Top-K by similarity (ties to the lower index), then temperature softmax
// over the K retrieved. Non-differentiable lookup.
RetrievalResult retrieve(std::span<const double> q, const KnowledgeIndex& kb,
                         const RetrievalOptions& options = {});

// k_agg for each row of a [B x d] query batch; rows run in parallel.
Tensor retrieve_batch(const Tensor& queries, const KnowledgeIndex& kb,
                      const RetrievalOptions& options = {});

}  // namespace qfsru::qrag
