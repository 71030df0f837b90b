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

#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qfsru/tensor.hpp"

// Reverse-mode differentiation over a linear tape.
//
// Every primitive appends one node holding its forward value and an adjoint
// closure. `Tape::backward` walks the nodes in exact reverse recording order.
// A tape is single-owner: never record onto one tape from two threads.
namespace qfsru::ad {

struct Var {
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t id = kNone;
    bool valid() const noexcept { return id != kNone; }
};

class Tape {
 public:
    // Accumulates the adjoint of a node's output into its inputs. `self` is
    // the node being differentiated, so its forward value stays reachable.
    using Adjoint = std::function<void(Tape&, const Tensor& out_grad, Var self)>;

    Var leaf(Tensor value);
    Var constant(Tensor value);

    const Tensor& value(Var v) const;
    // Gradient of the last backward() target with respect to `v`; zeros if
    // the node received no gradient.
    Tensor grad(Var v) const;

    // Seeds d(out)/d(out) = 1. `out` must hold exactly one element.
    void backward(Var out);

    bool requires_grad(Var v) const;
    void accumulate(Var v, const Tensor& g);

    Var record(const char* op, Tensor value, std::span<const Var> inputs, Adjoint adjoint);

    std::size_t size() const noexcept { return nodes_.size(); }
    const std::string& op_name(Var v) const;
    // Node ids in the order the last backward() processed them.
    const std::vector<std::size_t>& backward_order() const noexcept { return visited_; }

 private:
    struct Node {
        std::string op;
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        bool requires_grad = false;
        Adjoint adjoint;
    };
    const Node& node(Var v) const;

    std::deque<Node> nodes_;  // deque: value() references survive later records
    std::vector<std::size_t> visited_;
};

// Y = X W^T + b. X:[B x n], W:[m x n], b:[m] or invalid.
Var linear(Tape& t, Var x, Var w, Var b = {});

Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);

// Per-row broadcast with a [B x 1] column.
Var mul_col(Tape& t, Var x, Var col);
Var div_col(Tape& t, Var x, Var col);

Var dft_magnitude(Tape& t, Var x);

Var sigmoid(Tape& t, Var x);
Var gelu(Tape& t, Var x);
Var softmax(Tape& t, Var x);

inline constexpr double kLayerNormEps = 1e-5;
// Normalizes each row to zero mean and unit variance, then applies
// gamma/beta of length cols.
Var layernorm(Tape& t, Var x, Var gamma, Var beta);

// Inverted dropout; identity when !train or p == 0. p must lie in [0, 1).
Var dropout(Tape& t, Var x, double p, std::mt19937_64& rng, bool train);

// Mean over columns, [B x n] -> [B x 1].
Var mean_cols(Tape& t, Var x);
// Mean over rows, [L x n] -> [1 x n].
Var mean_rows(Tape& t, Var x);
// Euclidean norm of each row, [B x n] -> [B x 1].
Var row_norm(Tape& t, Var x);
// Rows scaled to unit norm. A row with norm <= 1e-12 is a DegenerateInputError.
Var normalize_rows(Tape& t, Var x);

Var concat_cols(Tape& t, std::span<const Var> parts);

// Mean over the batch of -log softmax(logits)[label], max-subtracted.
Var cross_entropy(Tape& t, Var logits, std::span<const std::size_t> labels);

// sum_i weights[i] * terms[i] over scalar terms.
Var weighted_sum(Tape& t, std::span<const Var> terms, std::span<const double> weights);

}  // namespace qfsru::ad
