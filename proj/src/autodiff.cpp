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

#include "qfsru/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "qfsru/errors.hpp"
#include "qfsru/kernels.hpp"

namespace qfsru::ad {

// ---------------------------------------------------------------------------
// Tape

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.id >= nodes_.size()) {
        throw ContractError("autodiff: variable does not belong to this tape");
    }
    return nodes_[v.id];
}

Var Tape::leaf(Tensor value) {
    value.require_finite("leaf");
    nodes_.push_back(Node{"leaf", std::move(value), {}, false, true, {}});
    return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
    value.require_finite("constant");
    nodes_.push_back(Node{"constant", std::move(value), {}, false, false, {}});
    return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
    return node(v).value;
}

Tensor Tape::grad(Var v) const {
    const Node& n = node(v);
    if (n.has_grad) return n.grad;
    return Tensor(n.value.shape());
}

bool Tape::requires_grad(Var v) const {
    return node(v).requires_grad;
}

const std::string& Tape::op_name(Var v) const {
    return node(v).op;
}

void Tape::accumulate(Var v, const Tensor& g) {
    Node& n = nodes_.at(v.id);
    if (!n.requires_grad) return;
    if (g.size() != n.value.size()) {
        throw ContractError("autodiff: gradient shape " + g.shape_string() +
                            " does not match node " + n.value.shape_string() + " (" + n.op + ")");
    }
    if (!n.has_grad) {
        n.grad = Tensor(n.value.shape(), std::vector<double>(g.values()));
        n.has_grad = true;
        return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

Var Tape::record(const char* op, Tensor value, std::span<const Var> inputs, Adjoint adjoint) {
    value.require_finite(op);
    bool needs = false;
    for (Var in : inputs) needs = needs || node(in).requires_grad;
    nodes_.push_back(Node{op, std::move(value), {}, false, needs,
                          needs ? std::move(adjoint) : Adjoint{}});
    return Var{nodes_.size() - 1};
}

void Tape::backward(Var out) {
    const Node& root = node(out);
    if (root.value.size() != 1) {
        throw ContractError("autodiff: backward() needs a scalar output, got " +
                            root.value.shape_string());
    }
    for (auto& n : nodes_) {
        n.has_grad = false;
        n.grad = Tensor();
    }
    visited_.clear();
    accumulate(out, Tensor(root.value.shape(), 1.0));
    for (std::size_t i = out.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.has_grad || !n.adjoint) continue;
        visited_.push_back(i);
        n.adjoint(*this, n.grad, Var{i});
    }
}

// ---------------------------------------------------------------------------
// Primitives

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (a.size() != b.size() || a.rows() != b.rows()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                             b.shape_string());
    }
}

void require_col(const Tensor& x, const Tensor& col, const char* op) {
    if (col.size() != x.rows()) {
        throw DimensionError(std::string(op) + ": column " + col.shape_string() +
                             " does not match rows of " + x.shape_string());
    }
}

Tensor like(const Tensor& t) {
    return Tensor(t.shape());
}

Tensor as_matrix(const Tensor& t) {
    return Tensor({t.rows(), t.cols()}, std::vector<double>(t.values()));
}

}  // namespace

Var linear(Tape& t, Var x, Var w, Var b) {
    const Tensor& xv = t.value(x);
    const Tensor& wv = t.value(w);
    std::span<const double> bias;
    if (b.valid()) bias = t.value(b).span();
    Tensor y = kernels::linear(as_matrix(xv), wv, bias);
    std::vector<Var> inputs{x, w};
    if (b.valid()) inputs.push_back(b);
    return t.record("linear", std::move(y), inputs, [x, w, b](Tape& tp, const Tensor& g, Var) {
        const Tensor& xv = tp.value(x);
        const Tensor& wv = tp.value(w);
        if (tp.requires_grad(x)) {
            Tensor dx = kernels::matmul(g, wv);
            tp.accumulate(x, dx);
        }
        if (tp.requires_grad(w)) {
            tp.accumulate(w, kernels::matmul_transposed_lhs(g, as_matrix(xv)));
        }
        if (b.valid() && tp.requires_grad(b)) {
            Tensor db = like(tp.value(b));
            for (std::size_t r = 0; r < g.rows(); ++r) {
                for (std::size_t c = 0; c < g.cols(); ++c) db[c] += g.at(r, c);
            }
            tp.accumulate(b, db);
        }
    });
}

Var add(Tape& t, Var a, Var b) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    require_same(av, bv, "add");
    Tensor y = like(av);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
    const Var in[] = {a, b};
    return t.record("add", std::move(y), in, [a, b](Tape& tp, const Tensor& g, Var) {
        tp.accumulate(a, g);
        tp.accumulate(b, g);
    });
}

Var sub(Tape& t, Var a, Var b) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    require_same(av, bv, "sub");
    Tensor y = like(av);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] - bv[i];
    const Var in[] = {a, b};
    return t.record("sub", std::move(y), in, [a, b](Tape& tp, const Tensor& g, Var) {
        tp.accumulate(a, g);
        Tensor neg = g;
        for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
        tp.accumulate(b, neg);
    });
}

Var mul(Tape& t, Var a, Var b) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    require_same(av, bv, "mul");
    Tensor y = like(av);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
    const Var in[] = {a, b};
    return t.record("mul", std::move(y), in, [a, b](Tape& tp, const Tensor& g, Var) {
        const Tensor& av = tp.value(a);
        const Tensor& bv = tp.value(b);
        Tensor da = like(av), db = like(bv);
        for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] = g[i] * bv[i];
            db[i] = g[i] * av[i];
        }
        tp.accumulate(a, da);
        tp.accumulate(b, db);
    });
}

Var scale(Tape& t, Var a, double s) {
    Tensor y = t.value(a);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= s;
    const Var in[] = {a};
    return t.record("scale", std::move(y), in, [a, s](Tape& tp, const Tensor& g, Var) {
        Tensor da = g;
        for (std::size_t i = 0; i < da.size(); ++i) da[i] *= s;
        tp.accumulate(a, da);
    });
}

Var mul_col(Tape& t, Var x, Var col) {
    const Tensor& xv = t.value(x);
    const Tensor& cv = t.value(col);
    require_col(xv, cv, "mul_col");
    Tensor y = like(xv);
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        for (std::size_t c = 0; c < xv.cols(); ++c) y[r * xv.cols() + c] = xv[r * xv.cols() + c] * cv[r];
    }
    const Var in[] = {x, col};
    return t.record("mul_col", std::move(y), in, [x, col](Tape& tp, const Tensor& g, Var) {
        const Tensor& xv = tp.value(x);
        const Tensor& cv = tp.value(col);
        const std::size_t n = xv.cols();
        Tensor dx = like(xv), dc = like(cv);
        for (std::size_t r = 0; r < xv.rows(); ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                dx[r * n + c] = g[r * n + c] * cv[r];
                acc += g[r * n + c] * xv[r * n + c];
            }
            dc[r] = acc;
        }
        tp.accumulate(x, dx);
        tp.accumulate(col, dc);
    });
}

Var div_col(Tape& t, Var x, Var col) {
    const Tensor& xv = t.value(x);
    const Tensor& cv = t.value(col);
    require_col(xv, cv, "div_col");
    const std::size_t n = xv.cols();
    Tensor y = like(xv);
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        for (std::size_t c = 0; c < n; ++c) y[r * n + c] = xv[r * n + c] / cv[r];
    }
    const Var in[] = {x, col};
    return t.record("div_col", std::move(y), in, [x, col](Tape& tp, const Tensor& g, Var) {
        const Tensor& xv = tp.value(x);
        const Tensor& cv = tp.value(col);
        const std::size_t n = xv.cols();
        Tensor dx = like(xv), dc = like(cv);
        for (std::size_t r = 0; r < xv.rows(); ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                dx[r * n + c] = g[r * n + c] / cv[r];
                acc += g[r * n + c] * xv[r * n + c];
            }
            dc[r] = -acc / (cv[r] * cv[r]);
        }
        tp.accumulate(x, dx);
        tp.accumulate(col, dc);
    });
}

Var dft_magnitude(Tape& t, Var x) {
    Tensor y = kernels::dft_magnitude_rows(as_matrix(t.value(x)));
    const Var in[] = {x};
    return t.record("dft_magnitude", std::move(y), in, [x](Tape& tp, const Tensor& g, Var) {
        tp.accumulate(x, kernels::dft_magnitude_rows_backward(as_matrix(tp.value(x)), g));
    });
}

Var sigmoid(Tape& t, Var x) {
    const Tensor& xv = t.value(x);
    Tensor y = like(xv);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = xv[i];
        // Branch on sign so exp() never overflows.
        y[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    const Var in[] = {x};
    return t.record("sigmoid", std::move(y), in, [x](Tape& tp, const Tensor& g, Var self) {
        const Tensor& s = tp.value(self);
        Tensor dx = like(s);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g[i] * s[i] * (1.0 - s[i]);
        tp.accumulate(x, dx);
    });
}

Var gelu(Tape& t, Var x) {
    const Tensor& xv = t.value(x);
    Tensor y = like(xv);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] / std::numbers::sqrt2));
    }
    const Var in[] = {x};
    return t.record("gelu", std::move(y), in, [x](Tape& tp, const Tensor& g, Var) {
        const Tensor& xv = tp.value(x);
        const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
        Tensor dx = like(xv);
        for (std::size_t i = 0; i < dx.size(); ++i) {
            const double v = xv[i];
            const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
            const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
            dx[i] = g[i] * (cdf + v * pdf);
        }
        tp.accumulate(x, dx);
    });
}

Var softmax(Tape& t, Var x) {
    const Tensor& xv = t.value(x);
    const std::size_t n = xv.cols();
    Tensor y = like(xv);
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        const double* in = xv.data() + r * n;
        double* out = y.data() + r * n;
        const double mx = *std::max_element(in, in + n);
        double total = 0.0;
        for (std::size_t c = 0; c < n; ++c) total += (out[c] = std::exp(in[c] - mx));
        for (std::size_t c = 0; c < n; ++c) out[c] /= total;
    }
    const Var in[] = {x};
    return t.record("softmax", std::move(y), in, [x](Tape& tp, const Tensor& g, Var self) {
        const Tensor& s = tp.value(self);
        const std::size_t n = s.cols();
        Tensor dx = like(s);
        for (std::size_t r = 0; r < s.rows(); ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < n; ++c) dot += g[r * n + c] * s[r * n + c];
            for (std::size_t c = 0; c < n; ++c) {
                dx[r * n + c] = s[r * n + c] * (g[r * n + c] - dot);
            }
        }
        tp.accumulate(x, dx);
    });
}

Var layernorm(Tape& t, Var x, Var gamma, Var beta) {
    const Tensor& xv = t.value(x);
    const Tensor& gv = t.value(gamma);
    const Tensor& bv = t.value(beta);
    const std::size_t n = xv.cols();
    if (gv.size() != n || bv.size() != n) {
        throw DimensionError("layernorm: gamma/beta length must equal row width " +
                             std::to_string(n));
    }
    Tensor y = like(xv);
    // Saved per row: normalized values and 1/sigma.
    auto normed = std::make_shared<Tensor>(like(xv));
    auto inv_std = std::make_shared<std::vector<double>>(xv.rows());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        const double* in = xv.data() + r * n;
        double mean = 0.0;
        for (std::size_t c = 0; c < n; ++c) mean += in[c];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t c = 0; c < n; ++c) var += (in[c] - mean) * (in[c] - mean);
        var /= static_cast<double>(n);
        const double is = 1.0 / std::sqrt(var + kLayerNormEps);
        (*inv_std)[r] = is;
        for (std::size_t c = 0; c < n; ++c) {
            const double h = (in[c] - mean) * is;
            (*normed)[r * n + c] = h;
            y[r * n + c] = gv[c] * h + bv[c];
        }
    }
    const Var in[] = {x, gamma, beta};
    return t.record("layernorm", std::move(y), in,
                    [x, gamma, beta, normed, inv_std](Tape& tp, const Tensor& g, Var) {
        const Tensor& gv = tp.value(gamma);
        const std::size_t rows = normed->rows();
        const std::size_t n = normed->cols();
        Tensor dx({rows, n});
        Tensor dgamma = like(gv), dbeta = like(gv);
        for (std::size_t r = 0; r < rows; ++r) {
            double mean_dh = 0.0, mean_dh_h = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                const double dh = g[r * n + c] * gv[c];
                const double h = (*normed)[r * n + c];
                mean_dh += dh;
                mean_dh_h += dh * h;
                dgamma[c] += g[r * n + c] * h;
                dbeta[c] += g[r * n + c];
            }
            mean_dh /= static_cast<double>(n);
            mean_dh_h /= static_cast<double>(n);
            for (std::size_t c = 0; c < n; ++c) {
                const double dh = g[r * n + c] * gv[c];
                const double h = (*normed)[r * n + c];
                dx[r * n + c] = (*inv_std)[r] * (dh - mean_dh - h * mean_dh_h);
            }
        }
        tp.accumulate(x, dx);
        tp.accumulate(gamma, dgamma);
        tp.accumulate(beta, dbeta);
    });
}

Var dropout(Tape& t, Var x, double p, std::mt19937_64& rng, bool train) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(p));
    }
    if (!train || p == 0.0) return x;
    const Tensor& xv = t.value(x);
    std::bernoulli_distribution keep(1.0 - p);
    const double s = 1.0 / (1.0 - p);
    auto mask = std::make_shared<std::vector<double>>(xv.size());
    Tensor y = like(xv);
    for (std::size_t i = 0; i < y.size(); ++i) {
        (*mask)[i] = keep(rng) ? s : 0.0;
        y[i] = xv[i] * (*mask)[i];
    }
    const Var in[] = {x};
    return t.record("dropout", std::move(y), in, [x, mask](Tape& tp, const Tensor& g, Var) {
        Tensor dx = like(g);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g[i] * (*mask)[i];
        tp.accumulate(x, dx);
    });
}

Var mean_cols(Tape& t, Var x) {
    const Tensor& xv = t.value(x);
    const std::size_t n = xv.cols();
    Tensor y({xv.rows(), 1});
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += xv[r * n + c];
        y[r] = acc / static_cast<double>(n);
    }
    const Var in[] = {x};
    return t.record("mean_cols", std::move(y), in, [x](Tape& tp, const Tensor& g, Var) {
        const Tensor& xv = tp.value(x);
        const std::size_t n = xv.cols();
        Tensor dx = like(xv);
        for (std::size_t r = 0; r < xv.rows(); ++r) {
            for (std::size_t c = 0; c < n; ++c) dx[r * n + c] = g[r] / static_cast<double>(n);
        }
        tp.accumulate(x, dx);
    });
}

Var mean_rows(Tape& t, Var x) {
    const Tensor& xv = t.value(x);
    const std::size_t rows = xv.rows();
    const std::size_t n = xv.cols();
    Tensor y({1, n});
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c) y[c] += xv[r * n + c];
    }
    for (std::size_t c = 0; c < n; ++c) y[c] /= static_cast<double>(rows);
    const Var in[] = {x};
    return t.record("mean_rows", std::move(y), in, [x](Tape& tp, const Tensor& g, Var) {
        const Tensor& xv = tp.value(x);
        const std::size_t rows = xv.rows();
        const std::size_t n = xv.cols();
        Tensor dx = like(xv);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < n; ++c) dx[r * n + c] = g[c] / static_cast<double>(rows);
        }
        tp.accumulate(x, dx);
    });
}

Var row_norm(Tape& t, Var x) {
    const Tensor& xv = t.value(x);
    const std::size_t n = xv.cols();
    Tensor y({xv.rows(), 1});
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += xv[r * n + c] * xv[r * n + c];
        y[r] = std::sqrt(acc);
    }
    const Var in[] = {x};
    return t.record("row_norm", std::move(y), in, [x](Tape& tp, const Tensor& g, Var self) {
        const Tensor& xv = tp.value(x);
        const Tensor& norms = tp.value(self);
        const std::size_t n = xv.cols();
        Tensor dx = like(xv);
        for (std::size_t r = 0; r < xv.rows(); ++r) {
            if (norms[r] == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) dx[r * n + c] = g[r] * xv[r * n + c] / norms[r];
        }
        tp.accumulate(x, dx);
    });
}

Var normalize_rows(Tape& t, Var x) {
    const Var norms = row_norm(t, x);
    const Tensor& nv = t.value(norms);
    for (std::size_t r = 0; r < nv.size(); ++r) {
        if (nv[r] <= 1e-12) {
            throw DegenerateInputError("row " + std::to_string(r) +
                                       " has zero norm; cosine similarity is undefined");
        }
    }
    return div_col(t, x, norms);
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no inputs");
    const std::size_t rows = t.value(parts[0]).rows();
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (Var p : parts) {
        const Tensor& v = t.value(p);
        if (v.rows() != rows) {
            throw DimensionError("concat_cols: row count mismatch " + v.shape_string());
        }
        widths.push_back(v.cols());
        total += v.cols();
    }
    Tensor y({rows, total});
    std::size_t offset = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Tensor& v = t.value(parts[i]);
        for (std::size_t r = 0; r < rows; ++r) {
            std::copy_n(v.data() + r * widths[i], widths[i], y.data() + r * total + offset);
        }
        offset += widths[i];
    }
    std::vector<Var> captured(parts.begin(), parts.end());
    return t.record("concat_cols", std::move(y), parts,
                    [captured, widths, total](Tape& tp, const Tensor& g, Var) {
        std::size_t offset = 0;
        const std::size_t rows = g.size() / total;
        for (std::size_t i = 0; i < captured.size(); ++i) {
            Tensor part({rows, widths[i]});
            for (std::size_t r = 0; r < rows; ++r) {
                std::copy_n(g.data() + r * total + offset, widths[i], part.data() + r * widths[i]);
            }
            tp.accumulate(captured[i], part);
            offset += widths[i];
        }
    });
}

Var cross_entropy(Tape& t, Var logits, std::span<const std::size_t> labels) {
    const Tensor& z = t.value(logits);
    const std::size_t batch = z.rows();
    const std::size_t classes = z.cols();
    if (labels.size() != batch) {
        throw DimensionError("cross_entropy: " + std::to_string(labels.size()) +
                             " labels for batch of " + std::to_string(batch));
    }
    auto probs = std::make_shared<Tensor>(Tensor({batch, classes}));
    double loss = 0.0;
    for (std::size_t r = 0; r < batch; ++r) {
        if (labels[r] >= classes) {
            throw SchemaError("cross_entropy: label " + std::to_string(labels[r]) +
                              " out of range for " + std::to_string(classes) + " classes");
        }
        const double* row = z.data() + r * classes;
        const double mx = *std::max_element(row, row + classes);
        double total = 0.0;
        for (std::size_t c = 0; c < classes; ++c) total += std::exp(row[c] - mx);
        const double log_z = mx + std::log(total);
        loss += log_z - row[labels[r]];
        for (std::size_t c = 0; c < classes; ++c) {
            probs->at(r, c) = std::exp(row[c] - log_z);
        }
    }
    loss /= static_cast<double>(batch);
    std::vector<std::size_t> y(labels.begin(), labels.end());
    const Var in[] = {logits};
    return t.record("cross_entropy", Tensor({1}, loss), in,
                    [logits, probs, y](Tape& tp, const Tensor& g, Var) {
        const std::size_t batch = probs->rows();
        const std::size_t classes = probs->cols();
        Tensor dz({batch, classes});
        const double s = g[0] / static_cast<double>(batch);
        for (std::size_t r = 0; r < batch; ++r) {
            for (std::size_t c = 0; c < classes; ++c) {
                dz.at(r, c) = s * (probs->at(r, c) - (c == y[r] ? 1.0 : 0.0));
            }
        }
        tp.accumulate(logits, dz);
    });
}

Var weighted_sum(Tape& t, std::span<const Var> terms, std::span<const double> weights) {
    if (terms.size() != weights.size()) {
        throw DimensionError("weighted_sum: terms and weights differ in length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const Tensor& v = t.value(terms[i]);
        if (v.size() != 1) throw DimensionError("weighted_sum: terms must be scalars");
        total += weights[i] * v[0];
    }
    std::vector<Var> captured(terms.begin(), terms.end());
    std::vector<double> w(weights.begin(), weights.end());
    return t.record("weighted_sum", Tensor({1}, total), terms,
                    [captured, w](Tape& tp, const Tensor& g, Var) {
        for (std::size_t i = 0; i < captured.size(); ++i) {
            tp.accumulate(captured[i], Tensor({1}, g[0] * w[i]));
        }
    });
}

}  // namespace qfsru::ad
