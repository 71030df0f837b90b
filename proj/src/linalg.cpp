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

#include "qfsru/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qfsru/errors.hpp"

namespace qfsru::linalg {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Tensor& a) {
    double s = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) s += a.at(i, j) * a.at(i, j);
        }
    }
    return std::sqrt(s);
}

}  // namespace

Tensor transpose(const Tensor& a) {
    Tensor t({a.cols(), a.rows()});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
    }
    return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: " + a.shape_string() + " x " + b.shape_string());
    }
    Tensor c({a.rows(), b.cols()});
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double s = a.at(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c.at(i, j) += s * b.at(k, j);
        }
    }
    return c;
}

EigenDecomposition symmetric_eig(const Tensor& input) {
    if (input.rank() != 2 || input.rows() != input.cols()) {
        throw ContractError("symmetric_eig: matrix must be square, got " + input.shape_string());
    }
    const std::size_t n = input.rows();
    double scale = 0.0;
    for (double v : input.values()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(input.at(i, j) - input.at(j, i)) > kSymmetryTol) {
                throw ContractError("symmetric_eig: matrix is not symmetric at (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }

    Tensor a = input;
    Tensor v = Tensor::identity(n);
    const double stop = std::max(scale, 1e-300) * 1e-15;
    for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) > stop; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p);
                    const double vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a.at(i, i) < a.at(j, j); });
    EigenDecomposition out{Vector(n), Tensor({n, n})};
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = a.at(order[i], order[i]);
        for (std::size_t k = 0; k < n; ++k) out.vectors.at(k, i) = v.at(k, order[i]);
    }
    return out;
}

double rank_floor(std::span<const double> eigenvalues) {
    double top = 0.0;
    for (double l : eigenvalues) top = std::max(top, std::abs(l));
    return double(eigenvalues.size()) * std::numeric_limits<double>::epsilon() * top;
}

Tensor psd_sqrt(const Tensor& a, double psd_tol) {
    const auto eig = symmetric_eig(a);
    const std::size_t n = a.rows();
    const double floor = rank_floor(eig.values);
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        const double lambda = eig.values[i];
        if (lambda < -psd_tol) {
            throw NumericError("matrix is not positive semidefinite: eigenvalue " +
                               std::to_string(lambda));
        }
        const double root = lambda > floor ? std::sqrt(lambda) : 0.0;
        if (root == 0.0) continue;
        for (std::size_t r = 0; r < n; ++r) {
            const double vr = eig.vectors.at(r, i) * root;
            for (std::size_t c = 0; c < n; ++c) out.at(r, c) += vr * eig.vectors.at(c, i);
        }
    }
    return out;
}

}  // namespace qfsru::linalg
