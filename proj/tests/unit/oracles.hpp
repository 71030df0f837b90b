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

// Independent reference implementations used only by tests. They trade speed
// for the most literal transcription of each definition.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "qfsru/tensor.hpp"

namespace oracle {

using qfsru::Tensor;
using qfsru::Vector;

inline std::vector<std::complex<double>> naive_dft(const Vector& x) {
    const std::size_t d = x.size();
    std::vector<std::complex<double>> out(d);
    for (std::size_t k = 0; k < d; ++k) {
        long double re = 0, im = 0;
        for (std::size_t n = 0; n < d; ++n) {
            const long double a = -2.0L * std::numbers::pi_v<long double> * (long double)(k * n % d) / (long double)d;
            re += x[n] * std::cos(a);
            im += x[n] * std::sin(a);
        }
        out[k] = {double(re), double(im)};
    }
    return out;
}

inline Vector naive_magnitude(const Vector& x) {
    Vector m;
    for (auto c : naive_dft(x)) m.push_back(std::abs(c));
    return m;
}

inline Vector naive_matvec(const Tensor& w, const Vector& x, const Vector& b) {
    Vector y(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        long double acc = b.empty() ? 0.0L : b[i];
        for (std::size_t j = 0; j < w.cols(); ++j) acc += (long double)w.at(i, j) * x[j];
        y[i] = double(acc);
    }
    return y;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = n(rng);
    return t;
}

inline Vector random_vector(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
    return random_tensor({d}, rng, scale).values();
}

// Central differences of a scalar function of one vector.
inline Vector finite_difference(const std::function<double(const Vector&)>& f, Vector x, double h = 1e-4) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double up = f(x);
        x[i] = x0 - h;
        const double down = f(x);
        x[i] = x0;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

inline double rel_error(const Vector& a, const Vector& b) {
    double diff = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace oracle
