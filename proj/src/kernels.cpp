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

#include "qfsru/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qfsru/errors.hpp"

namespace qfsru::kernels {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

void check_linear(const Tensor& x, const Tensor& w, std::span<const double> b) {
    require(w.rank() == 2, "linear: weight must be a matrix, got " + w.shape_string());
    require(x.cols() == w.cols(), "linear: input width " + std::to_string(x.cols()) +
                                      " does not match weight " + w.shape_string());
    require(b.empty() || b.size() == w.rows(),
            "linear: bias length " + std::to_string(b.size()) + " does not match weight " +
                w.shape_string());
}

void check_matmul(const Tensor& a, const Tensor& w) {
    require(w.rank() == 2 && a.cols() == w.rows(),
            "matmul: " + a.shape_string() + " x " + w.shape_string());
}

void check_matmul_tl(const Tensor& a, const Tensor& x) {
    require(a.rows() == x.rows(),
            "matmul_transposed_lhs: " + a.shape_string() + "^T x " + x.shape_string());
}

// Per-row and per-column kernels are shared between the serial and parallel
// drivers so both perform the same arithmetic in the same order.

// Dot product with eight fixed partial sums. The split is part of the
// definition, so every caller gets the same rounding.
inline double dot(const double* a, const double* b, std::size_t n) {
    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        for (std::size_t l = 0; l < 8; ++l) acc[l] += a[j + l] * b[j + l];
    }
    for (std::size_t l = 0; j < n; ++j, ++l) acc[l] += a[j] * b[j];
    return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

// Output column m for every row of x; w's row stays hot across the batch.
inline void linear_col(const Tensor& x, const Tensor& w, std::span<const double> b,
                       Tensor& y, std::size_t m) {
    const std::size_t n = w.cols();
    const std::size_t out = w.rows();
    const double* wm = w.data() + m * n;
    const double bias = b.empty() ? 0.0 : b[m];
    for (std::size_t r = 0; r < x.rows(); ++r) {
        y.data()[r * out + m] = dot(wm, x.data() + r * n, n) + bias;
    }
}

constexpr std::size_t kColumnBlock = 256;

// Columns [j0, j1) of C = A W for every row. W streams through once; each
// C[r, j] still accumulates over m in ascending order.
inline void matmul_block(const Tensor& a, const Tensor& w, Tensor& c, std::size_t j0, std::size_t j1) {
    const std::size_t inner = w.rows();
    const std::size_t n = w.cols();
    for (std::size_t m = 0; m < inner; ++m) {
        const double* wm = w.data() + m * n;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            const double s = a.data()[r * inner + m];
            if (s == 0.0) continue;
            double* cr = c.data() + r * n;
            for (std::size_t j = j0; j < j1; ++j) cr[j] += s * wm[j];
        }
    }
}

inline void matmul_tl_row(const Tensor& a, const Tensor& x, Tensor& c, std::size_t m) {
    const std::size_t batch = a.rows();
    const std::size_t am = a.cols();
    const std::size_t n = x.cols();
    double* cm = c.data() + m * n;
    for (std::size_t r = 0; r < batch; ++r) {
        const double s = a.data()[r * am + m];
        if (s == 0.0) continue;
        const double* xr = x.data() + r * n;
        for (std::size_t j = 0; j < n; ++j) cm[j] += s * xr[j];
    }
}

// e^{-2 pi i j / n} for j < n, one table per length and thread.
const std::vector<Complex>& twiddles(std::size_t n) {
    thread_local std::deque<std::vector<Complex>> cache;  // deque: references stay valid
    for (const auto& t : cache) {
        if (t.size() == n) return t;
    }
    std::vector<Complex> t(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        t[j] = Complex(std::cos(angle), std::sin(angle));
    }
    cache.push_back(std::move(t));
    return cache.back();
}

std::vector<Complex> fft_radix2(std::vector<Complex> a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& tw = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex w = tw[k * stride];
                const Complex u = a[i + k];
                const Complex p = a[i + k + half];
                // Complex product spelled out: std::complex's operator* carries NaN recovery.
                const Complex v(p.real() * w.real() - p.imag() * w.imag(),
                                p.real() * w.imag() + p.imag() * w.real());
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
    return a;
}

std::vector<Complex> dft_direct(std::span<const Complex> x) {
    const std::size_t d = x.size();
    const auto& tw = twiddles(d);
    std::vector<Complex> out(d);
    for (std::size_t k = 0; k < d; ++k) {
        Complex acc(0.0, 0.0);
        for (std::size_t n = 0; n < d; ++n) {
            const Complex w = tw[(k * n) % d];
            acc += Complex(x[n].real() * w.real() - x[n].imag() * w.imag(),
                           x[n].real() * w.imag() + x[n].imag() * w.real());
        }
        out[k] = acc;
    }
    return out;
}

void magnitude_row(const Tensor& x, Tensor& y, std::size_t r) {
    const auto mag = dft_magnitude(x.row(r));
    std::copy(mag.begin(), mag.end(), y.row(r).begin());
}

void magnitude_backward_row(const Tensor& x, const Tensor& up, Tensor& g, std::size_t r) {
    const auto grad = dft_magnitude_backward(x.row(r), up.row(r));
    std::copy(grad.begin(), grad.end(), g.row(r).begin());
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept {
    return n != 0 && (n & (n - 1)) == 0;
}

Vector matvec(const Tensor& w, std::span<const double> x, std::span<const double> b) {
    require(w.rank() == 2, "matvec: weight must be a matrix, got " + w.shape_string());
    require(x.size() == w.cols(), "matvec: vector length " + std::to_string(x.size()) +
                                      " does not match " + w.shape_string());
    require(b.size() == w.rows(), "matvec: bias length " + std::to_string(b.size()) +
                                      " does not match " + w.shape_string());
    Vector y(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) y[i] = dot(w.data() + i * w.cols(), x.data(), w.cols()) + b[i];
    return y;
}

std::vector<Complex> dft(std::span<const Complex> x) {
    require(!x.empty(), "dft: empty input");
    if (is_power_of_two(x.size())) {
        return fft_radix2(std::vector<Complex>(x.begin(), x.end()));
    }
    return dft_direct(x);
}

std::vector<Complex> dft(std::span<const double> x) {
    std::vector<Complex> c(x.begin(), x.end());
    return dft(std::span<const Complex>(c));
}

Vector dft_magnitude(std::span<const double> x) {
    const auto spectrum = dft(x);
    Vector mag(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) mag[k] = std::abs(spectrum[k]);
    return mag;
}

Vector dft_magnitude_backward(std::span<const double> x, std::span<const double> upstream) {
    require(x.size() == upstream.size(), "dft_magnitude_backward: length mismatch");
    const auto spectrum = dft(x);
    const std::size_t d = spectrum.size();
    // grad[n] = sum_k up[k] Re(conj(X[k]) e^{-2 pi i k n / d}) / |X[k]|
    //         = Re( DFT(conj(Y))[n] ),  Y[k] = up[k] X[k] / |X[k]|.
    std::vector<Complex> weighted(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double denom = std::max(std::abs(spectrum[k]), kMagnitudeFloor);
        weighted[k] = std::conj(spectrum[k]) * (upstream[k] / denom);
    }
    const auto back = dft(std::span<const Complex>(weighted));
    Vector grad(d);
    for (std::size_t n = 0; n < d; ++n) grad[n] = back[n].real();
    return grad;
}

Tensor linear(const Tensor& x, const Tensor& w, std::span<const double> b) {
    check_linear(x, w, b);
    Tensor y({x.rows(), w.rows()});
    const auto out = static_cast<std::ptrdiff_t>(w.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t m = 0; m < out; ++m) linear_col(x, w, b, y, static_cast<std::size_t>(m));
    return y;
}

Tensor matmul(const Tensor& a, const Tensor& w) {
    check_matmul(a, w);
    Tensor c({a.rows(), w.cols()});
    const std::size_t n = w.cols();
    const auto blocks = static_cast<std::ptrdiff_t>((n + kColumnBlock - 1) / kColumnBlock);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < blocks; ++bi) {
        const std::size_t j0 = static_cast<std::size_t>(bi) * kColumnBlock;
        matmul_block(a, w, c, j0, std::min(n, j0 + kColumnBlock));
    }
    return c;
}

Tensor matmul_transposed_lhs(const Tensor& a, const Tensor& x) {
    check_matmul_tl(a, x);
    Tensor c({a.cols(), x.cols()});
    const auto out_rows = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t m = 0; m < out_rows; ++m) {
        matmul_tl_row(a, x, c, static_cast<std::size_t>(m));
    }
    return c;
}

Tensor dft_magnitude_rows(const Tensor& x) {
    Tensor y({x.rows(), x.cols()});
    const auto batch = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < batch; ++r) magnitude_row(x, y, static_cast<std::size_t>(r));
    return y;
}

Tensor dft_magnitude_rows_backward(const Tensor& x, const Tensor& upstream) {
    require(x.rows() == upstream.rows() && x.cols() == upstream.cols(),
            "dft_magnitude_rows_backward: shape mismatch");
    Tensor g({x.rows(), x.cols()});
    const auto batch = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < batch; ++r) {
        magnitude_backward_row(x, upstream, g, static_cast<std::size_t>(r));
    }
    return g;
}

namespace serial {

Tensor linear(const Tensor& x, const Tensor& w, std::span<const double> b) {
    check_linear(x, w, b);
    Tensor y({x.rows(), w.rows()});
    for (std::size_t m = 0; m < w.rows(); ++m) linear_col(x, w, b, y, m);
    return y;
}

Tensor matmul(const Tensor& a, const Tensor& w) {
    check_matmul(a, w);
    Tensor c({a.rows(), w.cols()});
    for (std::size_t j0 = 0; j0 < w.cols(); j0 += kColumnBlock) {
        matmul_block(a, w, c, j0, std::min(w.cols(), j0 + kColumnBlock));
    }
    return c;
}

Tensor matmul_transposed_lhs(const Tensor& a, const Tensor& x) {
    check_matmul_tl(a, x);
    Tensor c({a.cols(), x.cols()});
    for (std::size_t m = 0; m < a.cols(); ++m) matmul_tl_row(a, x, c, m);
    return c;
}

Tensor dft_magnitude_rows(const Tensor& x) {
    Tensor y({x.rows(), x.cols()});
    for (std::size_t r = 0; r < x.rows(); ++r) magnitude_row(x, y, r);
    return y;
}

Tensor dft_magnitude_rows_backward(const Tensor& x, const Tensor& upstream) {
    require(x.rows() == upstream.rows() && x.cols() == upstream.cols(),
            "dft_magnitude_rows_backward: shape mismatch");
    Tensor g({x.rows(), x.cols()});
    for (std::size_t r = 0; r < x.rows(); ++r) magnitude_backward_row(x, upstream, g, r);
    return g;
}

}  // namespace serial

void set_worker_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace qfsru::kernels
