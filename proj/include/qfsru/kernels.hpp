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

#include <complex>
#include <span>
#include <vector>

#include "qfsru/tensor.hpp"

// Dense kernels behind every differentiable layer.
//
// Functions in `qfsru::kernels` are OpenMP-parallel over their outermost
// independent axis. `qfsru::kernels::serial` holds the single-threaded
// reference versions with identical per-element summation order, so the two
// agree bit-for-bit; tests and the benchmark compare them.
//
// DFT convention: X[k] = sum_n x[n] exp(-2 pi i k n / d), unnormalized.
namespace qfsru::kernels {

using Complex = std::complex<double>;

// Magnitude gradients divide by max(|X[k]|, kMagnitudeFloor).
inline constexpr double kMagnitudeFloor = 1e-12;

bool is_power_of_two(std::size_t n) noexcept;

// y = W x + b.
Vector matvec(const Tensor& w, std::span<const double> x, std::span<const double> b);

// Forward transform of a real vector. Radix-2 FFT when the length is a
// power of two, O(d^2) DFT otherwise.
std::vector<Complex> dft(std::span<const double> x);
// Same convention for complex input; used for the magnitude adjoint.
std::vector<Complex> dft(std::span<const Complex> x);

Vector dft_magnitude(std::span<const double> x);

// d/dx of <upstream, |DFT(x)|>.
Vector dft_magnitude_backward(std::span<const double> x, std::span<const double> upstream);

// Y[B x m] = X[B x n] * W[m x n]^T + b[m]. `b` may be empty.
Tensor linear(const Tensor& x, const Tensor& w, std::span<const double> b);
// C[B x n] = A[B x m] * W[m x n].
Tensor matmul(const Tensor& a, const Tensor& w);
// C[m x n] = A[B x m]^T * X[B x n].
Tensor matmul_transposed_lhs(const Tensor& a, const Tensor& x);

// Row-wise magnitude spectrum of a [B x d] batch and its adjoint.
Tensor dft_magnitude_rows(const Tensor& x);
Tensor dft_magnitude_rows_backward(const Tensor& x, const Tensor& upstream);

namespace serial {

Tensor linear(const Tensor& x, const Tensor& w, std::span<const double> b);
Tensor matmul(const Tensor& a, const Tensor& w);
Tensor matmul_transposed_lhs(const Tensor& a, const Tensor& x);
Tensor dft_magnitude_rows(const Tensor& x);
Tensor dft_magnitude_rows_backward(const Tensor& x, const Tensor& upstream);

}  // namespace serial

// Sets the OpenMP team size used by the parallel kernels; n <= 0 keeps the
// runtime default. No-op without OpenMP.
void set_worker_count(int n);
int worker_count();

}  // namespace qfsru::kernels
