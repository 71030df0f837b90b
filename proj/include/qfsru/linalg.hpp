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

#include <span>

#include "qfsru/tensor.hpp"

namespace qfsru::linalg {

struct EigenDecomposition {
    Vector values;   // ascending
    Tensor vectors;  // column i pairs with values[i]
};

// Symmetric eigendecomposition by cyclic Jacobi rotations.
// Throws ContractError when `a` is not square or not symmetric within 1e-10.
EigenDecomposition symmetric_eig(const Tensor& a);

Tensor transpose(const Tensor& a);
Tensor matmul(const Tensor& a, const Tensor& b);

// n * eps * max|l|: eigenvalues at or below this are rounding noise and
// count as zero when taking square roots.
double rank_floor(std::span<const double> eigenvalues);

// PSD square root V diag(sqrt(max(l, 0))) V^T. Throws NumericError when an
// eigenvalue is below -psd_tol.
Tensor psd_sqrt(const Tensor& a, double psd_tol = 1e-8);

}  // namespace qfsru::linalg
