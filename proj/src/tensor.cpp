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

#include "qfsru/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "qfsru/errors.hpp"

namespace qfsru {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    if (shape.empty()) {
        throw DimensionError("tensor shape must have at least one axis");
    }
    for (auto s : shape) {
        if (s == 0) {
            throw DimensionError("tensor axes must be positive, got " + shape_string(shape));
        }
    }
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + qfsru::shape_string(shape_));
    }
}

Tensor Tensor::vector(std::vector<double> data) {
    const std::size_t n = data.size();
    return Tensor({n}, std::move(data));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

std::size_t Tensor::rows() const noexcept {
    return shape_.size() >= 2 ? shape_[0] : 1;
}

std::size_t Tensor::cols() const noexcept {
    if (shape_.empty()) return 0;
    return shape_.size() >= 2 ? data_.size() / shape_[0] : shape_[0];
}

void Tensor::fill(double v) {
    std::fill(data_.begin(), data_.end(), v);
}

bool Tensor::all_finite() const noexcept {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void Tensor::require_finite(const std::string& where) const {
    if (!all_finite()) {
        throw NumericError("non-finite value produced by " + where);
    }
}

std::string Tensor::shape_string() const {
    return qfsru::shape_string(shape_);
}

}  // namespace qfsru
