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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qfsru/autodiff.hpp"

namespace qfsru {

struct GradCheckResult {
    std::string name;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

// Builds a scalar on `tape` from leaves created for each input tensor.
using ScalarGraph = std::function<ad::Var(ad::Tape& tape, std::span<const ad::Var> leaves)>;

// Compares reverse-mode gradients against central differences with step h.
// The error for each input is ||g - g_fd|| / max(||g||, ||g_fd||, 1e-8); the
// reported figure is the worst over inputs.
GradCheckResult check_gradients(std::string name, const std::vector<Tensor>& inputs,
                                const ScalarGraph& graph, double h = 1e-4, double tol = 1e-4);

// Every differentiable stage of the pipeline at toy size (d <= 8, B <= 3).
std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed = 7);

}  // namespace qfsru
