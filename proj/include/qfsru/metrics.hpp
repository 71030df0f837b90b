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
#include <string>
#include <vector>

#include "qfsru/tensor.hpp"

namespace qfsru::metrics {

struct FoldMetrics {
    double accuracy = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double auc = 0.0;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for a single fold
};

struct MetricsReport {
    std::vector<FoldMetrics> folds;
    MeanStd accuracy, f1, precision, recall, auc;
};

// Scores are per-class probabilities [N x C]; predictions are the argmax
// (lowest index on ties). Precision, recall, F1 and one-vs-rest AUC are
// macro-averaged over classes present in `labels`; absent classes are
// skipped with a warning. A class never predicted has precision 0. AUC
// counts tied scores as half.
FoldMetrics compute_metrics(const Tensor& scores, std::span<const std::size_t> labels);

// One-vs-rest AUC for a binary relevance vector (trapezoidal rule over the
// ranking, ties 0.5). Requires at least one positive and one negative.
double binary_auc(std::span<const double> scores, std::span<const bool> positive);

MetricsReport summarize(std::vector<FoldMetrics> folds);

}  // namespace qfsru::metrics
