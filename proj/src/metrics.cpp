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

#include "qfsru/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "qfsru/errors.hpp"
#include "qfsru/log.hpp"

namespace qfsru::metrics {

double binary_auc(std::span<const double> scores, std::span<const bool> positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Mann-Whitney U with mid-ranks for ties.
    double rank_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * double(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (positive[order[k]]) {
                rank_sum += mid_rank;
                ++pos;
            }
        }
        i = j;
    }
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) {
        throw ContractError("binary_auc needs at least one positive and one negative");
    }
    const double u = rank_sum - double(pos) * double(pos + 1) / 2.0;
    return u / (double(pos) * double(neg));
}

FoldMetrics compute_metrics(const Tensor& scores, std::span<const std::size_t> labels) {
    const std::size_t n = scores.rows();
    const std::size_t classes = scores.cols();
    if (labels.size() != n) throw DimensionError("compute_metrics: label count differs from scores");
    if (n == 0) throw ContractError("compute_metrics: empty split");

    std::vector<std::size_t> predicted(n);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = scores.row(i);
        predicted[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        if (labels[i] >= classes) throw SchemaError("compute_metrics: label out of range");
        correct += predicted[i] == labels[i];
    }

    FoldMetrics m;
    m.accuracy = double(correct) / double(n);
    std::size_t present = 0, auc_classes = 0;
    double auc_sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool truth = labels[i] == c;
            const bool pred = predicted[i] == c;
            tp += truth && pred;
            fp += !truth && pred;
            fn += truth && !pred;
        }
        if (tp + fn == 0) {
            log::warn("class " + std::to_string(c) + " is absent from the split; excluded from macro averages");
            continue;
        }
        ++present;
        const double precision = tp + fp ? double(tp) / double(tp + fp) : 0.0;
        const double recall = double(tp) / double(tp + fn);
        const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        m.precision += precision;
        m.recall += recall;
        m.f1 += f1;
        if (tp + fn < n) {
            std::vector<double> col(n);
            auto positive = std::make_unique<bool[]>(n);
            for (std::size_t i = 0; i < n; ++i) {
                col[i] = scores.at(i, c);
                positive[i] = labels[i] == c;
            }
            auc_sum += binary_auc(col, std::span<const bool>(positive.get(), n));
            ++auc_classes;
        }
    }
    m.precision /= double(present);
    m.recall /= double(present);
    m.f1 /= double(present);
    if (auc_classes) {
        m.auc = auc_sum / double(auc_classes);
    } else {
        log::warn("only one class present; AUC undefined, reported as 0.5");
        m.auc = 0.5;
    }
    return m;
}

MetricsReport summarize(std::vector<FoldMetrics> folds) {
    MetricsReport r;
    r.folds = std::move(folds);
    auto stat = [&](double FoldMetrics::*field) {
        MeanStd s;
        const double k = double(r.folds.size());
        if (r.folds.empty()) return s;
        for (const auto& f : r.folds) s.mean += f.*field;
        s.mean /= k;
        if (r.folds.size() > 1) {
            double sq = 0.0;
            for (const auto& f : r.folds) sq += (f.*field - s.mean) * (f.*field - s.mean);
            s.std = std::sqrt(sq / (k - 1.0));
        }
        return s;
    };
    r.accuracy = stat(&FoldMetrics::accuracy);
    r.f1 = stat(&FoldMetrics::f1);
    r.precision = stat(&FoldMetrics::precision);
    r.recall = stat(&FoldMetrics::recall);
    r.auc = stat(&FoldMetrics::auc);
    return r;
}

}  // namespace qfsru::metrics
