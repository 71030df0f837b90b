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

// Serial reference vs OpenMP kernels on pipeline-sized shapes.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "qfsru/kernels.hpp"
#include "qfsru/quantum_rag.hpp"

using namespace qfsru;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = n(rng);
    return t;
}

template <class F>
double millis(F&& f, int reps) {
    f();  // warm-up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    const std::chrono::duration<double, std::milli> d = std::chrono::steady_clock::now() - start;
    return d.count() / reps;
}

double max_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void row(const char* name, double serial_ms, double parallel_ms, double diff) {
    std::printf("%-28s %10.3f %10.3f %8.2fx   max|diff| %.1e\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
    const int workers = argc > 1 ? std::atoi(argv[1]) : 0;
    if (workers > 0) kernels::set_worker_count(workers);
    std::printf("workers: %d\n", kernels::worker_count());
    std::printf("%-28s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

    std::mt19937_64 rng(42);
    const int reps = 5;
    {
        const Tensor x = random_tensor({32, 768}, rng), w = random_tensor({256, 768}, rng);
        const Tensor b = random_tensor({256}, rng);
        Tensor s, p;
        const double ts = millis([&] { s = kernels::serial::linear(x, w, b.span()); }, reps);
        const double tp = millis([&] { p = kernels::linear(x, w, b.span()); }, reps);
        row("linear 32x768 -> 256", ts, tp, max_diff(s, p));
    }
    {
        const Tensor x = random_tensor({32, 768}, rng), w = random_tensor({1024, 768}, rng);
        Tensor s, p;
        const double ts = millis([&] { s = kernels::serial::linear(x, w, {}); }, reps);
        const double tp = millis([&] { p = kernels::linear(x, w, {}); }, reps);
        row("linear 32x768 -> 1024", ts, tp, max_diff(s, p));
    }
    {
        const Tensor g = random_tensor({32, 1024}, rng), w = random_tensor({1024, 768}, rng);
        Tensor s, p;
        const double ts = millis([&] { s = kernels::serial::matmul(g, w); }, reps);
        const double tp = millis([&] { p = kernels::matmul(g, w); }, reps);
        row("matmul 32x1024 . 1024x768", ts, tp, max_diff(s, p));
    }
    {
        const Tensor g = random_tensor({32, 1024}, rng), x = random_tensor({32, 768}, rng);
        Tensor s, p;
        const double ts = millis([&] { s = kernels::serial::matmul_transposed_lhs(g, x); }, reps);
        const double tp = millis([&] { p = kernels::matmul_transposed_lhs(g, x); }, reps);
        row("weight grad 1024x768", ts, tp, max_diff(s, p));
    }
    {
        const Tensor x = random_tensor({256, 256}, rng);
        Tensor s, p;
        const double ts = millis([&] { s = kernels::serial::dft_magnitude_rows(x); }, reps);
        const double tp = millis([&] { p = kernels::dft_magnitude_rows(x); }, reps);
        row("|FFT| 256 rows x 256", ts, tp, max_diff(s, p));
    }
    {
        const Tensor x = random_tensor({256, 200}, rng);
        Tensor s, p;
        const double ts = millis([&] { s = kernels::serial::dft_magnitude_rows(x); }, reps);
        const double tp = millis([&] { p = kernels::dft_magnitude_rows(x); }, reps);
        row("|DFT| 256 rows x 200", ts, tp, max_diff(s, p));
    }
    {
        std::vector<KnowledgeEntry> entries;
        for (int i = 0; i < 5000; ++i) {
            const Tensor e = random_tensor({256}, rng);
            entries.push_back({"e" + std::to_string(i), "", e.values()});
        }
        const qrag::KnowledgeIndex kb(std::move(entries));
        const auto q = qrag::QuantumState::from_features(random_tensor({256}, rng).values());
        Vector s, p;
        const double ts = millis([&] { s = qrag::serial::similarity_scan(q, kb, qrag::Similarity::Fidelity); }, reps);
        const double tp = millis([&] { p = qrag::similarity_scan(q, kb, qrag::Similarity::Fidelity); }, reps);
        double d = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) d = std::max(d, std::abs(s[i] - p[i]));
        row("fidelity scan 5000 x 256", ts, tp, d);
    }
    return 0;
}
