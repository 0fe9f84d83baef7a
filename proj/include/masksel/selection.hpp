// Copyright 2026 The masksel authors
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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "masksel/mask.hpp"
#include "masksel/rng.hpp"

namespace masksel {

/// Candidate images with their per-image IoU Scores.
struct ScoredPool {
    std::map<ImageId, double> entries;

    void validate() const {
        for (const auto& [id, score] : entries)
            if (!(score >= 0.0 && score <= 1.0))
                throw std::invalid_argument("ScoredPool: score outside [0,1]");
    }
};

enum class SelectionStrategy { random, beta_proximity };

struct SelectionConfig {
    SelectionStrategy strategy = SelectionStrategy::beta_proximity;
    double beta = 0.5;          // beta_proximity only
    std::size_t n_prime = 1;    // number of images to select
    std::uint64_t seed = 0;     // random only

    void validate() const {
        if (strategy == SelectionStrategy::beta_proximity && !(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("SelectionConfig: beta outside [0,1]");
        if (n_prime < 1) throw std::invalid_argument("SelectionConfig: n_prime must be >= 1");
    }
};

/// All pool entries sorted by ascending |score - beta|, ties by ascending id.
inline std::vector<std::pair<ImageId, double>> distance_ranking(const ScoredPool& pool,
                                                                double beta) {
    if (pool.entries.empty()) throw std::invalid_argument("distance_ranking: empty pool");
    std::vector<std::pair<ImageId, double>> ranked;
    ranked.reserve(pool.entries.size());
    for (const auto& [id, score] : pool.entries) ranked.emplace_back(id, std::abs(score - beta));
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    return ranked;
}

/// The min(n_prime, |pool|) images whose scores are closest to beta.
inline std::vector<ImageId> select_by_beta(const ScoredPool& pool, double beta,
                                           std::size_t n_prime) {
    const auto ranked = distance_ranking(pool, beta);
    const std::size_t n = std::min(n_prime, ranked.size());
    std::vector<ImageId> selected;
    selected.reserve(n);
    for (std::size_t i = 0; i < n; ++i) selected.push_back(ranked[i].first);
    return selected;
}

/// Seeded uniform sample without replacement. The pool is canonicalised by
/// sorting so the result depends only on (id set, n_prime, seed).
inline std::vector<ImageId> select_random(std::vector<ImageId> ids, std::size_t n_prime,
                                          std::uint64_t seed) {
    if (ids.empty()) throw std::invalid_argument("select_random: empty pool");
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    const std::size_t n = std::min(n_prime, ids.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(ids.size() - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(n);
    return ids;
}

}  // namespace masksel
