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

#include <algorithm>
#include <cmath>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "masksel/rng.hpp"
#include "masksel/selection.hpp"

using namespace masksel;

namespace {

ScoredPool random_pool(Rng& rng, std::size_t n) {
    ScoredPool pool;
    while (pool.entries.size() < n) pool.entries[rng.below(100000)] = rng.uniform();
    return pool;
}

// Independent oracle: full stable sort of (distance, id) pairs.
std::vector<ImageId> brute_force_beta(const ScoredPool& pool, double beta, std::size_t n) {
    std::vector<std::pair<double, ImageId>> entries;
    for (const auto& [id, score] : pool.entries) entries.emplace_back(std::fabs(score - beta), id);
    std::stable_sort(entries.begin(), entries.end());
    std::vector<ImageId> out;
    for (std::size_t i = 0; i < std::min(n, entries.size()); ++i) out.push_back(entries[i].second);
    return out;
}

}  // namespace

TEST_CASE("select_by_beta picks the closest scores", "[selection]") {
    ScoredPool pool;
    pool.entries = {{0, 0.1}, {1, 0.5}, {2, 0.9}};
    CHECK(select_by_beta(pool, 0.4, 1) == std::vector<ImageId>{1});

    pool.entries = {{0, 0.1}, {1, 0.5}, {2, 0.9}, {3, 0.05}};
    CHECK(select_by_beta(pool, 0.0, 2) == std::vector<ImageId>{3, 0});

    CHECK_THROWS_AS(select_by_beta(ScoredPool{}, 0.5, 1), std::invalid_argument);
}

TEST_CASE("select_by_beta equals brute-force sort on random pools", "[selection]") {
    Rng rng(53);
    for (int trial = 0; trial < 1000; ++trial) {
        const ScoredPool pool = random_pool(rng, 1 + rng.below(100));
        const double beta = trial == 0 ? 0.37 : rng.uniform();
        const std::size_t n = 1 + rng.below(pool.entries.size() + 3);
        REQUIRE(select_by_beta(pool, beta, n) == brute_force_beta(pool, beta, n));
    }
}

TEST_CASE("distance_ranking exposes the full ordering", "[selection]") {
    ScoredPool single;
    single.entries = {{7, 0.8}};
    const auto ranked = distance_ranking(single, 0.5);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].first == 7);
    CHECK_THAT(ranked[0].second, Catch::Matchers::WithinAbs(0.3, 1e-15));

    ScoredPool pool;
    pool.entries = {{0, 0.2}, {1, 0.6}, {2, 0.4}};
    const auto hit = distance_ranking(pool, 0.6);
    CHECK(hit[0].first == 1);
    CHECK(hit[0].second == 0.0);

    Rng rng(59);
    for (int trial = 0; trial < 200; ++trial) {
        const ScoredPool p = random_pool(rng, 1 + rng.below(40));
        const double beta = rng.uniform();
        const auto full = distance_ranking(p, beta);
        const auto oracle = brute_force_beta(p, beta, p.entries.size());
        REQUIRE(full.size() == oracle.size());
        for (std::size_t i = 0; i < full.size(); ++i) REQUIRE(full[i].first == oracle[i]);
        for (std::size_t i = 1; i < full.size(); ++i) REQUIRE(full[i].second >= full[i - 1].second);
    }
}

TEST_CASE("select_by_beta extremes and set properties", "[selection]") {
    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const ScoredPool pool = random_pool(rng, 20);
        const std::size_t n = 5;

        std::vector<std::pair<double, ImageId>> by_score;
        for (const auto& [id, score] : pool.entries) by_score.emplace_back(score, id);
        std::sort(by_score.begin(), by_score.end());

        const auto lowest = select_by_beta(pool, 0.0, n);
        std::set<ImageId> expected_low;
        for (std::size_t i = 0; i < n; ++i) expected_low.insert(by_score[i].second);
        CHECK(std::set<ImageId>(lowest.begin(), lowest.end()) == expected_low);

        const auto highest = select_by_beta(pool, 1.0, n);
        std::set<ImageId> expected_high;
        for (std::size_t i = 0; i < n; ++i) expected_high.insert(by_score[by_score.size() - 1 - i].second);
        CHECK(std::set<ImageId>(highest.begin(), highest.end()) == expected_high);

        const auto any = select_by_beta(pool, rng.uniform(), n);
        std::set<ImageId> unique(any.begin(), any.end());
        REQUIRE(unique.size() == any.size());
        for (const ImageId id : any) REQUIRE(pool.entries.count(id) == 1);
    }
}

TEST_CASE("select_random is deterministic and covers the pool", "[selection]") {
    std::vector<ImageId> ids = {5, 1, 9, 3, 7};
    const auto all = select_random(ids, 10, 123);
    REQUIRE(all.size() == 5);
    std::vector<ImageId> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<ImageId>{1, 3, 5, 7, 9});

    CHECK(select_random(ids, 3, 99) == select_random(ids, 3, 99));
    CHECK_THROWS_AS(select_random({}, 1, 0), std::invalid_argument);

    // Pool order must not matter.
    std::vector<ImageId> shuffled = {9, 7, 5, 3, 1};
    CHECK(select_random(ids, 3, 42) == select_random(shuffled, 3, 42));
}

TEST_CASE("select_random inclusion frequencies pass a 3-sigma binomial check", "[selection]") {
    const std::size_t pool_size = 20, n_prime = 5, trials = 10000;
    std::vector<ImageId> ids(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) ids[i] = i;
    std::vector<int> counts(pool_size, 0);
    for (std::size_t t = 0; t < trials; ++t)
        for (const ImageId id : select_random(ids, n_prime, 1000 + t)) ++counts[id];

    const double p = static_cast<double>(n_prime) / pool_size;
    const double mean = trials * p;
    const double sigma = std::sqrt(trials * p * (1.0 - p));
    for (const int c : counts) {
        REQUIRE(c > mean - 3.0 * sigma);
        REQUIRE(c < mean + 3.0 * sigma);
    }
}
