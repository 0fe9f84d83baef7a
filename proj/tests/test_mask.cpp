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

#include <catch2/catch_amalgamated.hpp>

#include "masksel/mask.hpp"
#include "masksel/rng.hpp"

using namespace masksel;

namespace {

Raster random_raster(Rng& rng, int h, int w, double p_fg) {
    Raster raster(h, w);
    for (auto& px : raster.px) px = rng.uniform() < p_fg ? 1 : 0;
    return raster;
}

// Dense pixel-enumeration oracle, independent of the run-list walk.
double dense_iou(const Raster& a, const Raster& b) {
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.px.size(); ++i) {
        if (a.px[i] && b.px[i]) ++inter;
        if (a.px[i] || b.px[i]) ++uni;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask from_rows(const std::vector<std::string>& rows) {
    Raster raster(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < raster.height; ++r)
        for (int c = 0; c < raster.width; ++c) raster.at(r, c) = rows[r][c] == '#' ? 1 : 0;
    return encode_rle(raster);
}

}  // namespace

TEST_CASE("encode_rle canonical forms", "[mask]") {
    Raster all_false(2, 2);
    CHECK(encode_rle(all_false).runs == std::vector<std::uint64_t>{4});

    Raster all_true(2, 2);
    for (auto& px : all_true.px) px = 1;
    CHECK(encode_rle(all_true).runs == std::vector<std::uint64_t>{0, 4});

    CHECK_THROWS_AS(encode_rle(Raster{}), std::invalid_argument);
}

TEST_CASE("encode/decode round-trips 1000 random 8x8 rasters", "[mask]") {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const Raster raster = random_raster(rng, 8, 8, rng.uniform());
        const BinaryMask mask = encode_rle(raster);
        mask.validate();
        const Raster back = decode_rle(mask);
        REQUIRE(back.px == raster.px);
    }
}

TEST_CASE("mask invariants are enforced", "[mask]") {
    BinaryMask bad;
    bad.height = 2;
    bad.width = 2;
    bad.runs = {1, 0, 3};  // zero run after the first
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.runs = {1, 2};  // does not cover the raster
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.runs = {0, 4};
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("iou basic cases", "[mask]") {
    const BinaryMask a = from_rows({"##..", "##..", "....", "...."});
    const BinaryMask shifted = from_rows({".##.", ".##.", "....", "...."});
    const BinaryMask disjoint = from_rows({"....", "....", "..##", "..##"});

    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, disjoint) == 0.0);
    // |A|=4, |B|=4, |A∩B|=2 -> 2/6
    CHECK_THAT(iou(a, shifted), Catch::Matchers::WithinAbs(2.0 / 6.0, 1e-15));

    BinaryMask other_size = from_rows({"##", "##"});
    CHECK_THROWS_AS(iou(a, other_size), std::invalid_argument);

    const BinaryMask empty1 = from_rows({"..", ".."});
    const BinaryMask empty2 = from_rows({"..", ".."});
    CHECK(iou(empty1, empty2) == 0.0);
}

TEST_CASE("RLE iou equals dense pixel oracle on random pairs", "[mask]") {
    Rng rng(29);
    for (int trial = 0; trial < 1000; ++trial) {
        const int h = 1 + static_cast<int>(rng.below(16));
        const int w = 1 + static_cast<int>(rng.below(16));
        const Raster ra = random_raster(rng, h, w, rng.uniform());
        const Raster rb = random_raster(rng, h, w, rng.uniform());
        const BinaryMask a = encode_rle(ra);
        const BinaryMask b = encode_rle(rb);

        std::int64_t dense_area = 0, dense_inter = 0;
        for (std::size_t i = 0; i < ra.px.size(); ++i) {
            dense_area += ra.px[i];
            dense_inter += (ra.px[i] && rb.px[i]) ? 1 : 0;
        }
        REQUIRE(a.area() == dense_area);
        REQUIRE(intersection_area(a, b) == dense_inter);
        REQUIRE(iou(a, b) == dense_iou(ra, rb));
    }
}

TEST_CASE("iou is symmetric", "[mask]") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const Raster ra = random_raster(rng, 9, 7, 0.4);
        const Raster rb = random_raster(rng, 9, 7, 0.6);
        const BinaryMask a = encode_rle(ra), b = encode_rle(rb);
        REQUIRE(iou(a, b) == iou(b, a));
    }
}

TEST_CASE("image_iou_score basics", "[mask]") {
    CHECK(image_iou_score(std::vector<double>{0.4, 0.6}) == 0.5);
    CHECK(image_iou_score(std::vector<double>{0.7}) == 0.7);
    CHECK_THROWS_AS(image_iou_score(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(image_iou_score(std::vector<double>{1.2}), std::invalid_argument);
}

TEST_CASE("image_iou_score matches independent mean and stays in range", "[mask]") {
    Rng rng(37);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values(1 + rng.below(12));
        for (auto& v : values) v = rng.uniform();
        const double score = image_iou_score(values);

        long double sum = 0.0L;  // reverse-order long double accumulation
        for (auto it = values.rbegin(); it != values.rend(); ++it) sum += *it;
        const double expected = static_cast<double>(sum / values.size());
        REQUIRE_THAT(score, Catch::Matchers::WithinAbs(expected, 1e-12));

        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        REQUIRE(score >= *lo - 1e-12);
        REQUIRE(score <= *hi + 1e-12);
    }
}
