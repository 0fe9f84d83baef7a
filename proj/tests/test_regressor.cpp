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

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "masksel/metrics.hpp"
#include "masksel/regressor.hpp"
#include "masksel/rng.hpp"

using namespace masksel;

namespace {

FeatureVector random_features(Rng& rng) {
    FeatureVector f{};
    f[0] = 1.0;
    for (std::size_t i = 1; i < kFeatureCount; ++i) f[i] = rng.uniform();
    return f;
}

// Noiseless data generated from known weights: true_iou = (w*.x)^2, so the
// sqrt-transformed regression is exactly realisable.
std::vector<RegressorSample> sqrt_model_data(Rng& rng, std::size_t n,
                                             const std::array<double, kFeatureCount>& w_star) {
    std::vector<RegressorSample> samples(n);
    for (auto& s : samples) {
        s.features = random_features(rng);
        double raw = 0.0;
        for (std::size_t i = 0; i < kFeatureCount; ++i) raw += w_star[i] * s.features[i];
        s.true_iou = raw * raw;
    }
    return samples;
}

InstancePrediction prediction_with_mask(const Raster& raster) {
    InstancePrediction pred;
    pred.mask = encode_rle(raster);
    pred.confidence = 0.5;
    return pred;
}

}  // namespace

TEST_CASE("extract_features on the full-image mask", "[regressor]") {
    Raster full(10, 12);
    for (auto& px : full.px) px = 1;
    ImageContext ctx{12, 10, 3, 0.4};
    const FeatureVector f = extract_features(ctx, prediction_with_mask(full));
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 1.0);  // normalized area
    CHECK(f[2] == 0.3);  // 3 objects / 10

    const FeatureVector again = extract_features(ctx, prediction_with_mask(full));
    CHECK(f == again);

    Raster empty(4, 4);
    InstancePrediction degenerate;
    degenerate.mask = encode_rle(empty);
    CHECK_THROWS_AS(extract_features(ctx, degenerate), std::invalid_argument);
}

TEST_CASE("extract_features matches an independent recomputation", "[regressor]") {
    Rng rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        const int h = 4 + static_cast<int>(rng.below(12));
        const int w = 4 + static_cast<int>(rng.below(12));
        Raster raster(h, w);
        for (auto& px : raster.px) px = rng.uniform() < 0.5 ? 1 : 0;
        raster.px[rng.below(raster.px.size())] = 1;
        ImageContext ctx{w, h, 1 + static_cast<int>(rng.below(12)), 0.01 + 0.3 * rng.uniform()};
        const FeatureVector f = extract_features(ctx, prediction_with_mask(raster));

        // Straight-line pixel recomputation.
        double area = 0, perimeter = 0, boundary = 0;
        const auto fg = [&](int r, int c) {
            return r >= 0 && r < h && c >= 0 && c < w && raster.at(r, c) != 0;
        };
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                if (!raster.at(r, c)) continue;
                area += 1;
                int open_sides = 0;
                if (!fg(r - 1, c)) ++open_sides;
                if (!fg(r + 1, c)) ++open_sides;
                if (!fg(r, c - 1)) ++open_sides;
                if (!fg(r, c + 1)) ++open_sides;
                perimeter += open_sides;
                if (open_sides > 0) boundary += 1;
            }
        REQUIRE(f[0] == 1.0);
        REQUIRE_THAT(f[1], Catch::Matchers::WithinAbs(area / (w * h), 1e-12));
        REQUIRE_THAT(f[2], Catch::Matchers::WithinAbs(std::min(ctx.object_count, 10) / 10.0, 1e-12));
        REQUIRE_THAT(f[3],
                     Catch::Matchers::WithinAbs(std::min(perimeter * perimeter / area, 160.0) / 160.0,
                                                1e-12));
        REQUIRE_THAT(f[4], Catch::Matchers::WithinAbs(boundary / area, 1e-12));
        REQUIRE_THAT(f[5], Catch::Matchers::WithinAbs(
                               std::min(1.0, 0.08 * ctx.object_count /
                                                 (4.0 * ctx.mean_area_fraction + 0.2)),
                               1e-12));
    }
}

TEST_CASE("predict_iou clamps and squares", "[regressor]") {
    RegressorModel model;
    model.transform = TargetTransform::identity;
    FeatureVector f{};
    f[0] = 1.0;
    CHECK(predict_iou(model, f) == 0.0);  // zero weights

    model.weights[0] = 0.5;
    model.transform = TargetTransform::sqrt;
    CHECK(predict_iou(model, f) == 0.25);  // raw 0.5 -> 0.25

    model.weights[0] = 3.0;  // raw > 1 clamps to 1
    CHECK(predict_iou(model, f) == 1.0);
    model.transform = TargetTransform::identity;
    CHECK(predict_iou(model, f) == 1.0);

    model.weights[0] = -2.0;
    CHECK(predict_iou(model, f) == 0.0);

    Rng rng(103);
    for (int trial = 0; trial < 200; ++trial) {
        RegressorModel m;
        for (auto& w : m.weights) w = 4.0 * rng.uniform() - 2.0;
        m.transform = rng.below(2) ? TargetTransform::sqrt : TargetTransform::identity;
        const double out = predict_iou(m, random_features(rng));
        REQUIRE(out >= 0.0);
        REQUIRE(out <= 1.0);
    }
}

TEST_CASE("single sample trains to its target", "[regressor]") {
    std::vector<RegressorSample> samples(1);
    samples[0].features = FeatureVector{1, 0, 0, 0, 0, 0};
    samples[0].true_iou = 0.42;

    TrainingSchedule schedule;
    schedule.iou_phase_epochs = 400;
    schedule.learning_rate = 0.1;
    schedule.lr_halving_every = 40;
    schedule.seed = 5;
    const TrainedRegressor trained =
        train_regressor(samples, schedule, TargetTransform::identity);
    CHECK_THAT(predict_iou(trained.model, samples[0].features),
               Catch::Matchers::WithinAbs(0.42, 1e-3));
    CHECK(trained.epoch_loss.size() == 400);

    CHECK_THROWS_AS(train_regressor({}, schedule, TargetTransform::identity),
                    std::invalid_argument);
}

TEST_CASE("noiseless sqrt-model recovery within 0.5 percentage points", "[regressor]") {
    Rng rng(107);
    const std::array<double, kFeatureCount> w_star = {0.10, 0.30, 0.20, 0.15, 0.10, 0.10};
    const auto samples = sqrt_model_data(rng, 300, w_star);

    TrainingSchedule schedule;
    schedule.iou_phase_epochs = 300;
    schedule.learning_rate = 0.02;
    schedule.lr_halving_every = 40;
    schedule.seed = 7;
    const TrainedRegressor trained = train_regressor(samples, schedule, TargetTransform::sqrt);
    CHECK(evaluate_mae(trained.model, samples) <= 0.5);
}

TEST_CASE("subgradient matches central finite differences", "[regressor]") {
    Rng rng(109);
    const double h = 1e-6;
    int checked = 0;
    while (checked < 100) {
        std::array<double, kFeatureCount> w{};
        for (auto& wi : w) wi = 2.0 * rng.uniform() - 1.0;
        std::vector<RegressorSample> samples(10);
        for (auto& s : samples) {
            s.features = random_features(rng);
            s.true_iou = rng.uniform();
        }
        const auto transform = rng.below(2) ? TargetTransform::sqrt : TargetTransform::identity;

        // Keep a margin to the nearest kink so the point is differentiable
        // and no kink is crossed inside the finite-difference stencil.
        bool differentiable = true;
        for (const auto& s : samples) {
            double raw = 0.0;
            for (std::size_t i = 0; i < kFeatureCount; ++i) raw += w[i] * s.features[i];
            if (std::fabs(raw - transform_target(s.true_iou, transform)) < 1e-4)
                differentiable = false;
        }
        if (!differentiable) continue;

        const auto analytic = l1_subgradient(w, samples, transform);
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            auto wp = w, wm = w;
            wp[i] += h;
            wm[i] -= h;
            const double fd =
                (l1_loss(wp, samples, transform) - l1_loss(wm, samples, transform)) / (2.0 * h);
            const double scale = std::max(std::fabs(analytic[i]), 1e-3);
            REQUIRE(std::fabs(fd - analytic[i]) / scale <= 1e-5);
        }
        ++checked;
    }
}

TEST_CASE("full-batch training loss is non-increasing", "[regressor]") {
    Rng rng(113);
    std::vector<RegressorSample> samples(30);
    for (auto& s : samples) {
        s.features = random_features(rng);
        s.true_iou = rng.uniform();
    }
    TrainingSchedule schedule;
    schedule.batch = BatchMode::full_batch;
    schedule.iou_phase_epochs = 300;
    schedule.learning_rate = 1e-3;
    schedule.seed = 1;
    const TrainedRegressor trained = train_regressor(samples, schedule, TargetTransform::sqrt);
    for (std::size_t e = 1; e < trained.epoch_loss.size(); ++e)
        REQUIRE(trained.epoch_loss[e] <= trained.epoch_loss[e - 1] + 1e-9);
}

TEST_CASE("sqrt transform beats identity on a low-IoU-heavy distribution", "[regressor]") {
    Rng rng(127);
    const std::array<double, kFeatureCount> w_star = {0.05, 0.25, 0.25, 0.15, 0.15, 0.10};
    const auto samples = sqrt_model_data(rng, 400, w_star);

    TrainingSchedule schedule;
    schedule.iou_phase_epochs = 250;
    schedule.learning_rate = 0.02;
    schedule.lr_halving_every = 40;
    schedule.seed = 11;
    const TrainedRegressor with_sqrt = train_regressor(samples, schedule, TargetTransform::sqrt);
    const TrainedRegressor with_identity =
        train_regressor(samples, schedule, TargetTransform::identity);
    CHECK(evaluate_mae(with_sqrt.model, samples) <= evaluate_mae(with_identity.model, samples));
}

TEST_CASE("training is deterministic", "[regressor]") {
    Rng rng(131);
    std::vector<RegressorSample> samples(50);
    for (auto& s : samples) {
        s.features = random_features(rng);
        s.true_iou = rng.uniform();
    }
    TrainingSchedule schedule;
    schedule.iou_phase_epochs = 50;
    schedule.learning_rate = 0.01;
    schedule.seed = 17;
    const auto a = train_regressor(samples, schedule, TargetTransform::sqrt);
    const auto b = train_regressor(samples, schedule, TargetTransform::sqrt);
    CHECK(a.model.weights == b.model.weights);
    CHECK(a.epoch_loss == b.epoch_loss);

    // Joint schedules cover both phases.
    TrainingSchedule joint = schedule;
    joint.phase = TrainingPhase::joint;
    joint.segmentation_phase_epochs = 30;
    CHECK(train_regressor(samples, joint, TargetTransform::sqrt).epoch_loss.size() == 80);
}

TEST_CASE("evaluate_mae basics and cross-module agreement", "[regressor]") {
    RegressorModel constant_half;
    constant_half.transform = TargetTransform::identity;
    constant_half.weights[0] = 0.5;
    std::vector<RegressorSample> extremes(2);
    extremes[0].features = FeatureVector{1, 0, 0, 0, 0, 0};
    extremes[0].true_iou = 0.0;
    extremes[1].features = FeatureVector{1, 0, 0, 0, 0, 0};
    extremes[1].true_iou = 1.0;
    CHECK(evaluate_mae(constant_half, extremes) == 50.0);

    RegressorModel exact;
    exact.transform = TargetTransform::identity;
    exact.weights[0] = 1.0;
    std::vector<RegressorSample> ones(3);
    for (auto& s : ones) {
        s.features = FeatureVector{1, 0, 0, 0, 0, 0};
        s.true_iou = 1.0;
    }
    CHECK(evaluate_mae(exact, ones) == 0.0);
    CHECK_THROWS_AS(evaluate_mae(exact, {}), std::invalid_argument);

    // One sample per image: evaluate_mae must agree with metrics::mae_iou.
    Rng rng(137);
    RegressorModel model;
    for (auto& w : model.weights) w = rng.uniform();
    std::vector<RegressorSample> samples(40);
    std::map<ImageId, double> predicted, truth;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i].features = random_features(rng);
        samples[i].true_iou = rng.uniform();
        predicted[i] = predict_iou(model, samples[i].features);
        truth[i] = samples[i].true_iou;
    }
    REQUIRE_THAT(evaluate_mae(model, samples),
                 Catch::Matchers::WithinAbs(mae_iou(predicted, truth), 1e-12));
}
