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
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "masksel/mask.hpp"
#include "masksel/morphology.hpp"
#include "masksel/rng.hpp"

namespace masksel {

inline constexpr std::size_t kFeatureCount = 6;

/// [bias, normalized mask area, normalized object count, mask compactness
/// (perimeter^2/area, normalized), mean boundary-noise estimate, image
/// clutter index]
using FeatureVector = std::array<double, kFeatureCount>;

enum class TargetTransform { identity, sqrt };

struct RegressorModel {
    std::array<double, kFeatureCount> weights{};
    TargetTransform transform = TargetTransform::sqrt;
};

enum class TrainingPhase { joint, frozen_then_iou };
enum class BatchMode { stochastic, full_batch };

/// Mirrors the two-phase schedule: the segmentation phase runs for
/// segmentation_phase_epochs, the IoU head for iou_phase_epochs after it.
/// Under frozen_then_iou only the IoU phase trains this regressor; under
/// joint it trains across both phases (on noisier inputs, see pipeline).
struct TrainingSchedule {
    TrainingPhase phase = TrainingPhase::frozen_then_iou;
    int segmentation_phase_epochs = 150;
    int iou_phase_epochs = 100;
    double learning_rate = 0.02;
    int lr_halving_every = 0;  // epochs between halvings; 0 disables
    BatchMode batch = BatchMode::stochastic;
    std::uint64_t seed = 0;

    void validate() const {
        if (segmentation_phase_epochs < 1 || iou_phase_epochs < 1)
            throw std::invalid_argument("TrainingSchedule: epochs must be >= 1");
        if (!(learning_rate > 0.0))
            throw std::invalid_argument("TrainingSchedule: learning rate must be positive");
    }

    int regressor_epochs() const {
        return phase == TrainingPhase::joint ? segmentation_phase_epochs + iou_phase_epochs
                                             : iou_phase_epochs;
    }
};

struct RegressorSample {
    FeatureVector features{};
    double true_iou = 0.0;
};

/// Per-image context needed alongside a single prediction.
struct ImageContext {
    int width = 0;
    int height = 0;
    int object_count = 0;
    double mean_area_fraction = 0.0;
};

inline FeatureVector extract_features(const ImageContext& stats,
                                      const InstancePrediction& prediction) {
    const std::int64_t area = prediction.mask.area();
    if (area < 1) throw std::invalid_argument("extract_features: empty mask");
    const Raster raster = decode_rle(prediction.mask);
    const double perimeter = static_cast<double>(perimeter_edge_count(raster));
    const double boundary = static_cast<double>(boundary_pixel_count(raster));
    const double pixels = static_cast<double>(stats.width) * static_cast<double>(stats.height);

    FeatureVector f{};
    f[0] = 1.0;
    f[1] = static_cast<double>(area) / pixels;
    f[2] = std::min(stats.object_count, 10) / 10.0;
    f[3] = std::min(perimeter * perimeter / static_cast<double>(area), 160.0) / 160.0;
    f[4] = boundary / static_cast<double>(area);
    f[5] = std::min(1.0, 0.08 * stats.object_count / (4.0 * stats.mean_area_fraction + 0.2));
    return f;
}

inline double transform_target(double value, TargetTransform transform) {
    return transform == TargetTransform::sqrt ? std::sqrt(value) : value;
}

/// Raw linear response clamped to [0,1]; under the sqrt transform the model
/// regresses sqrt(IoU), so the clamped response is squared back.
inline double predict_iou(const RegressorModel& model, const FeatureVector& features) {
    double raw = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) raw += model.weights[i] * features[i];
    raw = std::clamp(raw, 0.0, 1.0);
    return model.transform == TargetTransform::sqrt ? raw * raw : raw;
}

inline double l1_loss(const std::array<double, kFeatureCount>& weights,
                      const std::vector<RegressorSample>& samples, TargetTransform transform) {
    if (samples.empty()) throw std::invalid_argument("l1_loss: no samples");
    double sum = 0.0;
    for (const RegressorSample& s : samples) {
        double raw = 0.0;
        for (std::size_t i = 0; i < kFeatureCount; ++i) raw += weights[i] * s.features[i];
        sum += std::abs(raw - transform_target(s.true_iou, transform));
    }
    return sum / static_cast<double>(samples.size());
}

/// Full-batch subgradient of the mean L1 loss; sign(0) taken as 0.
inline std::array<double, kFeatureCount> l1_subgradient(
    const std::array<double, kFeatureCount>& weights,
    const std::vector<RegressorSample>& samples, TargetTransform transform) {
    if (samples.empty()) throw std::invalid_argument("l1_subgradient: no samples");
    std::array<double, kFeatureCount> grad{};
    for (const RegressorSample& s : samples) {
        double raw = 0.0;
        for (std::size_t i = 0; i < kFeatureCount; ++i) raw += weights[i] * s.features[i];
        const double residual = raw - transform_target(s.true_iou, transform);
        const double sign = residual > 0.0 ? 1.0 : (residual < 0.0 ? -1.0 : 0.0);
        for (std::size_t i = 0; i < kFeatureCount; ++i) grad[i] += sign * s.features[i];
    }
    for (double& g : grad) g /= static_cast<double>(samples.size());
    return grad;
}

struct TrainedRegressor {
    RegressorModel model;
    std::vector<double> epoch_loss;  // mean L1 loss after each epoch
};

/// Seeded (sub)gradient descent on mean |w.x - T(true_iou)|.
inline TrainedRegressor train_regressor(const std::vector<RegressorSample>& samples,
                                        const TrainingSchedule& schedule,
                                        TargetTransform transform) {
    if (samples.empty()) throw std::invalid_argument("train_regressor: no samples");
    for (const RegressorSample& s : samples)
        if (!(s.true_iou >= 0.0 && s.true_iou <= 1.0))
            throw std::invalid_argument("train_regressor: true_iou outside [0,1]");
    schedule.validate();

    TrainedRegressor result;
    result.model.transform = transform;
    std::array<double, kFeatureCount>& w = result.model.weights;

    Rng rng(schedule.seed);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    double lr = schedule.learning_rate;
    const int epochs = schedule.regressor_epochs();
    for (int epoch = 0; epoch < epochs; ++epoch) {
        if (schedule.lr_halving_every > 0 && epoch > 0 && epoch % schedule.lr_halving_every == 0)
            lr *= 0.5;
        if (schedule.batch == BatchMode::full_batch) {
            const auto grad = l1_subgradient(w, samples, transform);
            for (std::size_t i = 0; i < kFeatureCount; ++i) w[i] -= lr * grad[i];
        } else {
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
                std::swap(order[i], order[j]);
            }
            for (const std::size_t idx : order) {
                const RegressorSample& s = samples[idx];
                double raw = 0.0;
                for (std::size_t i = 0; i < kFeatureCount; ++i) raw += w[i] * s.features[i];
                const double residual = raw - transform_target(s.true_iou, transform);
                const double sign = residual > 0.0 ? 1.0 : (residual < 0.0 ? -1.0 : 0.0);
                for (std::size_t i = 0; i < kFeatureCount; ++i) w[i] -= lr * sign * s.features[i];
            }
        }
        result.epoch_loss.push_back(l1_loss(w, samples, transform));
    }
    return result;
}

/// MAE in percentage points, measured on IoU itself (after undoing the
/// target transform), not on the transformed target.
inline double evaluate_mae(const RegressorModel& model,
                           const std::vector<RegressorSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("evaluate_mae: no samples");
    double sum = 0.0;
    for (const RegressorSample& s : samples)
        sum += std::abs(predict_iou(model, s.features) - s.true_iou);
    return 100.0 * sum / static_cast<double>(samples.size());
}

}  // namespace masksel
