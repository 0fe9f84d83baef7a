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
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "masksel/mask.hpp"

namespace masksel {

struct PredictionMatch {
    bool is_tp = false;
    std::optional<std::size_t> matched_truth;  // index into the image's truth list
};

/// Per-image matching outcome, index-aligned with the input predictions.
struct MatchResult {
    ImageId image_id = 0;
    std::vector<PredictionMatch> matches;
};

struct MetricReport {
    std::map<int, double> per_class_ap;
    double mean_ap = 0.0;
    std::optional<double> mae_iou;  // percentage points
};

/// Greedy matching behind AP: predictions are processed in descending
/// confidence (ties keep input order) and claim the unmatched same-class
/// ground truth with the highest IoU, provided that IoU reaches the
/// threshold. IoU ties go to the lowest truth index.
inline MatchResult match_instances(const std::vector<InstancePrediction>& predictions,
                                   const std::vector<InstanceAnnotation>& truths,
                                   double iou_threshold, ImageId image_id = 0) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw std::invalid_argument("match_instances: threshold outside (0,1]");
    MatchResult result;
    result.image_id = image_id;
    result.matches.resize(predictions.size());

    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].confidence > predictions[b].confidence;
    });

    std::vector<bool> truth_taken(truths.size(), false);
    for (const std::size_t pi : order) {
        const InstancePrediction& pred = predictions[pi];
        double best_iou = 0.0;
        std::optional<std::size_t> best_truth;
        for (std::size_t ti = 0; ti < truths.size(); ++ti) {
            if (truth_taken[ti] || truths[ti].class_id != pred.class_id) continue;
            const double overlap = iou(pred.mask, truths[ti].mask);
            if (overlap > best_iou) {
                best_iou = overlap;
                best_truth = ti;
            }
        }
        if (best_truth && best_iou >= iou_threshold) {
            truth_taken[*best_truth] = true;
            result.matches[pi] = {true, best_truth};
        }
    }
    return result;
}

namespace detail {

struct RankedPrediction {
    double confidence = 0.0;
    ImageId image_id = 0;
    std::size_t input_index = 0;
    bool is_tp = false;
};

// Area under the precision-recall curve with the all-points monotone
// envelope: AP = sum over TP ranks of (1/n_gt) * max precision at recall >= r.
inline double average_precision(std::vector<RankedPrediction> ranked, std::int64_t num_truths) {
    std::sort(ranked.begin(), ranked.end(), [](const RankedPrediction& a,
                                               const RankedPrediction& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.input_index < b.input_index;
    });
    std::vector<double> precision_at_tp;  // precision at each recall step
    std::int64_t tp = 0, fp = 0;
    for (const RankedPrediction& p : ranked) {
        if (p.is_tp) {
            ++tp;
            precision_at_tp.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        } else {
            ++fp;
        }
    }
    // Monotone envelope from the right.
    double running_max = 0.0;
    double sum = 0.0;
    for (auto it = precision_at_tp.rbegin(); it != precision_at_tp.rend(); ++it) {
        running_max = std::max(running_max, *it);
        sum += running_max;
    }
    return sum / static_cast<double>(num_truths);
}

}  // namespace detail

/// Dataset-level mean Average Precision at one IoU threshold. Per class, all
/// predictions are ranked globally by (confidence desc, image id, input
/// index); AP uses all-points interpolation; the mean covers classes with at
/// least one ground-truth instance.
inline MetricReport mean_ap(const std::vector<ImagePrediction>& predictions,
                            const std::vector<ImageAnnotations>& truths,
                            double iou_threshold = 0.5) {
    std::set<ImageId> pred_ids, truth_ids;
    for (const auto& p : predictions) {
        if (!pred_ids.insert(p.image_id).second)
            throw std::invalid_argument("mean_ap: duplicate prediction image id");
    }
    std::map<ImageId, const ImageAnnotations*> truth_by_id;
    for (const auto& t : truths) {
        if (!truth_ids.insert(t.image_id).second)
            throw std::invalid_argument("mean_ap: duplicate truth image id");
        truth_by_id[t.image_id] = &t;
    }
    if (pred_ids != truth_ids)
        throw std::invalid_argument("mean_ap: prediction and truth image ids differ");

    std::map<int, std::int64_t> truths_per_class;
    for (const auto& t : truths)
        for (const auto& inst : t.instances) ++truths_per_class[inst.class_id];
    if (truths_per_class.empty())
        throw std::invalid_argument("mean_ap: no ground-truth instances");

    std::map<int, std::vector<detail::RankedPrediction>> ranked_per_class;
    for (const auto& image : predictions) {
        const ImageAnnotations& truth = *truth_by_id.at(image.image_id);
        const MatchResult matched =
            match_instances(image.instances, truth.instances, iou_threshold, image.image_id);
        for (std::size_t i = 0; i < image.instances.size(); ++i) {
            const InstancePrediction& pred = image.instances[i];
            ranked_per_class[pred.class_id].push_back(
                {pred.confidence, image.image_id, i, matched.matches[i].is_tp});
        }
    }

    MetricReport report;
    double ap_sum = 0.0;
    for (const auto& [class_id, n_gt] : truths_per_class) {
        double ap = 0.0;
        const auto it = ranked_per_class.find(class_id);
        if (it != ranked_per_class.end()) ap = detail::average_precision(it->second, n_gt);
        report.per_class_ap[class_id] = ap;
        ap_sum += ap;
    }
    report.mean_ap = ap_sum / static_cast<double>(truths_per_class.size());
    return report;
}

/// Mean absolute error between predicted and true per-image IoU Scores,
/// reported in percentage points.
inline double mae_iou(const std::map<ImageId, double>& predicted_scores,
                      const std::map<ImageId, double>& true_scores) {
    if (predicted_scores.empty()) throw std::invalid_argument("mae_iou: empty score maps");
    if (predicted_scores.size() != true_scores.size())
        throw std::invalid_argument("mae_iou: key sets differ");
    double sum = 0.0;
    for (const auto& [id, predicted] : predicted_scores) {
        const auto it = true_scores.find(id);
        if (it == true_scores.end()) throw std::invalid_argument("mae_iou: key sets differ");
        sum += std::abs(predicted - it->second);
    }
    return 100.0 * sum / static_cast<double>(predicted_scores.size());
}

}  // namespace masksel
