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
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "masksel/budget.hpp"
#include "masksel/mask.hpp"
#include "masksel/metrics.hpp"
#include "masksel/regressor.hpp"
#include "masksel/selection.hpp"
#include "masksel/simulator.hpp"

namespace masksel {

enum class ScoreSource { oracle, predicted };

/// One semi-supervised experiment: bootstrap f on n_initial random strong
/// images, score the rest of the strong pool, select up to n_total, retrain,
/// pseudo-annotate the weak pool, train g on the union, evaluate both.
/// The world is split by image id: [0, strong_pool) is the strong candidate
/// pool, then weak_pool images, then eval_size held-out images.
struct ExperimentConfig {
    WorldConfig world;
    std::size_t strong_pool_size = 1464;
    std::size_t weak_pool_size = 1500;
    std::size_t eval_size = 500;
    std::size_t n_initial = 100;
    std::size_t n_total = 200;
    SelectionConfig selection;
    ScoreSource score_source = ScoreSource::oracle;
    double weak_fraction = 1.0;
    int num_seeds = 5;
    TrainingSchedule regressor_schedule;
    TargetTransform regressor_transform = TargetTransform::sqrt;
    // Joint-schedule ablation: the fraction of the converged model's bin
    // counts seen by the mid-training model whose outputs feed the regressor.
    double joint_feature_count_fraction = 0.3;
    SurrogateParams surrogate;
    BudgetModel annotation_costs;
    std::uint64_t base_seed = 0;

    void validate() const {
        world.validate();
        if (world.num_images != strong_pool_size + weak_pool_size + eval_size)
            throw std::invalid_argument(
                "ExperimentConfig: world.num_images must equal strong+weak+eval sizes");
        if (n_initial < 1 || n_initial > n_total || n_total > strong_pool_size)
            throw std::invalid_argument(
                "ExperimentConfig: need 1 <= n_initial <= n_total <= strong_pool_size");
        if (!(weak_fraction >= 0.0 && weak_fraction <= 1.0))
            throw std::invalid_argument("ExperimentConfig: weak_fraction outside [0,1]");
        if (num_seeds < 1) throw std::invalid_argument("ExperimentConfig: num_seeds must be >= 1");
        if (eval_size < 1) throw std::invalid_argument("ExperimentConfig: eval_size must be >= 1");
        surrogate.validate();
        annotation_costs.validate();
    }

    std::vector<ImageId> strong_pool_ids() const { return id_range(0, strong_pool_size); }
    std::vector<ImageId> weak_pool_ids() const {
        return id_range(strong_pool_size, strong_pool_size + weak_pool_size);
    }
    std::vector<ImageId> eval_ids() const {
        return id_range(strong_pool_size + weak_pool_size, world.num_images);
    }

private:
    static std::vector<ImageId> id_range(std::size_t begin, std::size_t end) {
        std::vector<ImageId> ids;
        ids.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) ids.push_back(static_cast<ImageId>(i));
        return ids;
    }
};

struct AnnotationStage {
    SurrogateSegmenter segmenter;
    TrainedRegressor regressor;
};

struct PseudoAnnotations {
    std::vector<ImagePrediction> predictions;
    ScoredPool scores;
};

namespace detail {

// Feature context available at pseudo-annotation time: object counts come
// with the IL+C labels; size statistics come from the predicted masks.
inline ImageContext prediction_context(const SyntheticImage& image,
                                       const ImagePrediction& prediction) {
    ImageContext ctx;
    ctx.width = image.truth.width;
    ctx.height = image.truth.height;
    ctx.object_count = image.stats.object_count;
    const double pixels = static_cast<double>(ctx.width) * ctx.height;
    double sum = 0.0;
    for (const auto& inst : prediction.instances)
        sum += static_cast<double>(inst.mask.area()) / pixels;
    ctx.mean_area_fraction =
        prediction.instances.empty() ? 0.0 : sum / static_cast<double>(prediction.instances.size());
    return ctx;
}

inline std::vector<RegressorSample> regressor_samples(const std::vector<ImagePrediction>& preds,
                                                      const SyntheticDataset& dataset) {
    std::vector<RegressorSample> samples;
    for (const ImagePrediction& prediction : preds) {
        const SyntheticImage& image = dataset.at(prediction.image_id);
        const ImageContext ctx = prediction_context(image, prediction);
        for (const auto& inst : prediction.instances) {
            if (!inst.source_instance)
                throw std::invalid_argument("regressor_samples: prediction without source");
            RegressorSample sample;
            sample.features = extract_features(ctx, inst);
            sample.true_iou = iou(inst.mask, image.truth.instances[*inst.source_instance].mask);
            samples.push_back(sample);
        }
    }
    return samples;
}

/// Per-image IoU Scores from the regressor (Eq. 2 style mean over instances;
/// empty predictions score 0).
inline ScoredPool predicted_scores(const RegressorModel& model,
                                   const std::vector<ImagePrediction>& preds,
                                   const SyntheticDataset& dataset) {
    ScoredPool pool;
    for (const ImagePrediction& prediction : preds) {
        const SyntheticImage& image = dataset.at(prediction.image_id);
        const ImageContext ctx = prediction_context(image, prediction);
        double sum = 0.0;
        for (const auto& inst : prediction.instances)
            sum += predict_iou(model, extract_features(ctx, inst));
        pool.entries[prediction.image_id] =
            prediction.instances.empty() ? 0.0
                                         : sum / static_cast<double>(prediction.instances.size());
    }
    return pool;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (const double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Trains the annotation segmenter on the strong set and fits the IoU
/// regressor on (features, achieved IoU) pairs from the same set. Under the
/// joint schedule the regressor sees outputs of a weaker mid-training model
/// instead of the converged one.
inline AnnotationStage run_annotation_stage(const ExperimentConfig& config,
                                            const SyntheticDataset& dataset,
                                            std::span<const ImageId> strong_ids,
                                            std::uint64_t stage_seed) {
    if (strong_ids.empty()) throw std::invalid_argument("run_annotation_stage: empty strong set");
    AnnotationStage stage;
    stage.segmenter = train_surrogate(dataset, strong_ids, config.surrogate,
                                      derive_seed(stage_seed, "annotation_noise"));

    const SurrogateSegmenter* feature_model = &stage.segmenter;
    SurrogateSegmenter joint_model;
    if (config.regressor_schedule.phase == TrainingPhase::joint) {
        BinCounts counts = truth_bin_counts(dataset, strong_ids, config.surrogate);
        for (double& c : counts) c *= config.joint_feature_count_fraction;
        joint_model = train_surrogate_from_counts(counts, config.surrogate,
                                                  derive_seed(stage_seed, "joint_noise"));
        feature_model = &joint_model;
    }
    const std::vector<ImagePrediction> self_predictions =
        segment_images(*feature_model, dataset, strong_ids);
    TrainingSchedule schedule = config.regressor_schedule;
    schedule.seed = derive_seed(stage_seed, "regressor");
    stage.regressor = train_regressor(detail::regressor_samples(self_predictions, dataset),
                                      schedule, config.regressor_transform);
    return stage;
}

/// Segments every pool image and scores it, either against the ground truth
/// (oracle) or with the IoU regressor.
inline PseudoAnnotations pseudo_annotate(const SurrogateSegmenter& segmenter,
                                         const RegressorModel& regressor,
                                         const SyntheticDataset& dataset,
                                         std::span<const ImageId> pool_ids,
                                         std::span<const ImageId> strong_ids,
                                         ScoreSource score_source) {
    const std::set<ImageId> strong_set(strong_ids.begin(), strong_ids.end());
    for (const ImageId id : pool_ids)
        if (strong_set.count(id))
            throw std::invalid_argument("pseudo_annotate: pool overlaps the strong set");
    PseudoAnnotations result;
    result.predictions = segment_images(segmenter, dataset, pool_ids);
    result.scores = score_source == ScoreSource::oracle
                        ? oracle_scores(result.predictions, dataset)
                        : detail::predicted_scores(regressor, result.predictions, dataset);
    return result;
}

/// Trains the segmentation model on strong labels plus pseudo-labels, the
/// latter weighted per image by their IoU Score.
inline SurrogateSegmenter run_segmentation_stage(const ExperimentConfig& config,
                                                 const SyntheticDataset& dataset,
                                                 std::span<const ImageId> strong_ids,
                                                 const std::vector<ImagePrediction>& pseudo,
                                                 const ScoredPool& pseudo_weights,
                                                 std::uint64_t noise_seed) {
    const std::set<ImageId> strong_set(strong_ids.begin(), strong_ids.end());
    for (const ImagePrediction& p : pseudo)
        if (strong_set.count(p.image_id))
            throw std::invalid_argument("run_segmentation_stage: pseudo set overlaps strong set");
    if (strong_ids.empty() && pseudo.empty())
        throw std::invalid_argument("run_segmentation_stage: empty training union");

    BinCounts counts = truth_bin_counts(dataset, strong_ids, config.surrogate);
    for (const ImagePrediction& p : pseudo)
        add_prediction_bin_counts(counts, p, pseudo_weights.entries.at(p.image_id),
                                  config.surrogate);
    return train_surrogate_from_counts(counts, config.surrogate, noise_seed);
}

struct SeedRunResult {
    int seed_index = 0;
    std::vector<ImageId> strong_ids;    // bootstrap plus selected, sorted
    std::vector<ImageId> selected_ids;  // selection beyond the bootstrap
    double ap_annotation = 0.0;
    double ap_segmentation = 0.0;
    double mae_pp = 0.0;
    double budget_seconds = 0.0;
    double budget_days = 0.0;
};

struct AggregateStat {
    double mean = 0.0;
    double stddev = 0.0;
};

struct ExperimentReport {
    std::vector<SeedRunResult> per_seed;
    AggregateStat ap_annotation;
    AggregateStat ap_segmentation;
    AggregateStat mae_pp;
    AggregateStat budget_days;
};

namespace detail {

inline std::vector<ImageAnnotations> truth_slice(const SyntheticDataset& dataset,
                                                 std::span<const ImageId> ids) {
    std::vector<ImageAnnotations> out;
    out.reserve(ids.size());
    for (const ImageId id : ids) out.push_back(dataset.at(id).truth);
    return out;
}

}  // namespace detail

inline SeedRunResult run_single_seed(const ExperimentConfig& config,
                                     const SyntheticDataset& dataset, int seed_index) {
    const std::uint64_t run_seed = mix_seed(config.base_seed, static_cast<std::uint64_t>(seed_index));
    const std::vector<ImageId> strong_pool = config.strong_pool_ids();

    // Stage 1: bootstrap annotation model on n_initial random strong images.
    std::vector<ImageId> bootstrap =
        select_random(strong_pool, config.n_initial, derive_seed(run_seed, "bootstrap"));
    std::sort(bootstrap.begin(), bootstrap.end());
    const AnnotationStage stage0 =
        run_annotation_stage(config, dataset, bootstrap, derive_seed(run_seed, "stage0"));

    // Score the remaining candidates with both score sources; the predicted
    // vs oracle gap is the reported regressor MAE.
    std::vector<ImageId> pool;
    std::set_difference(strong_pool.begin(), strong_pool.end(), bootstrap.begin(), bootstrap.end(),
                        std::back_inserter(pool));
    const std::vector<ImagePrediction> pool_predictions =
        segment_images(stage0.segmenter, dataset, pool);
    const ScoredPool pool_oracle = oracle_scores(pool_predictions, dataset);
    const ScoredPool pool_predicted =
        detail::predicted_scores(stage0.regressor.model, pool_predictions, dataset);
    const ScoredPool& pool_scores =
        config.score_source == ScoreSource::oracle ? pool_oracle : pool_predicted;

    // Select N' more images to annotate strongly.
    SeedRunResult result;
    result.seed_index = seed_index;
    const std::size_t n_prime = config.n_total - config.n_initial;
    if (n_prime > 0) {
        result.selected_ids =
            config.selection.strategy == SelectionStrategy::beta_proximity
                ? select_by_beta(pool_scores, config.selection.beta, n_prime)
                : select_random(pool, n_prime, derive_seed(run_seed, "select"));
    }
    result.strong_ids = bootstrap;
    result.strong_ids.insert(result.strong_ids.end(), result.selected_ids.begin(),
                             result.selected_ids.end());
    std::sort(result.strong_ids.begin(), result.strong_ids.end());

    // Stage 2: retrain the annotation model on all N strong images.
    const AnnotationStage stage1 =
        run_annotation_stage(config, dataset, result.strong_ids, derive_seed(run_seed, "stage1"));

    // Pseudo-annotate the weak set and train the segmentation model.
    std::vector<ImageId> weak = config.weak_pool_ids();
    weak.resize(static_cast<std::size_t>(config.weak_fraction * static_cast<double>(weak.size())));
    const PseudoAnnotations pseudo =
        pseudo_annotate(stage1.segmenter, stage1.regressor.model, dataset, weak,
                        result.strong_ids, config.score_source);
    const SurrogateSegmenter seg_model =
        run_segmentation_stage(config, dataset, result.strong_ids, pseudo.predictions,
                               pseudo.scores, derive_seed(run_seed, "segmentation_noise"));

    // Evaluate both models on the held-out split.
    const std::vector<ImageId> eval_ids = config.eval_ids();
    const std::vector<ImageAnnotations> eval_truths = detail::truth_slice(dataset, eval_ids);
    result.ap_annotation =
        mean_ap(segment_images(stage1.segmenter, dataset, eval_ids), eval_truths, 0.5).mean_ap;
    result.ap_segmentation =
        mean_ap(segment_images(seg_model, dataset, eval_ids), eval_truths, 0.5).mean_ap;
    result.mae_pp = mae_iou(pool_predicted.entries, pool_oracle.entries);

    // With N' = 0 no candidates were scored, so no IL+C overhead accrues.
    const bool mask_guided =
        config.selection.strategy == SelectionStrategy::beta_proximity && n_prime > 0;
    CampaignPlan plan;
    plan.n_strong = static_cast<std::int64_t>(config.n_total);
    plan.selection_pool = mask_guided ? static_cast<std::int64_t>(config.strong_pool_size) : 0;
    plan.n_weak = static_cast<std::int64_t>(weak.size());
    const CampaignStrategy strategy =
        mask_guided ? CampaignStrategy::mask_guided : CampaignStrategy::random;
    result.budget_seconds = campaign_cost(config.annotation_costs, plan, strategy);
    result.budget_days = seconds_to_days(result.budget_seconds);
    return result;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config,
                                       const SyntheticDataset& dataset) {
    config.validate();
    ExperimentReport report;
    report.per_seed.resize(config.num_seeds);
    for (int k = 0; k < config.num_seeds; ++k)
        report.per_seed[k] = run_single_seed(config, dataset, k);

    const auto aggregate = [&](auto field) {
        std::vector<double> values;
        values.reserve(report.per_seed.size());
        for (const SeedRunResult& r : report.per_seed) values.push_back(field(r));
        AggregateStat stat;
        stat.mean = detail::mean_of(values);
        stat.stddev = detail::sample_std(values, stat.mean);
        return stat;
    };
    report.ap_annotation = aggregate([](const SeedRunResult& r) { return r.ap_annotation; });
    report.ap_segmentation = aggregate([](const SeedRunResult& r) { return r.ap_segmentation; });
    report.mae_pp = aggregate([](const SeedRunResult& r) { return r.mae_pp; });
    report.budget_days = aggregate([](const SeedRunResult& r) { return r.budget_days; });
    return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    return run_experiment(config, generate_dataset(config.world));
}

// ---------------------------------------------------------------------------
// Selection analysis
// ---------------------------------------------------------------------------

struct SelectionAnalysisRow {
    double beta = 0.0;
    double mean_objects = 0.0;
    double mean_object_size = 0.0;  // mean over images of mean instance area fraction
};

struct SelectionAnalysis {
    std::vector<SelectionAnalysisRow> rows;
};

inline SelectionAnalysis analyze_selection(
    const SyntheticDataset& dataset,
    const std::vector<std::pair<double, std::vector<ImageId>>>& selections_per_beta) {
    SelectionAnalysis analysis;
    for (const auto& [beta, ids] : selections_per_beta) {
        if (ids.empty()) throw std::invalid_argument("analyze_selection: empty selection");
        SelectionAnalysisRow row;
        row.beta = beta;
        for (const ImageId id : ids) {
            const SyntheticImage& image = dataset.at(id);
            row.mean_objects += image.stats.object_count;
            row.mean_object_size += image.stats.mean_area_fraction;
        }
        row.mean_objects /= static_cast<double>(ids.size());
        row.mean_object_size /= static_cast<double>(ids.size());
        analysis.rows.push_back(row);
    }
    return analysis;
}

}  // namespace masksel
