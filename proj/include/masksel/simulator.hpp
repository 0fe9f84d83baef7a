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
#include <span>
#include <stdexcept>
#include <vector>

#include "masksel/mask.hpp"
#include "masksel/morphology.hpp"
#include "masksel/parallel.hpp"
#include "masksel/rng.hpp"
#include "masksel/selection.hpp"

namespace masksel {

// ---------------------------------------------------------------------------
// Synthetic world
// ---------------------------------------------------------------------------

struct WorldConfig {
    std::size_t num_images = 0;
    int raster_width = 64;
    int raster_height = 64;
    int num_classes = 20;
    double mean_objects_per_image = 2.8;  // truncated Poisson, min 1
    int max_objects_per_image = 12;
    double class_repeat_prob = 0.70;  // targets ~1.5 distinct classes per image
    double min_area_fraction = 0.002;
    double max_area_fraction = 0.25;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_images == 0) throw std::invalid_argument("WorldConfig: num_images must be > 0");
        if (raster_width <= 0 || raster_height <= 0)
            throw std::invalid_argument("WorldConfig: raster dimensions must be positive");
        if (num_classes <= 0) throw std::invalid_argument("WorldConfig: num_classes must be > 0");
        if (!(mean_objects_per_image > 1.0))
            throw std::invalid_argument("WorldConfig: mean objects per image must exceed 1");
        if (max_objects_per_image < 1)
            throw std::invalid_argument("WorldConfig: max_objects_per_image must be >= 1");
        if (!(min_area_fraction > 0.0) || !(max_area_fraction > min_area_fraction) ||
            max_area_fraction > 1.0)
            throw std::invalid_argument("WorldConfig: bad object size range");
        const double max_pixels =
            max_area_fraction * static_cast<double>(raster_width) * raster_height;
        if (max_pixels < 1.0)
            throw std::invalid_argument("WorldConfig: raster too small for requested sizes");
    }
};

struct ImageStats {
    int object_count = 0;
    double mean_area_fraction = 0.0;
};

struct SyntheticImage {
    ImageAnnotations truth;
    ImageStats stats;
};

struct SyntheticDataset {
    int num_classes = 20;
    int raster_width = 0;
    int raster_height = 0;
    std::vector<SyntheticImage> images;  // ascending image_id

    const SyntheticImage* find(ImageId id) const {
        const auto it = std::lower_bound(
            images.begin(), images.end(), id,
            [](const SyntheticImage& img, ImageId key) { return img.truth.image_id < key; });
        if (it == images.end() || it->truth.image_id != id) return nullptr;
        return &*it;
    }

    const SyntheticImage& at(ImageId id) const {
        const SyntheticImage* img = find(id);
        if (!img) throw std::invalid_argument("SyntheticDataset: unknown image id");
        return *img;
    }

    std::vector<ImageId> image_ids() const {
        std::vector<ImageId> ids;
        ids.reserve(images.size());
        for (const auto& img : images) ids.push_back(img.truth.image_id);
        return ids;
    }
};

namespace detail {

// Rate of the zero-truncated Poisson with the requested conditional mean,
// solved by Newton iteration on m(l) = l / (1 - exp(-l)).
inline double truncated_poisson_rate(double mean) {
    double rate = mean;
    for (int i = 0; i < 64; ++i) {
        const double e = std::exp(-rate);
        const double f = rate / (1.0 - e) - mean;
        const double df = (1.0 - e - rate * e) / ((1.0 - e) * (1.0 - e));
        const double next = rate - f / df;
        if (std::abs(next - rate) < 1e-13) return next;
        rate = next;
    }
    return rate;
}

inline int sample_poisson(Rng& rng, double rate) {
    const double limit = std::exp(-rate);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform();
    } while (p > limit);
    return k - 1;
}

inline int stochastic_round(double value, double u) {
    const double floor_val = std::floor(value);
    return static_cast<int>(floor_val) + (u < value - floor_val ? 1 : 0);
}

// Paints one jittered axis-aligned rectangle or ellipse. Guarantees at least
// one foreground pixel.
inline void paint_object(Raster& raster, Rng& rng, const WorldConfig& config,
                         double area_fraction) {
    const int W = raster.width, H = raster.height;
    const double target_area = std::max(1.0, area_fraction * W * H);
    const bool ellipse = rng.uniform() < 0.5;
    const double aspect = std::exp((2.0 * rng.uniform() - 1.0) * std::log(2.0));

    double ow = std::sqrt(target_area * aspect);
    double oh = target_area / ow;
    if (ellipse) {
        // Semi-axes such that pi*a*b covers the target area.
        ow = 2.0 * std::sqrt(target_area * aspect / 3.14159265358979323846);
        oh = 4.0 * target_area / (3.14159265358979323846 * ow);
    }
    const int bw = std::clamp(static_cast<int>(std::lround(ow)), 1, W);
    const int bh = std::clamp(static_cast<int>(std::lround(oh)), 1, H);
    const int left = static_cast<int>(rng.below(static_cast<std::uint64_t>(W - bw + 1)));
    const int top = static_cast<int>(rng.below(static_cast<std::uint64_t>(H - bh + 1)));

    const double cx = left + (bw - 1) / 2.0;
    const double cy = top + (bh - 1) / 2.0;
    const double rx = std::max(0.5, bw / 2.0);
    const double ry = std::max(0.5, bh / 2.0);

    bool painted = false;
    for (int r = top; r < top + bh; ++r) {
        // Jitter each row's left/right extent by -1/0/+1.
        const int jl = static_cast<int>(rng.below(3)) - 1;
        const int jr = static_cast<int>(rng.below(3)) - 1;
        int lo = left + jl;
        int hi = left + bw - 1 + jr;
        if (ellipse) {
            const double dy = (r - cy) / ry;
            const double span = 1.0 - dy * dy;
            if (span <= 0.0) continue;
            const double half = rx * std::sqrt(span);
            lo = static_cast<int>(std::lround(cx - half)) + jl;
            hi = static_cast<int>(std::lround(cx + half)) + jr;
        }
        lo = std::max(lo, 0);
        hi = std::min(hi, W - 1);
        for (int c = lo; c <= hi; ++c) {
            raster.at(r, c) = 1;
            painted = true;
        }
    }
    if (!painted) {
        raster.at(std::clamp(top + bh / 2, 0, H - 1), std::clamp(left + bw / 2, 0, W - 1)) = 1;
    }
    (void)config;
}

}  // namespace detail

/// Deterministic per seed; image k depends only on (seed, k), so generation
/// parallelises without affecting the result.
inline SyntheticDataset generate_dataset(const WorldConfig& config) {
    config.validate();
    const double rate = detail::truncated_poisson_rate(config.mean_objects_per_image);

    SyntheticDataset dataset;
    dataset.num_classes = config.num_classes;
    dataset.raster_width = config.raster_width;
    dataset.raster_height = config.raster_height;
    dataset.images.resize(config.num_images);

    parallel_for(config.num_images, [&](std::size_t index) {
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(index)));
        SyntheticImage& image = dataset.images[index];
        image.truth.image_id = static_cast<ImageId>(index);
        image.truth.width = config.raster_width;
        image.truth.height = config.raster_height;

        int n_objects = 0;
        do {
            n_objects = detail::sample_poisson(rng, rate);
        } while (n_objects < 1 || n_objects > config.max_objects_per_image);

        const double log_ratio = std::log(config.max_area_fraction / config.min_area_fraction);
        std::vector<int> classes_present;
        double area_fraction_sum = 0.0;
        for (int obj = 0; obj < n_objects; ++obj) {
            int class_id;
            if (!classes_present.empty() && rng.uniform() < config.class_repeat_prob) {
                class_id = classes_present[rng.below(classes_present.size())];
            } else {
                class_id = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.num_classes)));
            }
            if (std::find(classes_present.begin(), classes_present.end(), class_id) ==
                classes_present.end())
                classes_present.push_back(class_id);

            const double area_fraction =
                config.min_area_fraction * std::exp(rng.uniform() * log_ratio);
            Raster raster(config.raster_height, config.raster_width);
            detail::paint_object(raster, rng, config, area_fraction);

            InstanceAnnotation instance;
            instance.class_id = class_id;
            instance.mask = encode_rle(raster);
            area_fraction_sum += static_cast<double>(instance.mask.area()) /
                                 (static_cast<double>(config.raster_width) * config.raster_height);
            image.truth.instances.push_back(std::move(instance));
        }
        image.stats.object_count = n_objects;
        image.stats.mean_area_fraction = area_fraction_sum / n_objects;
    });
    return dataset;
}

// ---------------------------------------------------------------------------
// Surrogate segmenter
// ---------------------------------------------------------------------------

inline constexpr int kSizeBins = 4;
inline constexpr int kClutterBins = 3;
inline constexpr int kSkillBins = kSizeBins * kClutterBins;

using BinCounts = std::array<double, kSkillBins>;

/// Quartile of the log-size range [min_af, max_af]; values outside clamp to
/// the extreme bins.
inline int size_bin(double area_fraction, double min_af = 0.002, double max_af = 0.25) {
    if (area_fraction <= min_af) return 0;
    if (area_fraction >= max_af) return kSizeBins - 1;
    const double x = std::log(area_fraction / min_af) / std::log(max_af / min_af);
    return std::min(kSizeBins - 1, static_cast<int>(x * kSizeBins));
}

/// Object-count bins {1}, {2,3}, {>=4}.
inline int clutter_bin(int object_count) {
    if (object_count <= 1) return 0;
    if (object_count <= 3) return 1;
    return 2;
}

inline int skill_bin_index(int sb, int cb) { return sb * kClutterBins + cb; }

/// Parameters of the surrogate degradation law. Skill saturates with the
/// number of strong training instances per (size, clutter) bin; prediction
/// noise magnitude grows with (1 - skill) and with a per-bin difficulty
/// factor that makes small objects and cluttered images intrinsically harder.
/// skill_spillover > 0 lets training instances benefit all bins a little
/// (shared-backbone generalization): n_eff(b) = n(b) + spillover * mean(n).
struct SurrogateParams {
    double s_min = 0.15;
    double s_max = 0.95;
    double tau = 8.0;
    double skill_spillover = 0.0;
    double p_miss = 0.15;
    double noise_scale = 1.0;
    int max_morph_depth = 3;
    double max_shift = 4.0;
    double size_hardness = 0.8;
    double clutter_hardness = 0.7;
    double confidence_jitter = 0.05;
    double size_bin_min_af = 0.002;
    double size_bin_max_af = 0.25;

    void validate() const {
        if (!(s_min >= 0.0 && s_min <= s_max && s_max <= 1.0))
            throw std::invalid_argument("SurrogateParams: need 0 <= s_min <= s_max <= 1");
        if (!(tau > 0.0)) throw std::invalid_argument("SurrogateParams: tau must be positive");
        if (!(p_miss >= 0.0 && p_miss <= 1.0))
            throw std::invalid_argument("SurrogateParams: p_miss outside [0,1]");
    }

    double difficulty(int sb, int cb) const {
        return std::exp(size_hardness * (kSizeBins - 1 - sb) + clutter_hardness * cb);
    }
};

struct SurrogateSegmenter {
    std::array<double, kSkillBins> skill{};
    SurrogateParams params;
    std::uint64_t noise_seed = 0;

    double skill_at(int sb, int cb) const { return skill[skill_bin_index(sb, cb)]; }
};

inline double skill_from_count(double n, const SurrogateParams& params) {
    return params.s_min + (params.s_max - params.s_min) * (1.0 - std::exp(-n / params.tau));
}

inline BinCounts truth_bin_counts(const SyntheticDataset& dataset, std::span<const ImageId> ids,
                                  const SurrogateParams& params) {
    BinCounts counts{};
    const double pixels = static_cast<double>(dataset.raster_width) * dataset.raster_height;
    for (const ImageId id : ids) {
        const SyntheticImage& image = dataset.at(id);
        const int cb = clutter_bin(image.stats.object_count);
        for (const auto& inst : image.truth.instances) {
            const int sb = size_bin(static_cast<double>(inst.mask.area()) / pixels,
                                    params.size_bin_min_af, params.size_bin_max_af);
            counts[skill_bin_index(sb, cb)] += 1.0;
        }
    }
    return counts;
}

/// Pseudo-labelled images contribute with a per-image weight (their IoU
/// Score); bins are derived from the predicted masks themselves.
inline void add_prediction_bin_counts(BinCounts& counts, const ImagePrediction& prediction,
                                      double weight, const SurrogateParams& params) {
    if (weight < 0.0) throw std::invalid_argument("add_prediction_bin_counts: negative weight");
    const double pixels = static_cast<double>(prediction.width) * prediction.height;
    const int cb = clutter_bin(static_cast<int>(prediction.instances.size()));
    for (const auto& inst : prediction.instances) {
        const int sb = size_bin(static_cast<double>(inst.mask.area()) / pixels,
                                params.size_bin_min_af, params.size_bin_max_af);
        counts[skill_bin_index(sb, cb)] += weight;
    }
}

inline SurrogateSegmenter train_surrogate_from_counts(const BinCounts& counts,
                                                      const SurrogateParams& params,
                                                      std::uint64_t noise_seed) {
    params.validate();
    SurrogateSegmenter model;
    model.params = params;
    model.noise_seed = noise_seed;
    double mean_count = 0.0;
    for (int b = 0; b < kSkillBins; ++b) mean_count += counts[b];
    mean_count /= kSkillBins;
    for (int b = 0; b < kSkillBins; ++b)
        model.skill[b] =
            skill_from_count(counts[b] + params.skill_spillover * mean_count, params);
    return model;
}

inline SurrogateSegmenter train_surrogate(const SyntheticDataset& dataset,
                                          std::span<const ImageId> strong_ids,
                                          const SurrogateParams& params,
                                          std::uint64_t noise_seed) {
    if (strong_ids.empty()) throw std::invalid_argument("train_surrogate: empty strong set");
    return train_surrogate_from_counts(truth_bin_counts(dataset, strong_ids, params), params,
                                       noise_seed);
}

/// Per-instance perturbation: translation plus repeated erosion/dilation,
/// with magnitude (1 - skill) * noise_scale * difficulty(size, clutter), and
/// a drop probability (1 - skill) * p_miss. Deterministic given
/// (model, image id, noise seed).
inline ImagePrediction segment(const SurrogateSegmenter& model, const SyntheticImage& image) {
    const SurrogateParams& p = model.params;
    ImagePrediction prediction;
    prediction.image_id = image.truth.image_id;
    prediction.width = image.truth.width;
    prediction.height = image.truth.height;

    const double pixels = static_cast<double>(image.truth.width) * image.truth.height;
    const int cb = clutter_bin(image.stats.object_count);
    for (std::size_t i = 0; i < image.truth.instances.size(); ++i) {
        const InstanceAnnotation& truth = image.truth.instances[i];
        Rng rng(mix_seed(mix_seed(model.noise_seed, image.truth.image_id),
                         static_cast<std::uint64_t>(i)));

        const int sb = size_bin(static_cast<double>(truth.mask.area()) / pixels,
                                p.size_bin_min_af, p.size_bin_max_af);
        const double skill = model.skill_at(sb, cb);
        if (rng.uniform() < (1.0 - skill) * p.p_miss) continue;

        const double magnitude =
            std::min(1.0, (1.0 - skill) * p.noise_scale * p.difficulty(sb, cb));
        const int depth =
            detail::stochastic_round(magnitude * p.max_morph_depth * rng.uniform(), rng.uniform());
        const bool erode_mask = rng.uniform() < 0.5;
        const int dx = detail::stochastic_round(magnitude * p.max_shift * rng.uniform(),
                                                rng.uniform()) *
                       (rng.uniform() < 0.5 ? -1 : 1);
        const int dy = detail::stochastic_round(magnitude * p.max_shift * rng.uniform(),
                                                rng.uniform()) *
                       (rng.uniform() < 0.5 ? -1 : 1);
        const double confidence =
            std::clamp(skill + p.confidence_jitter * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);

        Raster raster = decode_rle(truth.mask);
        if (dx != 0 || dy != 0) raster = translate(raster, dy, dx);
        for (int d = 0; d < depth; ++d) raster = erode_mask ? erode(raster) : dilate(raster);

        BinaryMask mask = encode_rle(raster);
        if (mask.area() == 0) continue;  // perturbed away entirely: counts as a miss

        InstancePrediction inst;
        inst.class_id = truth.class_id;
        inst.mask = std::move(mask);
        inst.confidence = confidence;
        inst.source_instance = i;
        prediction.instances.push_back(std::move(inst));
    }
    return prediction;
}

inline std::vector<ImagePrediction> segment_images(const SurrogateSegmenter& model,
                                                   const SyntheticDataset& dataset,
                                                   std::span<const ImageId> ids) {
    std::vector<ImagePrediction> predictions(ids.size());
    parallel_for(ids.size(),
                 [&](std::size_t i) { predictions[i] = segment(model, dataset.at(ids[i])); });
    return predictions;
}

/// Ground-truth IoU Scores: each prediction is compared against the instance
/// it was derived from; an image whose instances were all dropped scores 0.
inline ScoredPool oracle_scores(const std::vector<ImagePrediction>& predictions,
                                const SyntheticDataset& dataset) {
    ScoredPool pool;
    for (const ImagePrediction& prediction : predictions) {
        const SyntheticImage& image = dataset.at(prediction.image_id);
        if (pool.entries.count(prediction.image_id))
            throw std::invalid_argument("oracle_scores: duplicate image id");
        double sum = 0.0;
        for (const auto& inst : prediction.instances) {
            if (!inst.source_instance || *inst.source_instance >= image.truth.instances.size())
                throw std::invalid_argument("oracle_scores: prediction without source instance");
            sum += iou(inst.mask, image.truth.instances[*inst.source_instance].mask);
        }
        pool.entries[prediction.image_id] =
            prediction.instances.empty() ? 0.0
                                         : sum / static_cast<double>(prediction.instances.size());
    }
    return pool;
}

}  // namespace masksel
