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

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "masksel/pipeline.hpp"

namespace masksel {

namespace detail {

inline void expect_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                        const char* where) {
    if (!j.is_object()) throw std::invalid_argument(std::string("config: ") + where +
                                                    " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace detail

inline WorldConfig world_config_from_json(const nlohmann::json& j) {
    detail::expect_keys(j,
                        {"num_images", "raster_width", "raster_height", "num_classes",
                         "mean_objects_per_image", "max_objects_per_image", "class_repeat_prob",
                         "min_area_fraction", "max_area_fraction", "seed"},
                        "world");
    WorldConfig world;
    world.num_images = detail::get_or<std::size_t>(j, "num_images", 0);
    world.raster_width = detail::get_or(j, "raster_width", world.raster_width);
    world.raster_height = detail::get_or(j, "raster_height", world.raster_height);
    world.num_classes = detail::get_or(j, "num_classes", world.num_classes);
    world.mean_objects_per_image =
        detail::get_or(j, "mean_objects_per_image", world.mean_objects_per_image);
    world.max_objects_per_image =
        detail::get_or(j, "max_objects_per_image", world.max_objects_per_image);
    world.class_repeat_prob = detail::get_or(j, "class_repeat_prob", world.class_repeat_prob);
    world.min_area_fraction = detail::get_or(j, "min_area_fraction", world.min_area_fraction);
    world.max_area_fraction = detail::get_or(j, "max_area_fraction", world.max_area_fraction);
    world.seed = detail::get_or<std::uint64_t>(j, "seed", world.seed);
    return world;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    detail::expect_keys(j,
                        {"world", "strong_pool_size", "weak_pool_size", "eval_size", "n_initial",
                         "n_total", "selection", "score_source", "weak_fraction", "num_seeds",
                         "regressor_schedule", "regressor_transform",
                         "joint_feature_count_fraction", "surrogate", "annotation_costs"},
                        "experiment config");
    ExperimentConfig config;
    if (j.contains("world")) config.world = world_config_from_json(j.at("world"));
    config.strong_pool_size =
        detail::get_or<std::size_t>(j, "strong_pool_size", config.strong_pool_size);
    config.weak_pool_size = detail::get_or<std::size_t>(j, "weak_pool_size", config.weak_pool_size);
    config.eval_size = detail::get_or<std::size_t>(j, "eval_size", config.eval_size);
    config.n_initial = detail::get_or<std::size_t>(j, "n_initial", config.n_initial);
    config.n_total = detail::get_or<std::size_t>(j, "n_total", config.n_total);
    config.weak_fraction = detail::get_or(j, "weak_fraction", config.weak_fraction);
    config.num_seeds = detail::get_or(j, "num_seeds", config.num_seeds);
    config.joint_feature_count_fraction =
        detail::get_or(j, "joint_feature_count_fraction", config.joint_feature_count_fraction);

    if (j.contains("selection")) {
        const auto& sel = j.at("selection");
        detail::expect_keys(sel, {"strategy", "beta"}, "selection");
        const std::string strategy = detail::get_or<std::string>(sel, "strategy", "beta_proximity");
        if (strategy == "random") {
            config.selection.strategy = SelectionStrategy::random;
        } else if (strategy == "beta_proximity") {
            config.selection.strategy = SelectionStrategy::beta_proximity;
        } else {
            throw std::invalid_argument("config: unknown selection strategy: " + strategy);
        }
        config.selection.beta = detail::get_or(sel, "beta", config.selection.beta);
    }

    if (j.contains("score_source")) {
        const std::string source = j.at("score_source").get<std::string>();
        if (source == "oracle") {
            config.score_source = ScoreSource::oracle;
        } else if (source == "predicted") {
            config.score_source = ScoreSource::predicted;
        } else {
            throw std::invalid_argument("config: unknown score_source: " + source);
        }
    }

    if (j.contains("regressor_schedule")) {
        const auto& sched = j.at("regressor_schedule");
        detail::expect_keys(sched,
                            {"phase", "segmentation_phase_epochs", "iou_phase_epochs",
                             "learning_rate", "lr_halving_every", "batch"},
                            "regressor_schedule");
        TrainingSchedule& schedule = config.regressor_schedule;
        const std::string phase = detail::get_or<std::string>(sched, "phase", "frozen_then_iou");
        if (phase == "joint") {
            schedule.phase = TrainingPhase::joint;
        } else if (phase == "frozen_then_iou") {
            schedule.phase = TrainingPhase::frozen_then_iou;
        } else {
            throw std::invalid_argument("config: unknown schedule phase: " + phase);
        }
        schedule.segmentation_phase_epochs =
            detail::get_or(sched, "segmentation_phase_epochs", schedule.segmentation_phase_epochs);
        schedule.iou_phase_epochs =
            detail::get_or(sched, "iou_phase_epochs", schedule.iou_phase_epochs);
        schedule.learning_rate = detail::get_or(sched, "learning_rate", schedule.learning_rate);
        schedule.lr_halving_every =
            detail::get_or(sched, "lr_halving_every", schedule.lr_halving_every);
        const std::string batch = detail::get_or<std::string>(sched, "batch", "stochastic");
        if (batch == "stochastic") {
            schedule.batch = BatchMode::stochastic;
        } else if (batch == "full_batch") {
            schedule.batch = BatchMode::full_batch;
        } else {
            throw std::invalid_argument("config: unknown batch mode: " + batch);
        }
    }

    if (j.contains("regressor_transform")) {
        const std::string transform = j.at("regressor_transform").get<std::string>();
        if (transform == "sqrt") {
            config.regressor_transform = TargetTransform::sqrt;
        } else if (transform == "identity") {
            config.regressor_transform = TargetTransform::identity;
        } else {
            throw std::invalid_argument("config: unknown regressor_transform: " + transform);
        }
    }

    if (j.contains("surrogate")) {
        const auto& s = j.at("surrogate");
        detail::expect_keys(s,
                            {"s_min", "s_max", "tau", "skill_spillover", "p_miss", "noise_scale",
                             "max_morph_depth", "max_shift", "size_hardness", "clutter_hardness",
                             "confidence_jitter", "size_bin_min_af", "size_bin_max_af"},
                            "surrogate");
        SurrogateParams& p = config.surrogate;
        p.s_min = detail::get_or(s, "s_min", p.s_min);
        p.s_max = detail::get_or(s, "s_max", p.s_max);
        p.tau = detail::get_or(s, "tau", p.tau);
        p.skill_spillover = detail::get_or(s, "skill_spillover", p.skill_spillover);
        p.p_miss = detail::get_or(s, "p_miss", p.p_miss);
        p.noise_scale = detail::get_or(s, "noise_scale", p.noise_scale);
        p.max_morph_depth = detail::get_or(s, "max_morph_depth", p.max_morph_depth);
        p.max_shift = detail::get_or(s, "max_shift", p.max_shift);
        p.size_hardness = detail::get_or(s, "size_hardness", p.size_hardness);
        p.clutter_hardness = detail::get_or(s, "clutter_hardness", p.clutter_hardness);
        p.confidence_jitter = detail::get_or(s, "confidence_jitter", p.confidence_jitter);
        p.size_bin_min_af = detail::get_or(s, "size_bin_min_af", p.size_bin_min_af);
        p.size_bin_max_af = detail::get_or(s, "size_bin_max_af", p.size_bin_max_af);
    }

    if (j.contains("annotation_costs")) {
        const auto& c = j.at("annotation_costs");
        detail::expect_keys(c, {"t_il_seconds", "t_ilc_seconds", "t_full_seconds", "t_bb_seconds"},
                            "annotation_costs");
        const auto to_centi = [](double seconds) {
            return static_cast<std::int64_t>(std::llround(seconds * 100.0));
        };
        BudgetModel& m = config.annotation_costs;
        if (c.contains("t_il_seconds")) m.il_centiseconds = to_centi(c.at("t_il_seconds"));
        if (c.contains("t_ilc_seconds")) m.ilc_centiseconds = to_centi(c.at("t_ilc_seconds"));
        if (c.contains("t_full_seconds")) m.full_centiseconds = to_centi(c.at("t_full_seconds"));
        if (c.contains("t_bb_seconds")) m.bb_centiseconds = to_centi(c.at("t_bb_seconds"));
    }

    if (config.world.num_images == 0)
        config.world.num_images =
            config.strong_pool_size + config.weak_pool_size + config.eval_size;
    config.selection.n_prime = std::max<std::size_t>(1, config.n_total - config.n_initial);
    return config;
}

}  // namespace masksel
