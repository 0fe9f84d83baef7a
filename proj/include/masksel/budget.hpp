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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace masksel {

enum class Supervision { image_level, image_level_counts, full, bounding_box };

enum class CampaignStrategy { random, mask_guided };

/// Per-image annotation cost at each supervision level, held in centiseconds
/// so campaign sums are exact integer arithmetic. Defaults are the Pascal VOC
/// figures: IL 20 s (20 classes x 1 s), IL+C 22.22 s (+1.5 classes x 1.48 s),
/// Full 239.7 s (18.5 s + 2.8 masks x 79 s), BB 38.1 s (18.5 s + 2.8 x 7 s).
struct BudgetModel {
    std::int64_t il_centiseconds = 2000;
    std::int64_t ilc_centiseconds = 2222;
    std::int64_t full_centiseconds = 23970;
    std::int64_t bb_centiseconds = 3810;

    void validate() const {
        if (il_centiseconds <= 0 || ilc_centiseconds <= 0 || full_centiseconds <= 0 ||
            bb_centiseconds <= 0)
            throw std::invalid_argument("BudgetModel: costs must be positive");
    }

    std::int64_t centiseconds(Supervision s) const {
        switch (s) {
            case Supervision::image_level: return il_centiseconds;
            case Supervision::image_level_counts: return ilc_centiseconds;
            case Supervision::full: return full_centiseconds;
            case Supervision::bounding_box: return bb_centiseconds;
        }
        throw std::invalid_argument("BudgetModel: unknown supervision level");
    }
};

/// One annotation campaign. selection_pool is the number of images whose
/// IL+C labels are needed to score candidates for mask-guided selection
/// (0 for random selection); n_weak counts extra weakly-annotated images.
struct CampaignPlan {
    std::int64_t n_strong = 0;
    std::int64_t selection_pool = 0;
    std::int64_t n_weak = 0;

    void validate() const {
        if (n_strong < 0 || selection_pool < 0 || n_weak < 0)
            throw std::invalid_argument("CampaignPlan: counts must be non-negative");
    }
};

inline double cost_per_image(const BudgetModel& model, Supervision supervision) {
    return static_cast<double>(model.centiseconds(supervision)) / 100.0;
}

inline std::int64_t campaign_cost_centiseconds(const BudgetModel& model, const CampaignPlan& plan,
                                               CampaignStrategy strategy) {
    model.validate();
    plan.validate();
    std::int64_t total = plan.n_strong * model.full_centiseconds +
                         plan.n_weak * model.ilc_centiseconds;
    if (strategy == CampaignStrategy::mask_guided) {
        if (plan.selection_pool < plan.n_strong)
            throw std::invalid_argument(
                "campaign_cost: mask-guided selection pool smaller than n_strong");
        // Scoring the pool needs IL+C labels for every candidate that does
        // not end up strongly annotated.
        total += (plan.selection_pool - plan.n_strong) * model.ilc_centiseconds;
    }
    return total;
}

inline double campaign_cost(const BudgetModel& model, const CampaignPlan& plan,
                            CampaignStrategy strategy) {
    return static_cast<double>(campaign_cost_centiseconds(model, plan, strategy)) / 100.0;
}

inline double seconds_to_days(double seconds) {
    if (seconds < 0) throw std::invalid_argument("seconds_to_days: negative duration");
    return seconds / 86400.0;
}

inline std::string to_string(CampaignStrategy s) {
    return s == CampaignStrategy::random ? "random" : "mask_guided";
}

}  // namespace masksel
