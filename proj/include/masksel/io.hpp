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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "masksel/mask.hpp"
#include "masksel/metrics.hpp"
#include "masksel/regressor.hpp"
#include "masksel/selection.hpp"
#include "masksel/simulator.hpp"

namespace masksel {

inline std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

// ---------------------------------------------------------------------------
// Mask / dataset interchange
// ---------------------------------------------------------------------------

// Mask interchange format: {"size":[h,w],"counts":[r0,r1,...]}.
inline nlohmann::json mask_to_json(const BinaryMask& mask) {
    return {{"size", {mask.height, mask.width}}, {"counts", mask.runs}};
}

inline BinaryMask mask_from_json(const nlohmann::json& j) {
    BinaryMask mask;
    const auto& size = j.at("size");
    if (!size.is_array() || size.size() != 2)
        throw std::invalid_argument("mask json: size must be [h,w]");
    mask.height = size[0].get<int>();
    mask.width = size[1].get<int>();
    mask.runs = j.at("counts").get<std::vector<std::uint64_t>>();
    mask.validate();
    return mask;
}

inline nlohmann::json dataset_to_json(const SyntheticDataset& dataset) {
    nlohmann::json images = nlohmann::json::array();
    for (const SyntheticImage& image : dataset.images) {
        nlohmann::json instances = nlohmann::json::array();
        for (const InstanceAnnotation& inst : image.truth.instances)
            instances.push_back({{"class_id", inst.class_id}, {"mask", mask_to_json(inst.mask)}});
        images.push_back({{"image_id", image.truth.image_id},
                          {"width", image.truth.width},
                          {"height", image.truth.height},
                          {"instances", std::move(instances)},
                          {"stats",
                           {{"n_objects", image.stats.object_count},
                            {"mean_area_fraction", image.stats.mean_area_fraction}}}});
    }
    return {{"num_classes", dataset.num_classes},
            {"raster_width", dataset.raster_width},
            {"raster_height", dataset.raster_height},
            {"images", std::move(images)}};
}

inline SyntheticDataset dataset_from_json(const nlohmann::json& j) {
    SyntheticDataset dataset;
    dataset.num_classes = j.at("num_classes").get<int>();
    dataset.raster_width = j.at("raster_width").get<int>();
    dataset.raster_height = j.at("raster_height").get<int>();
    for (const auto& img : j.at("images")) {
        SyntheticImage image;
        image.truth.image_id = img.at("image_id").get<ImageId>();
        image.truth.width = img.at("width").get<int>();
        image.truth.height = img.at("height").get<int>();
        for (const auto& inst : img.at("instances")) {
            InstanceAnnotation annotation;
            annotation.class_id = inst.at("class_id").get<int>();
            annotation.mask = mask_from_json(inst.at("mask"));
            if (annotation.mask.area() < 1)
                throw std::invalid_argument("dataset json: instance mask is empty");
            image.truth.instances.push_back(std::move(annotation));
        }
        if (image.truth.instances.empty())
            throw std::invalid_argument("dataset json: image without instances");
        image.stats.object_count = img.at("stats").at("n_objects").get<int>();
        image.stats.mean_area_fraction = img.at("stats").at("mean_area_fraction").get<double>();
        dataset.images.push_back(std::move(image));
    }
    return dataset;
}

inline void write_dataset(const std::string& path, const SyntheticDataset& dataset) {
    write_text_file(path, dataset_to_json(dataset).dump() + "\n");
}

inline SyntheticDataset read_dataset(const std::string& path) {
    return dataset_from_json(nlohmann::json::parse(read_text_file(path)));
}

/// Sidecar stats: image_id, n_objects, mean_area_fraction.
inline std::string stats_csv(const SyntheticDataset& dataset) {
    std::string out = "image_id,n_objects,mean_area_fraction\n";
    for (const SyntheticImage& image : dataset.images) {
        out += std::to_string(image.truth.image_id) + ',' +
               std::to_string(image.stats.object_count) + ',' +
               format_fixed(image.stats.mean_area_fraction, 6) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scores CSV (image_id, iou_score)
// ---------------------------------------------------------------------------

inline std::string scores_csv(const ScoredPool& pool) {
    std::string out = "image_id,iou_score\n";
    for (const auto& [id, score] : pool.entries)
        out += std::to_string(id) + ',' + format_fixed(score, 6) + '\n';
    return out;
}

inline ScoredPool scores_from_csv(const std::string& content) {
    ScoredPool pool;
    std::istringstream in(content);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("image_id", 0) == 0) continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("scores csv: malformed line: " + line);
        const ImageId id = std::stoull(line.substr(0, comma));
        const double score = std::stod(line.substr(comma + 1));
        if (!pool.entries.emplace(id, score).second)
            throw std::invalid_argument("scores csv: duplicate image id");
    }
    pool.validate();
    return pool;
}

// ---------------------------------------------------------------------------
// Metric / regressor serialization
// ---------------------------------------------------------------------------

/// class_id,ap rows followed by mean_ap and mae_iou footer rows.
inline std::string metric_report_csv(const MetricReport& report) {
    std::string out = "class_id,ap\n";
    for (const auto& [class_id, ap] : report.per_class_ap)
        out += std::to_string(class_id) + ',' + format_fixed(ap, 6) + '\n';
    out += "mean_ap," + format_fixed(report.mean_ap, 6) + '\n';
    out += "mae_iou,";
    if (report.mae_iou) out += format_fixed(*report.mae_iou, 4);
    out += '\n';
    return out;
}

inline nlohmann::json regressor_to_json(const RegressorModel& model) {
    return {{"weights", model.weights},
            {"transform", model.transform == TargetTransform::sqrt ? "sqrt" : "identity"}};
}

inline RegressorModel regressor_from_json(const nlohmann::json& j) {
    RegressorModel model;
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != kFeatureCount)
        throw std::invalid_argument("regressor json: wrong weight count");
    std::copy(weights.begin(), weights.end(), model.weights.begin());
    const std::string transform = j.at("transform").get<std::string>();
    if (transform == "sqrt") {
        model.transform = TargetTransform::sqrt;
    } else if (transform == "identity") {
        model.transform = TargetTransform::identity;
    } else {
        throw std::invalid_argument("regressor json: unknown transform: " + transform);
    }
    return model;
}

inline std::string training_curve_csv(const std::vector<double>& epoch_loss) {
    std::string out = "epoch,loss\n";
    for (std::size_t i = 0; i < epoch_loss.size(); ++i)
        out += std::to_string(i + 1) + ',' + format_fixed(epoch_loss[i], 6) + '\n';
    return out;
}

}  // namespace masksel
