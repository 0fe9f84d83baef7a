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
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace masksel {

using ImageId = std::uint64_t;

/// Dense row-major binary raster. Pixels are 0/1 bytes.
struct Raster {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> px;

    Raster() = default;
    Raster(int h, int w) : height(h), width(w), px(static_cast<std::size_t>(h) * w, 0) {
        if (h <= 0 || w <= 0) throw std::invalid_argument("Raster: dimensions must be positive");
    }

    std::uint8_t& at(int r, int c) { return px[static_cast<std::size_t>(r) * width + c]; }
    std::uint8_t at(int r, int c) const { return px[static_cast<std::size_t>(r) * width + c]; }
    bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
};

/// Run-length encoded binary mask. Runs are row-major and alternate
/// background/foreground starting with background; only the first run may be
/// zero (mask that starts with foreground). sum(runs) == height * width.
struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint64_t> runs;

    void validate() const {
        if (height <= 0 || width <= 0)
            throw std::invalid_argument("BinaryMask: dimensions must be positive");
        if (runs.empty()) throw std::invalid_argument("BinaryMask: runs must be nonempty");
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (i > 0 && runs[i] == 0)
                throw std::invalid_argument("BinaryMask: zero run allowed only in first position");
            total += runs[i];
        }
        if (total != static_cast<std::uint64_t>(height) * static_cast<std::uint64_t>(width))
            throw std::invalid_argument("BinaryMask: runs do not cover the raster");
    }

    /// Foreground pixel count (sum of odd-index runs).
    std::int64_t area() const {
        std::int64_t a = 0;
        for (std::size_t i = 1; i < runs.size(); i += 2) a += static_cast<std::int64_t>(runs[i]);
        return a;
    }

    bool same_size(const BinaryMask& other) const {
        return height == other.height && width == other.width;
    }

    bool operator==(const BinaryMask&) const = default;
};

inline BinaryMask encode_rle(const Raster& raster) {
    if (raster.height <= 0 || raster.width <= 0 || raster.px.empty())
        throw std::invalid_argument("encode_rle: empty raster");
    BinaryMask mask;
    mask.height = raster.height;
    mask.width = raster.width;
    std::uint64_t run = 0;
    std::uint8_t value = 0;  // first run counts background
    for (const std::uint8_t p : raster.px) {
        const std::uint8_t bit = p ? 1 : 0;
        if (bit != value) {
            mask.runs.push_back(run);
            run = 0;
            value = bit;
        }
        ++run;
    }
    mask.runs.push_back(run);
    return mask;
}

inline Raster decode_rle(const BinaryMask& mask) {
    mask.validate();
    Raster raster(mask.height, mask.width);
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (const std::uint64_t run : mask.runs) {
        for (std::uint64_t i = 0; i < run; ++i) raster.px[pos++] = value;
        value = !value;
    }
    return raster;
}

/// |A ∩ B| computed directly on the run lists.
inline std::int64_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_size(b)) throw std::invalid_argument("intersection_area: dimension mismatch");
    const std::uint64_t total =
        static_cast<std::uint64_t>(a.height) * static_cast<std::uint64_t>(a.width);
    std::uint64_t ca = a.runs[0], cb = b.runs[0];
    std::size_t ia = 1, ib = 1;
    bool va = false, vb = false;
    std::int64_t inter = 0;
    std::uint64_t consumed = 0;
    while (consumed < total) {
        if (ca == 0 && ia < a.runs.size()) {
            ca = a.runs[ia++];
            va = !va;
        }
        if (cb == 0 && ib < b.runs.size()) {
            cb = b.runs[ib++];
            vb = !vb;
        }
        const std::uint64_t step = ca < cb ? ca : cb;
        if (step == 0) throw std::invalid_argument("intersection_area: malformed run list");
        if (va && vb) inter += static_cast<std::int64_t>(step);
        ca -= step;
        cb -= step;
        consumed += step;
    }
    return inter;
}

/// Intersection over union of two same-size masks. Defined as 0 when both
/// masks are empty. Integer set sizes, one division at the end.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
    const std::int64_t inter = intersection_area(a, b);
    const std::int64_t uni = a.area() + b.area() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Per-image IoU Score: arithmetic mean of per-object IoUs.
inline double image_iou_score(std::span<const double> per_object_ious) {
    if (per_object_ious.empty())
        throw std::invalid_argument("image_iou_score: image has no instances");
    double sum = 0.0;
    for (const double v : per_object_ious) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("image_iou_score: IoU outside [0,1]");
        sum += v;
    }
    return sum / static_cast<double>(per_object_ious.size());
}

struct InstanceAnnotation {
    int class_id = 0;
    BinaryMask mask;
};

struct InstancePrediction {
    int class_id = 0;
    BinaryMask mask;
    double confidence = 0.0;
    std::optional<double> predicted_iou;
    // Index of the ground-truth instance this prediction was derived from.
    // Internal bookkeeping for oracle scoring; absent for external predictions.
    std::optional<std::size_t> source_instance;
};

struct ImageAnnotations {
    ImageId image_id = 0;
    int width = 0;
    int height = 0;
    std::vector<InstanceAnnotation> instances;
};

struct ImagePrediction {
    ImageId image_id = 0;
    int width = 0;
    int height = 0;
    std::vector<InstancePrediction> instances;
};

}  // namespace masksel
