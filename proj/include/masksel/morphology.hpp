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

#include "masksel/mask.hpp"

namespace masksel {

// Pixel-grid geometry and 4-neighbourhood morphology. Pixels outside the
// raster count as background.

inline Raster erode(const Raster& in) {
    Raster out(in.height, in.width);
    for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
            if (!in.at(r, c)) continue;
            const bool keep = r > 0 && in.at(r - 1, c) && r + 1 < in.height && in.at(r + 1, c) &&
                              c > 0 && in.at(r, c - 1) && c + 1 < in.width && in.at(r, c + 1);
            out.at(r, c) = keep ? 1 : 0;
        }
    }
    return out;
}

inline Raster dilate(const Raster& in) {
    Raster out(in.height, in.width);
    for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
            const bool on = in.at(r, c) || (r > 0 && in.at(r - 1, c)) ||
                            (r + 1 < in.height && in.at(r + 1, c)) || (c > 0 && in.at(r, c - 1)) ||
                            (c + 1 < in.width && in.at(r, c + 1));
            out.at(r, c) = on ? 1 : 0;
        }
    }
    return out;
}

/// Shift the foreground by (dr, dc); pixels shifted outside the raster are lost.
inline Raster translate(const Raster& in, int dr, int dc) {
    Raster out(in.height, in.width);
    for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
            if (!in.at(r, c)) continue;
            const int nr = r + dr, nc = c + dc;
            if (out.in_bounds(nr, nc)) out.at(nr, nc) = 1;
        }
    }
    return out;
}

/// Length of the foreground/background interface in pixel edges; the raster
/// border counts as background.
inline std::int64_t perimeter_edge_count(const Raster& in) {
    std::int64_t edges = 0;
    for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
            if (!in.at(r, c)) continue;
            if (r == 0 || !in.at(r - 1, c)) ++edges;
            if (r + 1 == in.height || !in.at(r + 1, c)) ++edges;
            if (c == 0 || !in.at(r, c - 1)) ++edges;
            if (c + 1 == in.width || !in.at(r, c + 1)) ++edges;
        }
    }
    return edges;
}

/// Number of foreground pixels touching background (or the raster border).
inline std::int64_t boundary_pixel_count(const Raster& in) {
    std::int64_t count = 0;
    for (int r = 0; r < in.height; ++r) {
        for (int c = 0; c < in.width; ++c) {
            if (!in.at(r, c)) continue;
            const bool boundary = r == 0 || !in.at(r - 1, c) || r + 1 == in.height ||
                                  !in.at(r + 1, c) || c == 0 || !in.at(r, c - 1) ||
                                  c + 1 == in.width || !in.at(r, c + 1);
            if (boundary) ++count;
        }
    }
    return count;
}

}  // namespace masksel
