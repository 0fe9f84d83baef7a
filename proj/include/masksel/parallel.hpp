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
#include <cstdlib>
#include <future>
#include <string>
#include <thread>
#include <vector>

namespace masksel {

/// Worker count: MASKSEL_THREADS if set, hardware concurrency otherwise.
inline int configured_thread_count() {
    if (const char* env = std::getenv("MASKSEL_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Work items must write only to their own output
/// slot; results are then independent of the thread count and scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = configured_thread_count()) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        futures.push_back(std::async(std::launch::async, [&fn, begin, end] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }));
    }
    for (auto& f : futures) f.get();
}

}  // namespace masksel
