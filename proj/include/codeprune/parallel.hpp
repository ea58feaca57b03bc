// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace codeprune {

// Process-wide worker cap for scoring and test execution. 0 = hardware concurrency.
void set_worker_count(unsigned n);
unsigned worker_count();

// Runs fn(i) for i in [0, n). Callers write results into slot i, so output never
// depends on scheduling. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace codeprune
