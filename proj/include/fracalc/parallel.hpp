#pragma once

#include <cstddef>
#include <functional>

namespace fracalc {

/// Worker budget for internal parallelism: FRACALC_THREADS when set to a
/// positive integer, otherwise the number of available cores.
std::size_t thread_budget();

/// Runs body(i) for i in [0, n) across the thread budget. Work is assigned
/// statically by index, so results stored by index are deterministic
/// regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace fracalc
