#pragma once

#include <array>
#include <utility>

#include "run_config.hpp"

namespace resilience {

// (r, L) for the five benchmark species of the Allee model.
const std::array<std::pair<double, double>, 5>& benchmark_species();

inline constexpr double kBenchStressK = 0.9;
inline constexpr double kBenchStressDuration = 10.0;

// Expands a bench-* config into its effective form.
json validate_bench_config(const json& cfg);

Report run_bench_species(const json& cfg);
Report run_bench_flowkick(const json& cfg);

}  // namespace resilience
