#pragma once

/// @file oracle.hpp
/// Exhaustive enumeration and random-subset baselines.

#include "subsel/criteria.hpp"
#include "subsel/rng.hpp"

#include <cstdint>
#include <vector>

namespace subsel {

struct EnumerationResult {
    double min_value = 0.0;
    std::vector<SubsetSolution> argmin_solutions; ///< lexicographic order
    std::uint64_t subsets_evaluated = 0;
};

struct EnumerationOptions {
    double tie_tolerance = 1e-9;
    std::uint64_t cap = 10'000'000;
    std::size_t workers = 1;
};

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Combination of rank r (lexicographic) among k-subsets of [0, n).
std::vector<std::uint32_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k);

/// Minimum over every ntoselect-subset of the candidates plus all subsets
/// within tie_tolerance of it. Throws TooLarge beyond the cap.
EnumerationResult enumerate_best(const CriterionContext& ctx, const EnumerationOptions& options = {});

struct BaselineResult {
    double mean = 0.0;
    double sd = 0.0; ///< sample standard deviation; 0 for one draw
    double min = 0.0;
    std::vector<double> values;
};

/// Criterion values of reps uniform random ntoselect-subsets.
BaselineResult random_baseline(const CriterionContext& ctx, std::size_t reps, RngStream& rng);

} // namespace subsel
