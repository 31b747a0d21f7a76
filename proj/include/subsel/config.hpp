#pragma once

#include "subsel/partition.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace subsel {

/// Optimizer parameters. Defaults are the package defaults.
struct RunConfig {
    std::size_t npop = 100;
    std::size_t nelite = 5;
    bool keepbest = true;
    bool tabu = false;
    std::size_t tabumemsize = 1;
    double mutprob = 0.8;
    double mutintensity = 1.0; ///< Poisson mean of the swap count
    std::size_t niterations = 500;
    std::size_t minitbefstop = 100;
    std::size_t niterreg = 5;  ///< look-ahead runs in the first niterreg iterations
    double lambda = 1e-6;
    double tolconv = 1e-7;
    std::size_t workers = 1;
    std::uint64_t seed = 1;
    std::vector<std::vector<std::string>> init_pop;
};

/// Throws Error(InvalidConfig) when an invariant is violated.
void validate_config(const RunConfig& config);

/// Applies `key = value` pairs (keys are RunConfig field names, `#` starts a
/// comment, values may be quoted). init_pop is not settable from a file.
void apply_config_text(RunConfig& config, const std::string& text);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Sets a single field by name from its textual value.
void set_config_field(RunConfig& config, const std::string& key, const std::string& value);

struct RankedSolution {
    std::vector<std::string> members;
    double value = 0.0;
};

struct RunResult {
    std::vector<RankedSolution> ranked_solutions; ///< ascending by value, length nelite
    std::vector<double> trace;                    ///< best value after each iteration
    std::uint64_t seed_used = 0;
    std::size_t evaluations = 0;
    std::size_t tabu_forced = 0; ///< offspring accepted through the regeneration cap
};

} // namespace subsel
