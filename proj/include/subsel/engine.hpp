#pragma once

/// @file engine.hpp
/// Look-ahead genetic algorithm with tabu memory for fixed-size subset
/// selection, plus its individual operators and an island-model driver.

#include "subsel/config.hpp"
#include "subsel/criteria.hpp"
#include "subsel/partition.hpp"
#include "subsel/rng.hpp"
#include "subsel/worker_pool.hpp"

#include <deque>
#include <functional>
#include <iosfwd>
#include <span>
#include <unordered_set>
#include <vector>

namespace subsel {

struct Population {
    std::vector<SubsetSolution> solutions;
    std::size_t generation = 0;
};

/// Where a population member came from.
enum class Origin { Initial, Lookahead, Elite, Offspring, ForcedOffspring };

/// Generations of solutions that offspring may not repeat.
class TabuMemory {
  public:
    explicit TabuMemory(std::size_t capacity = 0) : capacity_(capacity) {}

    /// Stores a generation snapshot, dropping the oldest beyond capacity.
    void push(const Population& generation);
    bool contains(const SubsetSolution& s) const;
    std::size_t size() const noexcept { return snapshots_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }

  private:
    std::size_t capacity_;
    std::deque<std::unordered_set<SubsetSolution, SubsetHash>> snapshots_;
};

/// Accept flag: false when the child appears in any stored generation.
bool tabu_filter(const SubsetSolution& child, const TabuMemory& memory);

/// init_pop entries first (validated, InvalidInitPop on failure, truncated to
/// npop), then uniform random ntoselect-subsets of the candidates.
Population init_population(const PartitionPlan& plan, const RunConfig& config, RngStream& rng);

/// fitness[i] = criterion(pop.solutions[i]). Criterion errors are rethrown
/// with the offending solution's ids appended to the message.
std::vector<double> evaluate_population(const Population& pop, const CriterionContext& ctx, const WorkerPool& pool);

/// Indices of the nelite best solutions ordered by (fitness, members).
std::vector<std::size_t> select_elites(const Population& pop, std::span<const double> fitness, std::size_t nelite);

/// Ridge regression of centered fitness on the 0/1 membership matrix; the
/// ntoselect candidates with the smallest estimated effects, ties by position.
SubsetSolution lookahead_solution(const Population& pop, std::span<const double> fitness, const PartitionPlan& plan);

/// Internal shrinkage on the membership Gram matrix divided by npop.
inline constexpr double kLookaheadShrinkage = 1e-6;

/// Weighted sampling without replacement from the union of the parents
/// (weight 2 for shared members, 1 otherwise).
SubsetSolution crossover(const SubsetSolution& a, const SubsetSolution& b, RngStream& rng);

/// Replaces k distinct members by k distinct non-members, k capped at the
/// number of non-members.
SubsetSolution swap_members(const SubsetSolution& s, const PartitionPlan& plan, std::size_t k, RngStream& rng);

struct Mutation {
    SubsetSolution solution;
    std::size_t swaps = 0;
};

/// With probability mutprob draws k ~ Poisson(mutintensity) clamped to
/// [1, ntoselect] and swaps k members; otherwise returns the child.
Mutation mutate_counted(const SubsetSolution& child, const PartitionPlan& plan, const RunConfig& config, RngStream& rng);
SubsetSolution mutate(const SubsetSolution& child, const PartitionPlan& plan, const RunConfig& config, RngStream& rng);

/// Consecutive tabu rejections after which an offspring is accepted with one
/// extra forced swap.
inline constexpr std::size_t kTabuRegenerationCap = 50;

/// Snapshot handed to an observer once per evaluated generation. memory is
/// the tabu memory that filtered this generation's offspring.
struct GenerationView {
    std::size_t iteration;
    const Population& population;
    std::span<const Origin> origins;
    std::span<const double> fitness;
    const TabuMemory& memory;
};

struct RunOptions {
    std::function<void(const GenerationView&)> observer;
    std::ostream* log = nullptr;
    std::size_t log_every = 0; ///< iteration log period; 0 disables
};

/// Runs the optimizer with an already built criterion context.
RunResult run_lagat(const CriterionContext& ctx, const RunConfig& config, const RunOptions& options = {});

/// Builds the criterion context (criterion lambda taken from config.lambda)
/// and runs the optimizer.
RunResult run_lagat(const LabeledMatrix& P, const PartitionPlan& plan, CriterionSpec spec, const RunConfig& config,
                    const CriterionRegistry& registry = CriterionRegistry(), const RunOptions& options = {});

/// Island model: rounds - 1 rounds of `islands` independent runs, each round
/// seeding the next with the pooled elites, then one consolidating run.
/// Seeds are derive_seed(config.seed, island, round).
RunResult run_islands(const CriterionContext& ctx, const RunConfig& config, std::size_t islands, std::size_t rounds,
                      const RunOptions& options = {});
RunResult run_islands(const LabeledMatrix& P, const PartitionPlan& plan, CriterionSpec spec, const RunConfig& config,
                      std::size_t islands, std::size_t rounds,
                      const CriterionRegistry& registry = CriterionRegistry(), const RunOptions& options = {});

} // namespace subsel
