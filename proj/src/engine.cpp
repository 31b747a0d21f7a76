#include "subsel/engine.hpp"

#include "subsel/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace subsel {

void TabuMemory::push(const Population& generation) {
    if (capacity_ == 0) return;
    snapshots_.emplace_back(generation.solutions.begin(), generation.solutions.end());
    while (snapshots_.size() > capacity_) snapshots_.pop_front();
}

bool TabuMemory::contains(const SubsetSolution& s) const {
    return std::any_of(snapshots_.begin(), snapshots_.end(), [&](const auto& snap) { return snap.contains(s); });
}

bool tabu_filter(const SubsetSolution& child, const TabuMemory& memory) { return !memory.contains(child); }

namespace {

SubsetSolution random_subset(std::size_t m, std::size_t n, RngStream& rng) {
    // Floyd's algorithm: uniform n-subset of [0, m).
    std::unordered_set<std::uint32_t> chosen;
    chosen.reserve(n * 2);
    std::vector<std::uint32_t> members;
    members.reserve(n);
    for (std::size_t j = m - n; j < m; ++j) {
        const auto t = static_cast<std::uint32_t>(rng.index(j + 1));
        const auto pick = chosen.contains(t) ? static_cast<std::uint32_t>(j) : t;
        chosen.insert(pick);
        members.push_back(pick);
    }
    return SubsetSolution(std::move(members));
}

std::string describe(const SubsetSolution& s, const PartitionPlan& plan) {
    std::string out;
    for (const auto& id : s.ids(plan)) {
        if (!out.empty()) out += ',';
        out += id;
    }
    return out;
}

bool ranks_before(double va, const SubsetSolution& a, double vb, const SubsetSolution& b) {
    if (va != vb) return va < vb;
    return a < b;
}

/// Best distinct solutions seen so far, ascending by (value, members).
class Archive {
  public:
    explicit Archive(std::size_t capacity) : capacity_(capacity) {}

    void offer(const SubsetSolution& s, double v) {
        if (entries_.size() == capacity_ && !ranks_before(v, s, entries_.back().second, entries_.back().first)) return;
        for (const auto& e : entries_) {
            if (e.first == s) return;
        }
        auto pos = std::find_if(entries_.begin(), entries_.end(),
                                [&](const auto& e) { return ranks_before(v, s, e.second, e.first); });
        entries_.insert(pos, {s, v});
        if (entries_.size() > capacity_) entries_.pop_back();
    }

    double best() const { return entries_.empty() ? std::numeric_limits<double>::infinity() : entries_.front().second; }
    const std::vector<std::pair<SubsetSolution, double>>& entries() const { return entries_; }

  private:
    std::size_t capacity_;
    std::vector<std::pair<SubsetSolution, double>> entries_;
};

} // namespace

Population init_population(const PartitionPlan& plan, const RunConfig& config, RngStream& rng) {
    Population pop;
    pop.solutions.reserve(config.npop);
    for (const auto& ids : config.init_pop) {
        if (pop.solutions.size() == config.npop) break;
        pop.solutions.push_back(solution_from_ids(plan, ids, ErrorCode::InvalidInitPop));
    }
    while (pop.solutions.size() < config.npop) {
        pop.solutions.push_back(random_subset(plan.num_candidates(), plan.ntoselect, rng));
    }
    return pop;
}

std::vector<double> evaluate_population(const Population& pop, const CriterionContext& ctx, const WorkerPool& pool) {
    std::vector<double> fitness(pop.solutions.size());
    pool.parallel_for(pop.solutions.size(), [&](std::size_t i) {
        const auto& s = pop.solutions[i];
        double v = 0.0;
        try {
            v = ctx.evaluate(s);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " (solution " + describe(s, ctx.plan()) + ")");
        } catch (const std::exception& e) {
            throw Error(ErrorCode::CriterionFailure,
                        std::string(e.what()) + " (solution " + describe(s, ctx.plan()) + ")");
        }
        if (std::isnan(v)) {
            throw Error(ErrorCode::CriterionFailure,
                        "criterion returned NaN (solution " + describe(s, ctx.plan()) + ")");
        }
        fitness[i] = v;
    });
    return fitness;
}

std::vector<std::size_t> select_elites(const Population& pop, std::span<const double> fitness, std::size_t nelite) {
    std::vector<std::size_t> order(pop.solutions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t k = std::min(nelite, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (ranks_before(fitness[a], pop.solutions[a], fitness[b], pop.solutions[b])) return true;
                          if (ranks_before(fitness[b], pop.solutions[b], fitness[a], pop.solutions[a])) return false;
                          return a < b;
                      });
    order.resize(k);
    return order;
}

SubsetSolution lookahead_solution(const Population& pop, std::span<const double> fitness, const PartitionPlan& plan) {
    const auto npop = static_cast<Eigen::Index>(pop.solutions.size());
    const auto m = static_cast<Eigen::Index>(plan.num_candidates());
    const double scale = static_cast<double>(npop);

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(npop, m);
    for (Eigen::Index i = 0; i < npop; ++i) {
        for (auto c : pop.solutions[static_cast<std::size_t>(i)].members()) b(i, c) = 1.0;
    }
    Eigen::VectorXd f(npop);
    for (Eigen::Index i = 0; i < npop; ++i) f[i] = fitness[static_cast<std::size_t>(i)];
    f.array() -= f.mean();

    Eigen::VectorXd effects;
    if (npop >= m) {
        Eigen::MatrixXd g = b.transpose() * b / scale;
        g.diagonal().array() += kLookaheadShrinkage;
        effects = g.llt().solve(b.transpose() * f / scale);
    } else {
        // (B'B/N + aI)^-1 B'/N = B' (BB'/N + aI)^-1 / N
        Eigen::MatrixXd h = b * b.transpose() / scale;
        h.diagonal().array() += kLookaheadShrinkage;
        effects = b.transpose() * h.llt().solve(f) / scale;
    }

    std::vector<std::uint32_t> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0u);
    const auto n = static_cast<std::ptrdiff_t>(plan.ntoselect);
    std::partial_sort(order.begin(), order.begin() + n, order.end(), [&](std::uint32_t x, std::uint32_t y) {
        if (effects[x] != effects[y]) return effects[x] < effects[y];
        return x < y;
    });
    order.resize(plan.ntoselect);
    return SubsetSolution(std::move(order));
}

SubsetSolution crossover(const SubsetSolution& a, const SubsetSolution& b, RngStream& rng) {
    std::vector<std::uint32_t> pool;
    std::vector<std::size_t> weight;
    const auto& am = a.members();
    const auto& bm = b.members();
    std::size_t i = 0, j = 0;
    while (i < am.size() || j < bm.size()) {
        if (j == bm.size() || (i < am.size() && am[i] < bm[j])) {
            pool.push_back(am[i++]);
            weight.push_back(1);
        } else if (i == am.size() || bm[j] < am[i]) {
            pool.push_back(bm[j++]);
            weight.push_back(1);
        } else {
            pool.push_back(am[i]);
            weight.push_back(2);
            ++i;
            ++j;
        }
    }

    const std::size_t n = am.size();
    std::size_t total = std::accumulate(weight.begin(), weight.end(), std::size_t{0});
    std::vector<std::uint32_t> child;
    child.reserve(n);
    for (std::size_t draw = 0; draw < n; ++draw) {
        std::size_t u = rng.index(total);
        std::size_t k = 0;
        while (u >= weight[k]) u -= weight[k++];
        child.push_back(pool[k]);
        total -= weight[k];
        weight[k] = 0;
    }
    return SubsetSolution(std::move(child));
}

SubsetSolution swap_members(const SubsetSolution& s, const PartitionPlan& plan, std::size_t k, RngStream& rng) {
    const std::size_t m = plan.num_candidates();
    std::vector<std::uint32_t> members = s.members();
    std::vector<std::uint32_t> outside;
    outside.reserve(m - members.size());
    for (std::uint32_t c = 0, t = 0; c < m; ++c) {
        if (t < members.size() && members[t] == c) {
            ++t;
            continue;
        }
        outside.push_back(c);
    }
    k = std::min({k, outside.size(), members.size()});
    for (std::size_t r = 0; r < k; ++r) {
        std::swap(members[r], members[r + rng.index(members.size() - r)]);
        std::swap(outside[r], outside[r + rng.index(outside.size() - r)]);
    }
    for (std::size_t r = 0; r < k; ++r) members[r] = outside[r];
    return SubsetSolution(std::move(members));
}

Mutation mutate_counted(const SubsetSolution& child, const PartitionPlan& plan, const RunConfig& config,
                        RngStream& rng) {
    if (!(rng.uniform() < config.mutprob)) return {child, 0};
    const std::size_t k = std::clamp<std::size_t>(rng.poisson(config.mutintensity), 1, plan.ntoselect);
    const std::size_t room = plan.num_candidates() - plan.ntoselect;
    return {swap_members(child, plan, k, rng), std::min(k, room)};
}

SubsetSolution mutate(const SubsetSolution& child, const PartitionPlan& plan, const RunConfig& config, RngStream& rng) {
    return mutate_counted(child, plan, config, rng).solution;
}

RunResult run_lagat(const CriterionContext& ctx, const RunConfig& config, const RunOptions& options) {
    validate_config(config);
    const PartitionPlan& plan = ctx.plan();
    RngStream rng(config.seed);
    WorkerPool workers(config.workers);
    TabuMemory memory(config.tabu ? config.tabumemsize : 0);
    Archive archive(config.nelite);

    RunResult result;
    result.seed_used = config.seed;

    Population pop = init_population(plan, config, rng);
    std::vector<Origin> origins(pop.solutions.size(), Origin::Initial);

    double reference = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;

    for (std::size_t iter = 0; iter < config.niterations; ++iter) {
        pop.generation = iter;
        const std::vector<double> fitness = evaluate_population(pop, ctx, workers);
        result.evaluations += fitness.size();
        if (options.observer) options.observer(GenerationView{iter, pop, origins, fitness, memory});

        for (std::size_t i = 0; i < fitness.size(); ++i) archive.offer(pop.solutions[i], fitness[i]);
        result.trace.push_back(*std::min_element(fitness.begin(), fitness.end()));

        if (archive.best() < reference - config.tolconv) {
            reference = archive.best();
            stall = 0;
        } else {
            ++stall;
        }
        if (options.log && options.log_every > 0 && iter % options.log_every == 0) {
            *options.log << "iteration " << iter << " best " << archive.best() << '\n';
        }
        if (stall >= config.minitbefstop || iter + 1 == config.niterations) break;

        const auto elites = select_elites(pop, fitness, config.nelite);
        Population next;
        next.solutions.reserve(config.npop);
        std::vector<Origin> next_origins;
        next_origins.reserve(config.npop);
        if (iter < config.niterreg) {
            next.solutions.push_back(lookahead_solution(pop, fitness, plan));
            next_origins.push_back(Origin::Lookahead);
        }
        if (config.keepbest) {
            next.solutions.push_back(pop.solutions[elites.front()]);
            next_origins.push_back(Origin::Elite);
        }
        memory.push(pop);

        std::size_t rejections = 0;
        while (next.solutions.size() < config.npop) {
            const auto& a = pop.solutions[elites[rng.index(elites.size())]];
            const auto& b = pop.solutions[elites[rng.index(elites.size())]];
            SubsetSolution child = mutate(crossover(a, b, rng), plan, config, rng);
            if (tabu_filter(child, memory)) {
                rejections = 0;
                next.solutions.push_back(std::move(child));
                next_origins.push_back(Origin::Offspring);
            } else if (++rejections > kTabuRegenerationCap) {
                rejections = 0;
                ++result.tabu_forced;
                next.solutions.push_back(swap_members(child, plan, 1, rng));
                next_origins.push_back(Origin::ForcedOffspring);
            }
        }
        pop = std::move(next);
        origins = std::move(next_origins);
    }

    for (const auto& [s, v] : archive.entries()) result.ranked_solutions.push_back({s.ids(plan), v});
    return result;
}

RunResult run_lagat(const LabeledMatrix& P, const PartitionPlan& plan, CriterionSpec spec, const RunConfig& config,
                    const CriterionRegistry& registry, const RunOptions& options) {
    validate_config(config);
    spec.lambda = config.lambda;
    const CriterionContext ctx(P, plan, std::move(spec), registry);
    return run_lagat(ctx, config, options);
}

RunResult run_islands(const CriterionContext& ctx, const RunConfig& config, std::size_t islands, std::size_t rounds,
                      const RunOptions& options) {
    if (islands < 1) throw Error(ErrorCode::InvalidConfig, "islands must be at least 1");
    if (rounds < 1) throw Error(ErrorCode::InvalidConfig, "rounds must be at least 1");
    validate_config(config);

    std::vector<std::vector<std::string>> pooled = config.init_pop;
    for (std::size_t round = 0; round + 1 < rounds; ++round) {
        std::vector<std::vector<std::string>> next_pool;
        for (std::size_t island = 0; island < islands; ++island) {
            RunConfig c = config;
            c.seed = derive_seed(config.seed, island, round);
            c.init_pop = pooled;
            const RunResult r = run_lagat(ctx, c, options);
            for (const auto& s : r.ranked_solutions) next_pool.push_back(s.members);
        }
        pooled = std::move(next_pool);
    }
    RunConfig last = config;
    last.seed = derive_seed(config.seed, 0, rounds - 1);
    last.init_pop = std::move(pooled);
    return run_lagat(ctx, last, options);
}

RunResult run_islands(const LabeledMatrix& P, const PartitionPlan& plan, CriterionSpec spec, const RunConfig& config,
                      std::size_t islands, std::size_t rounds, const CriterionRegistry& registry,
                      const RunOptions& options) {
    validate_config(config);
    spec.lambda = config.lambda;
    const CriterionContext ctx(P, plan, std::move(spec), registry);
    return run_islands(ctx, config, islands, rounds, options);
}

} // namespace subsel
