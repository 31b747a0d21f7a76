#include "subsel/oracle.hpp"

#include "subsel/error.hpp"
#include "subsel/worker_pool.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace subsel {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 out = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        out = out * (n - k + i) / i;
        if (out > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(out);
}

std::vector<std::uint32_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k) {
    std::vector<std::uint32_t> out;
    out.reserve(k);
    std::size_t next = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
        for (std::size_t c = next; c < n; ++c) {
            const std::uint64_t after = binomial(n - c - 1, k - slot - 1);
            if (rank < after) {
                out.push_back(static_cast<std::uint32_t>(c));
                next = c + 1;
                break;
            }
            rank -= after;
        }
    }
    return out;
}

namespace {

bool next_combination(std::vector<std::uint32_t>& comb, std::size_t n) {
    const std::size_t k = comb.size();
    std::size_t i = k;
    while (i > 0) {
        --i;
        if (comb[i] < n - k + i) {
            ++comb[i];
            for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
            return true;
        }
    }
    return false;
}

struct ChunkResult {
    double min_value = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::vector<std::uint32_t>, double>> near; ///< within tolerance of the chunk minimum
};

} // namespace

EnumerationResult enumerate_best(const CriterionContext& ctx, const EnumerationOptions& options) {
    const PartitionPlan& plan = ctx.plan();
    const std::size_t n = plan.num_candidates();
    const std::size_t k = plan.ntoselect;
    const std::uint64_t total = binomial(n, k);
    if (total > options.cap) {
        throw Error(ErrorCode::TooLarge, "enumeration of C(" + std::to_string(n) + ", " + std::to_string(k) +
                                             ") subsets exceeds the cap of " + std::to_string(options.cap));
    }

    const std::size_t workers = std::max<std::size_t>(1, options.workers);
    const std::uint64_t chunks = std::min<std::uint64_t>(total, workers * 16);
    std::vector<ChunkResult> results(chunks);
    const double tol = options.tie_tolerance;

    WorkerPool(workers).parallel_for(chunks, [&](std::size_t c) {
        const std::uint64_t begin = total * c / chunks;
        const std::uint64_t end = total * (c + 1) / chunks;
        auto comb = unrank_combination(begin, n, k);
        std::vector<std::size_t> rows(k);
        ChunkResult& out = results[c];
        for (std::uint64_t r = begin; r < end; ++r) {
            for (std::size_t i = 0; i < k; ++i) rows[i] = plan.candidate_rows[comb[i]];
            const double v = ctx.evaluate_rows(rows);
            if (std::isnan(v)) throw Error(ErrorCode::CriterionFailure, "criterion returned NaN");
            if (v < out.min_value) {
                out.min_value = v;
                std::erase_if(out.near, [&](const auto& e) { return e.second > v + tol; });
            }
            if (v <= out.min_value + tol) out.near.emplace_back(comb, v);
            if (r + 1 < end) next_combination(comb, n);
        }
    });

    EnumerationResult result;
    result.subsets_evaluated = total;
    result.min_value = std::numeric_limits<double>::infinity();
    for (const auto& c : results) result.min_value = std::min(result.min_value, c.min_value);
    for (const auto& c : results) {
        for (const auto& [comb, v] : c.near) {
            if (v <= result.min_value + tol) result.argmin_solutions.emplace_back(comb);
        }
    }
    return result;
}

BaselineResult random_baseline(const CriterionContext& ctx, std::size_t reps, RngStream& rng) {
    if (reps < 1) throw Error(ErrorCode::InvalidConfig, "reps must be at least 1");
    const PartitionPlan& plan = ctx.plan();
    BaselineResult out;
    out.values.reserve(reps);
    std::vector<std::uint32_t> positions(plan.num_candidates());
    for (std::size_t r = 0; r < reps; ++r) {
        std::iota(positions.begin(), positions.end(), 0u);
        for (std::size_t i = 0; i < plan.ntoselect; ++i) {
            std::swap(positions[i], positions[i + rng.index(positions.size() - i)]);
        }
        SubsetSolution s(std::vector<std::uint32_t>(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(plan.ntoselect)));
        out.values.push_back(ctx.evaluate(s));
    }
    out.min = *std::min_element(out.values.begin(), out.values.end());
    out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) / static_cast<double>(reps);
    if (reps > 1) {
        double ss = 0.0;
        for (double v : out.values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(reps - 1));
    }
    return out;
}

} // namespace subsel
