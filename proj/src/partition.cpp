#include "subsel/partition.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace subsel {

PartitionPlan validate_partition(const LabeledMatrix& P,
                                 const std::optional<std::vector<std::string>>& candidates,
                                 const std::optional<std::vector<std::string>>& test,
                                 std::size_t ntoselect) {
    PartitionPlan plan;
    plan.total_rows = P.rows();

    std::unordered_set<std::string> test_set;
    if (test) {
        for (const auto& id : *test) {
            P.row_index(id);
            if (!test_set.insert(id).second) {
                throw Error(ErrorCode::DuplicateId, "test identifier '" + id + "' listed twice");
            }
        }
        plan.test = *test;
        for (const auto& id : *test) plan.test_rows.push_back(P.row_index(id));
    }

    if (candidates) {
        std::unordered_set<std::string> seen;
        for (const auto& id : *candidates) {
            P.row_index(id);
            if (test_set.contains(id)) {
                throw Error(ErrorCode::OverlapError, "identifier '" + id + "' is both candidate and test");
            }
            if (!seen.insert(id).second) {
                throw Error(ErrorCode::DuplicateId, "candidate identifier '" + id + "' listed twice");
            }
        }
        plan.candidates = *candidates;
    } else {
        for (const auto& id : P.row_ids()) {
            if (!test_set.contains(id)) plan.candidates.push_back(id);
        }
    }
    std::sort(plan.candidates.begin(), plan.candidates.end());
    for (const auto& id : plan.candidates) plan.candidate_rows.push_back(P.row_index(id));

    if (ntoselect < 1 || ntoselect > plan.candidates.size()) {
        throw Error(ErrorCode::SizeError, "ntoselect " + std::to_string(ntoselect) +
                                              " is outside [1, " + std::to_string(plan.candidates.size()) +
                                              "]");
    }
    plan.ntoselect = ntoselect;
    return plan;
}

SubsetSolution::SubsetSolution(std::vector<std::uint32_t> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
}

bool SubsetSolution::contains(std::uint32_t candidate) const {
    return std::binary_search(members_.begin(), members_.end(), candidate);
}

std::vector<std::string> SubsetSolution::ids(const PartitionPlan& plan) const {
    std::vector<std::string> out;
    out.reserve(members_.size());
    for (auto m : members_) out.push_back(plan.candidates[m]);
    return out;
}

std::vector<std::size_t> SubsetSolution::rows(const PartitionPlan& plan) const {
    std::vector<std::size_t> out;
    out.reserve(members_.size());
    for (auto m : members_) out.push_back(plan.candidate_rows[m]);
    return out;
}

std::size_t SubsetSolution::hash() const noexcept {
    // FNV-1a over the member positions
    std::uint64_t h = 1469598103934665603ULL;
    for (auto m : members_) {
        for (int b = 0; b < 4; ++b) {
            h ^= (m >> (8 * b)) & 0xffU;
            h *= 1099511628211ULL;
        }
    }
    return static_cast<std::size_t>(h);
}

SubsetSolution solution_from_ids(const PartitionPlan& plan, const std::vector<std::string>& ids,
                                 ErrorCode code) {
    if (ids.size() != plan.ntoselect) {
        throw Error(code, "solution has " + std::to_string(ids.size()) + " members, expected " +
                              std::to_string(plan.ntoselect));
    }
    std::vector<std::uint32_t> members;
    members.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = std::lower_bound(plan.candidates.begin(), plan.candidates.end(), id);
        if (it == plan.candidates.end() || *it != id) {
            throw Error(code, "solution member '" + id + "' is not a candidate");
        }
        members.push_back(static_cast<std::uint32_t>(it - plan.candidates.begin()));
    }
    SubsetSolution s(std::move(members));
    if (std::adjacent_find(s.members().begin(), s.members().end()) != s.members().end()) {
        throw Error(code, "solution has a repeated member");
    }
    return s;
}

bool is_valid_solution(const SubsetSolution& s, const PartitionPlan& plan) {
    const auto& m = s.members();
    if (m.size() != plan.ntoselect) return false;
    if (!std::is_sorted(m.begin(), m.end())) return false;
    if (std::adjacent_find(m.begin(), m.end()) != m.end()) return false;
    return m.empty() || m.back() < plan.num_candidates();
}

} // namespace subsel
