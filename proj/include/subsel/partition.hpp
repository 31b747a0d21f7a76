#pragma once

#include "subsel/error.hpp"
#include "subsel/labeled_matrix.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace subsel {

/// Candidate/test split of the rows of P plus the subset size to select.
///
/// Candidates are stored in byte-wise lexicographic order. Candidate position
/// i therefore orders exactly as its identifier does, and every index-based
/// ordering in the engine doubles as the canonical identifier ordering.
struct PartitionPlan {
    std::vector<std::string> candidates;
    std::vector<std::size_t> candidate_rows; ///< row of P for each candidate
    std::optional<std::vector<std::string>> test;
    std::vector<std::size_t> test_rows;      ///< empty when test is absent
    std::size_t ntoselect = 0;
    std::size_t total_rows = 0;              ///< rows of P

    std::size_t num_candidates() const noexcept { return candidates.size(); }
    bool has_test() const noexcept { return test.has_value(); }
};

/// Builds a validated plan. When candidates is nullopt, every row of P not in
/// test is a candidate.
PartitionPlan validate_partition(const LabeledMatrix& P,
                                 const std::optional<std::vector<std::string>>& candidates,
                                 const std::optional<std::vector<std::string>>& test,
                                 std::size_t ntoselect);

/// A fixed-size set of candidates, stored as ascending candidate positions.
class SubsetSolution {
  public:
    SubsetSolution() = default;
    /// Sorts the given positions. Does not validate.
    explicit SubsetSolution(std::vector<std::uint32_t> members);

    const std::vector<std::uint32_t>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool contains(std::uint32_t candidate) const;

    /// Identifiers in canonical (lexicographic) order.
    std::vector<std::string> ids(const PartitionPlan& plan) const;
    /// Rows of P, ascending in candidate order.
    std::vector<std::size_t> rows(const PartitionPlan& plan) const;

    std::size_t hash() const noexcept;

    friend bool operator==(const SubsetSolution&, const SubsetSolution&) = default;
    friend auto operator<=>(const SubsetSolution& a, const SubsetSolution& b) {
        return a.members_ <=> b.members_;
    }

  private:
    std::vector<std::uint32_t> members_;
};

struct SubsetHash {
    std::size_t operator()(const SubsetSolution& s) const noexcept { return s.hash(); }
};

/// Maps identifiers onto a solution. Throws Error(code) when an id is not a
/// candidate, is repeated, or the size differs from plan.ntoselect.
SubsetSolution solution_from_ids(const PartitionPlan& plan, const std::vector<std::string>& ids,
                                 ErrorCode code);

/// True when the solution has ntoselect distinct in-range members.
bool is_valid_solution(const SubsetSolution& s, const PartitionPlan& plan);

} // namespace subsel
