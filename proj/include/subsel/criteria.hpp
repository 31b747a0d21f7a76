#pragma once

/// @file criteria.hpp
/// Criterion catalog, user registry and the per-run evaluation context.
///
/// A CriterionContext is built once per run from (P, plan, spec). Building it
/// resolves the criterion name, checks that every parameter the criterion
/// needs is present and precomputes the quantities that do not depend on the
/// training subset. Evaluation afterwards is a pure function of the training
/// rows and may run concurrently from many threads.

#include "subsel/formulas.hpp"
#include "subsel/labeled_matrix.hpp"
#include "subsel/partition.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subsel {

enum class AlignmentKernel { VanRaden, Scaled };

struct CriterionSpec {
    std::string name = "PEVMEAN";
    double lambda = 1e-6;
    std::optional<linalg::Matrix> contrast;         ///< C; identity when absent
    std::optional<LabeledMatrix> kernel_inverse;    ///< Kinv aligned to P's row ids
    std::optional<linalg::Matrix> fixed_design;     ///< W, one row per row of P; ones when absent
    std::optional<linalg::Matrix> target_kernel;    ///< alignment target; full-data kernel when absent
    std::optional<linalg::Vector> response;         ///< y for AICOLS / FITLOGDET
    std::optional<double> weight;                   ///< GAININB / FITLOGDET trade-off in [0, 1]
    AlignmentKernel alignment_kernel = AlignmentKernel::VanRaden;
    std::optional<linalg::Matrix> vg;               ///< multi-trait inputs (not supported)
    std::optional<linalg::Matrix> ve;
};

/// How a criterion interprets the rows of P.
enum class InputKind {
    Design,       ///< rows are design points
    Kernel,       ///< P is a square kernel or inverse kernel (type K)
    Features,     ///< rows are variables, columns are observations
    Observations, ///< rows are observations with a leading response/gain column
    Custom,
};

std::string_view to_string(InputKind kind);

class CriterionContext;

/// train_rows are row indices of P in canonical (candidate) order.
using CriterionFn = std::function<double(std::span<const std::size_t> train_rows, const CriterionContext& ctx)>;

struct CriterionInfo {
    std::string name;
    InputKind input = InputKind::Custom;
    std::vector<std::string> required;
    std::string formula;
    bool builtin = false;
};

/// Built-in catalog plus user registrations. Register everything before
/// building contexts; registration is not synchronized.
class CriterionRegistry {
  public:
    CriterionRegistry();

    /// Throws ShadowingBuiltin for catalog names and DuplicateName for
    /// repeated user names.
    void register_custom(const std::string& name, CriterionFn fn, std::string description = {});

    const CriterionInfo* find(const std::string& name) const;
    /// Catalog entries in listing order: the standard design criteria
    /// alphabetically, then the extras, then user registrations.
    std::vector<CriterionInfo> catalog() const;

    const CriterionFn* custom(const std::string& name) const;

  private:
    std::vector<CriterionInfo> builtins_;
    std::map<std::string, std::pair<CriterionInfo, CriterionFn>> custom_;
};

/// Names of the built-in criteria (standard design criteria, then the extras).
const std::vector<std::string>& builtin_criterion_names();

class CriterionContext {
  public:
    /// Throws UnknownCriterion, MissingParameter, UnsupportedCriterion,
    /// SizeError or NotPositiveDefinite when the inputs cannot support the
    /// named criterion.
    CriterionContext(const LabeledMatrix& P, PartitionPlan plan, CriterionSpec spec,
                     const CriterionRegistry& registry = CriterionRegistry());

    /// Criterion value for a training set given as rows of P. Rows are put in
    /// canonical order first, so the value does not depend on their order.
    double evaluate_rows(std::span<const std::size_t> train_rows) const;
    double evaluate(const SubsetSolution& solution) const;
    double evaluate_ids(const std::vector<std::string>& ids) const;

    const LabeledMatrix& data() const noexcept { return *data_; }
    const PartitionPlan& plan() const noexcept { return plan_; }
    const CriterionSpec& spec() const noexcept { return spec_; }
    const CriterionInfo& info() const noexcept { return info_; }

    /// Target rows for a training set: the test rows when the plan has a test
    /// set, otherwise every row of P not in train.
    std::vector<std::size_t> target_rows(std::span<const std::size_t> sorted_train_rows) const;

    struct Cache;

  private:
    double dispatch(std::span<const std::size_t> sorted_rows) const;

    std::shared_ptr<const LabeledMatrix> data_;
    PartitionPlan plan_;
    CriterionSpec spec_;
    CriterionInfo info_;
    CriterionFn custom_;
    std::shared_ptr<const Cache> cache_;
};

} // namespace subsel
