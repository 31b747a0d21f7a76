#include "subsel/criteria.hpp"

#include "subsel/error.hpp"

#include <algorithm>
#include <cmath>

namespace subsel {

using linalg::Matrix;
using linalg::Vector;

namespace {

enum class Family { X, PevMeanMM, CdMeanMM, GaussMeanMM, Maximin, KernelAlign, AicOls, FitLogdet, Dfbetas, GainInb, Custom };

struct BuiltinDef {
    const char* name;
    Family family;
    InputKind input;
    std::vector<std::string> required;
    const char* formula;
};

const std::vector<BuiltinDef>& builtin_defs() {
    static const std::vector<BuiltinDef> defs = {
        {"AOPT", Family::X, InputKind::Design, {"lambda"}, "trace[C (X_tr'X_tr + lambda I)^-1 C']"},
        {"CDMAX", Family::X, InputKind::Design, {"lambda"}, "max[diag(C X_te G^-1 X_te' C') / diag(C X_te X_te' C')], G = X_tr'X_tr + lambda I"},
        {"CDMAX0", Family::X, InputKind::Design, {"lambda"}, "max[diag(C X_tr G^-1 X_tr' C') / diag(C X_tr X_tr' C')]"},
        {"CDMAX2", Family::X, InputKind::Design, {"lambda"}, "max[diag(C X_te G^-1 X_tr'X_tr G^-1 X_te' C') / diag(C X_te X_te' C')]"},
        {"CDMEAN", Family::X, InputKind::Design, {"lambda"}, "mean[diag(C X_te G^-1 X_te' C') / diag(C X_te X_te' C')]"},
        {"CDMEAN0", Family::X, InputKind::Design, {"lambda"}, "mean[diag(C X_tr G^-1 X_tr' C') / diag(C X_tr X_tr' C')]"},
        {"CDMEAN2", Family::X, InputKind::Design, {"lambda"}, "mean[diag(C X_te G^-1 X_tr'X_tr G^-1 X_te' C') / diag(C X_te X_te' C')]"},
        {"CDMEANMM", Family::CdMeanMM, InputKind::Kernel, {"lambda", "kernel_inverse|P", "fixed_design"},
         "-mean[diag(C Z_te (K - lambda (Z_tr'M Z_tr + lambda Kinv)^-1) Z_te' C') / diag(C Z_te K Z_te' C')], M = I - W(W'W)^-W'"},
        {"DOPT", Family::X, InputKind::Design, {"lambda"}, "logdet(C (X_tr'X_tr + lambda I)^-1 C')"},
        {"EOPT", Family::X, InputKind::Design, {"lambda"}, "max(eigenval(C (X_tr'X_tr + lambda I)^-1 C'))"},
        {"GAUSSMEANMM", Family::GaussMeanMM, InputKind::Kernel, {"lambda"},
         "-mean(diag(Z_te K Z_te' - Z_te K Z_tr' (Z_tr K Z_tr' + lambda I)^-1 Z_tr K Z_te'))"},
        {"GOPTPEV", Family::X, InputKind::Design, {"lambda"}, "max(eigenval(C X_te G^-1 X_te' C'))"},
        {"GOPTPEV2", Family::X, InputKind::Design, {"lambda"}, "mean(eigenval(C X_te G^-1 X_te' C'))"},
        {"PEVMAX", Family::X, InputKind::Design, {"lambda"}, "max(diag(C X_te G^-1 X_te' C'))"},
        {"PEVMAX0", Family::X, InputKind::Design, {"lambda"}, "max(diag(C X_tr G^-1 X_tr' C'))"},
        {"PEVMAX2", Family::X, InputKind::Design, {"lambda"}, "max[diag(C X_te G^-1 X_tr'X_tr G^-1 X_te' C')]"},
        {"PEVMEAN", Family::X, InputKind::Design, {"lambda"}, "mean(diag(C X_te G^-1 X_te' C'))"},
        {"PEVMEAN0", Family::X, InputKind::Design, {"lambda"}, "mean(diag(C X_tr G^-1 X_tr' C'))"},
        {"PEVMEAN2", Family::X, InputKind::Design, {"lambda"}, "mean[diag(C X_te G^-1 X_tr'X_tr G^-1 X_te' C')]"},
        {"PEVMEANMM", Family::PevMeanMM, InputKind::Kernel, {"lambda", "kernel_inverse|P", "fixed_design"},
         "mean(diag(C Z_te (Z_tr'M Z_tr + lambda Kinv)^-1 Z_te' C')), M = I - W(W'W)^-W'"},
        {"MAXIMIN", Family::Maximin, InputKind::Design, {}, "-min_{i != j in train} ||x_i - x_j||"},
        {"KERNELALIGN", Family::KernelAlign, InputKind::Features, {"target_kernel (optional)", "alignment_kernel"},
         "mean((lowertri(A_target) - lowertri(A(selected features)))^2)"},
        {"AICOLS", Family::AicOls, InputKind::Features, {"response"},
         "n [log(2 pi) + log(RSS/n) + 1] + 2 (k + 2), OLS of y on [1, selected]"},
        {"DFBETAS", Family::Dfbetas, InputKind::Observations, {"lambda"},
         "-(B - B_tr)'(X_tr'X_tr + lambda I)(B - B_tr) / sd(resid_tr)"},
        {"GAININB", Family::GainInb, InputKind::Observations, {"weight"},
         "-(1 - w) mean(g_tr) + w mean(lowertri(A(markers_tr + 1)))"},
        {"FITLOGDET", Family::FitLogdet, InputKind::Features, {"response", "weight"},
         "(1 - w) mean(resid^2) - w logdet(X_k'X_k)"},
    };
    return defs;
}

const BuiltinDef* find_builtin(const std::string& name) {
    for (const auto& d : builtin_defs()) {
        if (name == d.name) return &d;
    }
    return nullptr;
}

[[noreturn]] void size_error(const std::string& msg) { throw Error(ErrorCode::SizeError, msg); }

[[noreturn]] void missing(const std::string& crit, const std::string& param) {
    throw Error(ErrorCode::MissingParameter, "criterion " + crit + " requires parameter '" + param + "'");
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Matrix select_cols(const Matrix& m, std::span<const std::size_t> cols) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
    return out;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

} // namespace

std::string_view to_string(InputKind kind) {
    switch (kind) {
    case InputKind::Design: return "design";
    case InputKind::Kernel: return "kernel";
    case InputKind::Features: return "features";
    case InputKind::Observations: return "observations";
    case InputKind::Custom: return "custom";
    }
    return "custom";
}

const std::vector<std::string>& builtin_criterion_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& d : builtin_defs()) out.emplace_back(d.name);
        return out;
    }();
    return names;
}

CriterionRegistry::CriterionRegistry() {
    for (const auto& d : builtin_defs()) {
        builtins_.push_back({d.name, d.input, d.required, d.formula, true});
    }
}

void CriterionRegistry::register_custom(const std::string& name, CriterionFn fn, std::string description) {
    if (name.empty()) throw Error(ErrorCode::InvalidConfig, "criterion name must not be empty");
    if (find_builtin(name)) throw Error(ErrorCode::ShadowingBuiltin, "'" + name + "' is a built-in criterion");
    if (custom_.contains(name)) throw Error(ErrorCode::DuplicateName, "criterion '" + name + "' is already registered");
    if (!fn) throw Error(ErrorCode::InvalidConfig, "criterion function must not be empty");
    CriterionInfo info{name, InputKind::Custom, {}, std::move(description), false};
    custom_.emplace(name, std::make_pair(std::move(info), std::move(fn)));
}

const CriterionInfo* CriterionRegistry::find(const std::string& name) const {
    for (const auto& info : builtins_) {
        if (info.name == name) return &info;
    }
    if (auto it = custom_.find(name); it != custom_.end()) return &it->second.first;
    return nullptr;
}

std::vector<CriterionInfo> CriterionRegistry::catalog() const {
    std::vector<CriterionInfo> out = builtins_;
    for (const auto& [name, entry] : custom_) out.push_back(entry.first);
    return out;
}

const CriterionFn* CriterionRegistry::custom(const std::string& name) const {
    if (auto it = custom_.find(name); it != custom_.end()) return &it->second.second;
    return nullptr;
}

struct CriterionContext::Cache {
    Family family = Family::Custom;
    formulas::XKind xkind = formulas::XKind::PEVMEAN;

    Matrix x;                    // P values (design kinds)
    std::optional<Matrix> x_test;
    Matrix full_gram;            // X'X over all rows of P
    std::optional<Matrix> test_gram;
    bool fast_pevmean = false;

    Matrix kinv;                 // mixed-model inputs over all rows of P
    Matrix k;
    Matrix w;

    Matrix distances;

    Matrix by_observation;       // P' for feature-selection criteria
    Vector target_lower;
    Vector response;

    Matrix design;               // [1, predictors] for DFBETAS
    Vector full_coef;
    Matrix markers;              // markers + 1 for GAININB
};

CriterionContext::CriterionContext(const LabeledMatrix& P, PartitionPlan plan, CriterionSpec spec,
                                   const CriterionRegistry& registry)
    : data_(std::make_shared<const LabeledMatrix>(P)), plan_(std::move(plan)), spec_(std::move(spec)) {
    const auto* info = registry.find(spec_.name);
    if (!info) throw Error(ErrorCode::UnknownCriterion, "unknown criterion '" + spec_.name + "'");
    info_ = *info;
    if (spec_.vg || spec_.ve) {
        throw Error(ErrorCode::UnsupportedCriterion, "multi-trait criteria (Vg/Ve) are not supported");
    }
    if (!(spec_.lambda > 0.0) || !std::isfinite(spec_.lambda)) {
        throw Error(ErrorCode::InvalidConfig, "criterion lambda must be positive");
    }
    if (spec_.weight && !(*spec_.weight >= 0.0 && *spec_.weight <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "weight must lie in [0, 1]");
    }

    auto cache = std::make_shared<Cache>();
    const Matrix& values = data_->values();
    const auto q = static_cast<Eigen::Index>(data_->rows());
    const auto n = static_cast<Eigen::Index>(plan_.ntoselect);
    const Eigen::Index target_size = plan_.has_test() ? static_cast<Eigen::Index>(plan_.test_rows.size()) : q - n;

    if (!info_.builtin) {
        custom_ = *registry.custom(spec_.name);
        cache->family = Family::Custom;
        cache_ = std::move(cache);
        return;
    }
    const BuiltinDef& def = *find_builtin(spec_.name);
    cache->family = def.family;
    const Matrix* contrast = spec_.contrast ? &*spec_.contrast : nullptr;

    switch (def.family) {
    case Family::X: {
        cache->xkind = *formulas::parse_x_kind(spec_.name);
        cache->x = values;
        const auto use = formulas::target_use(cache->xkind);
        if (contrast) {
            const Eigen::Index want = use == formulas::TargetUse::None ? values.cols()
                                      : use == formulas::TargetUse::Train ? n
                                                                          : target_size;
            if (contrast->cols() != want) {
                size_error("contrast has " + std::to_string(contrast->cols()) + " columns, " + spec_.name +
                           " needs " + std::to_string(want));
            }
        }
        if (plan_.has_test()) cache->x_test = select_rows(values, plan_.test_rows);
        if (cache->xkind == formulas::XKind::PEVMEAN && !contrast) {
            cache->fast_pevmean = true;
            if (cache->x_test) {
                cache->test_gram = cache->x_test->transpose() * *cache->x_test;
            } else {
                cache->full_gram = values.transpose() * values;
            }
        }
        break;
    }
    case Family::PevMeanMM:
    case Family::CdMeanMM:
    case Family::GaussMeanMM: {
        if (values.rows() != values.cols()) {
            size_error(spec_.name + " needs a square kernel-type P, got " + std::to_string(values.rows()) + "x" +
                       std::to_string(values.cols()));
        }
        if (linalg::asymmetry(values) > 1e-10) size_error(spec_.name + " needs a symmetric P");
        if (contrast && def.family != Family::GaussMeanMM && contrast->cols() != target_size) {
            size_error("contrast must have one column per target individual");
        }
        const Matrix p_sym = symmetrized(values);
        if (def.family == Family::GaussMeanMM) {
            cache->k = p_sym;
            break;
        }
        if (spec_.kernel_inverse) {
            const auto& kinv = *spec_.kernel_inverse;
            if (kinv.rows() != data_->rows() || kinv.cols() != data_->rows()) {
                size_error("kernel_inverse must be " + std::to_string(q) + "x" + std::to_string(q));
            }
            std::vector<std::size_t> order;
            for (const auto& id : data_->row_ids()) order.push_back(kinv.row_index(id));
            Matrix aligned(q, q);
            for (Eigen::Index i = 0; i < q; ++i) {
                for (Eigen::Index j = 0; j < q; ++j) {
                    aligned(i, j) = kinv.values()(static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]),
                                                  static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)]));
                }
            }
            cache->kinv = symmetrized(aligned);
            cache->k = p_sym;
        } else {
            cache->kinv = p_sym;
            if (def.family == Family::CdMeanMM) cache->k = linalg::ridge_inverse(p_sym, 0.0);
        }
        if (spec_.fixed_design) {
            if (spec_.fixed_design->rows() != q) size_error("fixed_design must have one row per row of P");
            cache->w = *spec_.fixed_design;
        } else {
            cache->w = Matrix::Ones(q, 1);
        }
        break;
    }
    case Family::Maximin:
        if (plan_.ntoselect < 2) size_error("MAXIMIN needs ntoselect >= 2");
        cache->distances = linalg::pairwise_distances(values);
        break;
    case Family::KernelAlign: {
        cache->by_observation = values.transpose();
        Matrix target;
        if (spec_.target_kernel) {
            target = *spec_.target_kernel;
            if (target.rows() != values.cols() || target.cols() != values.cols()) {
                size_error("target_kernel must be square with one row per column of P");
            }
        } else if (spec_.alignment_kernel == AlignmentKernel::VanRaden) {
            target = formulas::vanraden_amat(cache->by_observation);
        } else {
            target = formulas::scaled_crossprod_kernel(cache->by_observation);
        }
        cache->target_lower = formulas::lower_triangle(target);
        break;
    }
    case Family::AicOls:
    case Family::FitLogdet:
        if (!spec_.response) missing(spec_.name, "response");
        if (def.family == Family::FitLogdet && !spec_.weight) missing(spec_.name, "weight");
        if (spec_.response->size() != values.cols()) {
            size_error("response has " + std::to_string(spec_.response->size()) + " entries, P has " +
                       std::to_string(values.cols()) + " observation columns");
        }
        cache->by_observation = values.transpose();
        cache->response = *spec_.response;
        break;
    case Family::Dfbetas: {
        if (values.cols() < 2) size_error("DFBETAS needs a response column and at least one predictor");
        cache->design.resize(q, values.cols());
        cache->design.col(0).setOnes();
        cache->design.rightCols(values.cols() - 1) = values.rightCols(values.cols() - 1);
        cache->response = values.col(0);
        cache->full_coef = formulas::ridge_coefficients(cache->design, cache->response, spec_.lambda);
        break;
    }
    case Family::GainInb:
        if (!spec_.weight) missing(spec_.name, "weight");
        if (values.cols() < 2) size_error("GAININB needs a gain column and at least one marker");
        cache->response = values.col(0);
        cache->markers = values.rightCols(values.cols() - 1).array() + 1.0;
        break;
    case Family::Custom:
        break;
    }
    cache_ = std::move(cache);
}

std::vector<std::size_t> CriterionContext::target_rows(std::span<const std::size_t> sorted_train_rows) const {
    if (plan_.has_test()) return plan_.test_rows;
    std::vector<std::size_t> out;
    out.reserve(plan_.total_rows - sorted_train_rows.size());
    std::size_t t = 0;
    for (std::size_t r = 0; r < plan_.total_rows; ++r) {
        if (t < sorted_train_rows.size() && sorted_train_rows[t] == r) {
            ++t;
            continue;
        }
        out.push_back(r);
    }
    return out;
}

double CriterionContext::evaluate_rows(std::span<const std::size_t> train_rows) const {
    if (std::is_sorted(train_rows.begin(), train_rows.end())) return dispatch(train_rows);
    std::vector<std::size_t> sorted(train_rows.begin(), train_rows.end());
    std::sort(sorted.begin(), sorted.end());
    return dispatch(sorted);
}

double CriterionContext::evaluate(const SubsetSolution& solution) const {
    return evaluate_rows(solution.rows(plan_));
}

double CriterionContext::evaluate_ids(const std::vector<std::string>& ids) const {
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (const auto& id : ids) rows.push_back(data_->row_index(id));
    return evaluate_rows(rows);
}

double CriterionContext::dispatch(std::span<const std::size_t> rows) const {
    const Cache& c = *cache_;
    const Matrix* contrast = spec_.contrast ? &*spec_.contrast : nullptr;
    const double lambda = spec_.lambda;

    switch (c.family) {
    case Family::X: {
        const Matrix x_train = select_rows(c.x, rows);
        if (c.fast_pevmean) {
            // mean diag(T G^-1 T') = trace(G^-1 T'T) / t
            Matrix g = x_train.transpose() * x_train;
            Matrix target_gram;
            double t = 0.0;
            if (c.test_gram) {
                target_gram = *c.test_gram;
                t = static_cast<double>(plan_.test_rows.size());
            } else {
                target_gram = c.full_gram - g;
                t = static_cast<double>(plan_.total_rows - rows.size());
            }
            if (t == 0.0) throw Error(ErrorCode::DegenerateTarget, "criterion target set is empty");
            const auto llt = linalg::shifted_cholesky(g, lambda);
            return llt.solve(target_gram).trace() / t;
        }
        if (formulas::target_use(c.xkind) != formulas::TargetUse::Test) {
            return formulas::x_criterion(c.xkind, x_train, nullptr, contrast, lambda);
        }
        if (c.x_test) return formulas::x_criterion(c.xkind, x_train, &*c.x_test, contrast, lambda);
        const Matrix x_target = select_rows(c.x, target_rows(rows));
        return formulas::x_criterion(c.xkind, x_train, &x_target, contrast, lambda);
    }
    case Family::PevMeanMM:
        return formulas::pev_mean_mm(c.kinv, rows, target_rows(rows), select_rows(c.w, rows), contrast, lambda);
    case Family::CdMeanMM:
        return formulas::cd_mean_mm(c.k, c.kinv, rows, target_rows(rows), select_rows(c.w, rows), contrast, lambda);
    case Family::GaussMeanMM:
        return formulas::gauss_mean_mm(c.k, rows, target_rows(rows), lambda);
    case Family::Maximin:
        return formulas::maximin(c.distances, rows);
    case Family::KernelAlign: {
        const Matrix selected = select_cols(c.by_observation, rows);
        const Matrix a = spec_.alignment_kernel == AlignmentKernel::VanRaden ? formulas::vanraden_amat(selected)
                                                                              : formulas::scaled_crossprod_kernel(selected);
        return (c.target_lower - formulas::lower_triangle(a)).squaredNorm() / static_cast<double>(c.target_lower.size());
    }
    case Family::AicOls:
        return formulas::aic_ols(select_cols(c.by_observation, rows), c.response);
    case Family::FitLogdet:
        return formulas::fit_logdet(select_cols(c.by_observation, rows), c.response, *spec_.weight);
    case Family::Dfbetas:
        return formulas::dfbetas_influence(c.design, c.response, c.full_coef, rows, lambda);
    case Family::GainInb: {
        Vector g(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) g[static_cast<Eigen::Index>(i)] = c.response[static_cast<Eigen::Index>(rows[i])];
        return formulas::gain_inbreeding(g, select_rows(c.markers, rows), *spec_.weight);
    }
    case Family::Custom:
        return custom_(rows, *this);
    }
    return 0.0;
}

} // namespace subsel
