#pragma once

/// @file formulas.hpp
/// Criterion formulas on explicit matrices. These are the building blocks the
/// criterion context dispatches to; every criterion value is to be minimized.

#include "subsel/linalg.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace subsel::formulas {

using linalg::Matrix;
using linalg::Vector;

/// Design-matrix criteria built on the ridge information matrix X'X + lambda I.
enum class XKind {
    AOPT,
    DOPT,
    EOPT,
    PEVMEAN,
    PEVMEAN0,
    PEVMEAN2,
    PEVMAX,
    PEVMAX0,
    PEVMAX2,
    CDMEAN,
    CDMEAN0,
    CDMEAN2,
    CDMAX,
    CDMAX0,
    CDMAX2,
    GOPTPEV,
    GOPTPEV2,
};

std::optional<XKind> parse_x_kind(std::string_view name);
std::string_view to_string(XKind kind);

/// Which target rows a kind evaluates prediction error on.
enum class TargetUse { None, Test, Train };
TargetUse target_use(XKind kind);

/// Evaluates one design-matrix criterion.
///
/// x_train is n x p. x_target is the target design (t x p); it is ignored for
/// AOPT/DOPT/EOPT and for the "0" variants, which use x_train. contrast is
/// the optional C matrix; its column count must match p for AOPT/DOPT/EOPT,
/// t for the PEV/CD/GOPT kinds and n for the "0" variants.
double x_criterion(XKind kind, const Matrix& x_train, const Matrix* x_target, const Matrix* contrast,
                   double lambda);

/// mean(diag(C Z_te (Z_tr' M Z_tr + lambda Kinv)^{-1} Z_te' C')).
///
/// The incidence matrices are given as row index lists into the q x q kinv;
/// w_train holds the fixed-effect design rows of the training individuals.
double pev_mean_mm(const Matrix& kinv, std::span<const std::size_t> train, std::span<const std::size_t> test,
                   const Matrix& w_train, const Matrix* contrast, double lambda);

/// -mean(diag(C Z_te (K - lambda (Z_tr' M Z_tr + lambda Kinv)^{-1}) Z_te' C') /
///       diag(C Z_te K Z_te' C')).
double cd_mean_mm(const Matrix& k, const Matrix& kinv, std::span<const std::size_t> train,
                  std::span<const std::size_t> test, const Matrix& w_train, const Matrix* contrast,
                  double lambda);

/// -mean(diag(K_te,te - K_te,tr (K_tr,tr + lambda I)^{-1} K_tr,te)).
double gauss_mean_mm(const Matrix& k, std::span<const std::size_t> train, std::span<const std::size_t> test,
                     double lambda);

/// Van Raden relationship matrix from a 0/1/2 marker matrix (individuals in
/// rows). Throws MonomorphicData when twice the summed heterozygosity is
/// below 1e-14.
Matrix vanraden_amat(const Matrix& markers);

/// Cross-product kernel of column-standardized features divided by the
/// number of features. Constant columns contribute zero.
Matrix scaled_crossprod_kernel(const Matrix& features);

/// Mean squared difference over the lower triangle (with diagonal).
double lower_triangle_msd(const Matrix& a, const Matrix& b);
Vector lower_triangle(const Matrix& a);

/// Gaussian AIC of the least-squares fit of y on [1, x_selected].
double aic_ols(const Matrix& x_selected, const Vector& y);

/// (1 - weight) * mean squared residual - weight * log det(X'X), using the
/// pseudo-inverse fit with a 1e-7 shift on the squared singular values.
/// Returns kSingularSentinel when the logdet term is needed and X'X is
/// singular.
double fit_logdet(const Matrix& x_selected, const Vector& y, double weight);
inline constexpr double kSingularSentinel = 1e300;

/// Group-deletion DFBETAS, negated. full_design includes the intercept
/// column; rows of train index into it.
double dfbetas_influence(const Matrix& full_design, const Vector& y, std::span<const std::size_t> train,
                         double lambda);
/// Same, with the full-data ridge coefficients precomputed.
double dfbetas_influence(const Matrix& full_design, const Vector& y, const Vector& full_coef,
                         std::span<const std::size_t> train, double lambda);
/// Ridge coefficients (X'X + lambda I)^{-1} X'y.
Vector ridge_coefficients(const Matrix& design, const Vector& y, double lambda);

/// -(1 - w) * mean(g) + w * mean(lower triangle of A(markers)).
double gain_inbreeding(const Vector& gains, const Matrix& markers012, double weight);

/// -min pairwise distance among the selected rows of a distance matrix.
double maximin(const Matrix& distances, std::span<const std::size_t> selected);

} // namespace subsel::formulas
