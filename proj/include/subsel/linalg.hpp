#pragma once

/// @file linalg.hpp
/// Dense linear algebra shared by the design criteria.
///
/// Every function here is a pure function of its arguments and may be called
/// concurrently. Symmetric inputs are passed as ordinary dense matrices; only
/// the lower triangle is read by the factorizations.

#include <Eigen/Dense>

#include <utility>

namespace subsel::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// (S + lambda I)^{-1} via a Cholesky factorization. Throws
/// Error(NotPositiveDefinite) when the shifted matrix has a non-positive pivot.
Matrix ridge_inverse(const Matrix& S, double lambda);

/// log det(S + lambda I) as twice the sum of log Cholesky pivots.
double log_det_psd(const Matrix& S, double lambda);

struct EigenExtremes {
    double max_eig;
    double mean_eig;
};

/// Largest and mean eigenvalue of a symmetric matrix.
EigenExtremes eigen_extremes(const Matrix& S);

/// M = I - W (W'W)^- W'. The generalized inverse drops singular directions of
/// W below max(rows, cols) * eps * sigma_max.
Matrix orthogonal_projection_complement(const Matrix& W);

/// Euclidean distances between the rows of X.
Matrix pairwise_distances(const Matrix& X);

/// Moore-Penrose inverse with the same spectral cutoff as above.
Matrix pseudo_inverse(const Matrix& A);

/// Singular values below this are treated as zero.
double spectral_cutoff(const Matrix& A, double sigma_max);

/// Cholesky of S + lambda I; throws NotPositiveDefinite on failure.
Eigen::LLT<Matrix> shifted_cholesky(const Matrix& S, double lambda);

/// Max-abs deviation from symmetry, relative to the largest entry.
double asymmetry(const Matrix& S);

bool all_finite(const Matrix& S);

} // namespace subsel::linalg
