#include "subsel/linalg.hpp"

#include "subsel/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace subsel::linalg {

Eigen::LLT<Matrix> shifted_cholesky(const Matrix& S, double lambda) {
    Matrix shifted = S;
    shifted.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    "matrix of order " + std::to_string(S.rows()) +
                        " is not positive definite after a shift of " + std::to_string(lambda));
    }
    // Eigen's LLT reports success for some indefinite inputs whose pivots
    // come out NaN or zero, so check the factor explicitly.
    const auto diag = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) {
            throw Error(ErrorCode::NotPositiveDefinite,
                        "non-positive pivot " + std::to_string(i) + " in Cholesky factorization");
        }
    }
    return llt;
}

Matrix ridge_inverse(const Matrix& S, double lambda) {
    const auto llt = shifted_cholesky(S, lambda);
    Matrix inv = llt.solve(Matrix::Identity(S.rows(), S.cols()));
    return (0.5 * (inv + inv.transpose())).eval();
}

double log_det_psd(const Matrix& S, double lambda) {
    const auto llt = shifted_cholesky(S, lambda);
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

EigenExtremes eigen_extremes(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(S, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver did not converge");
    }
    const Vector& values = solver.eigenvalues();
    return {values.maxCoeff(), values.mean()};
}

double spectral_cutoff(const Matrix& A, double sigma_max) {
    const auto order = static_cast<double>(std::max(A.rows(), A.cols()));
    return order * std::numeric_limits<double>::epsilon() * sigma_max;
}

Matrix orthogonal_projection_complement(const Matrix& W) {
    const Eigen::Index n = W.rows();
    Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    Matrix M = Matrix::Identity(n, n);
    if (sv.size() == 0 || sv[0] <= 0.0) return M;
    const double cut = spectral_cutoff(W, sv[0]);
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv[k] <= cut) break;
        const auto u = svd.matrixU().col(k);
        M.noalias() -= u * u.transpose();
    }
    return M;
}

Matrix pseudo_inverse(const Matrix& A) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    Matrix out = Matrix::Zero(A.cols(), A.rows());
    if (sv.size() == 0 || sv[0] <= 0.0) return out;
    const double cut = spectral_cutoff(A, sv[0]);
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv[k] <= cut) break;
        out.noalias() += svd.matrixV().col(k) * (1.0 / sv[k]) * svd.matrixU().col(k).transpose();
    }
    return out;
}

Matrix pairwise_distances(const Matrix& X) {
    const Eigen::Index n = X.rows();
    Matrix D = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (X.row(i) - X.row(j)).norm();
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return D;
}

double asymmetry(const Matrix& S) {
    if (S.rows() != S.cols()) return std::numeric_limits<double>::infinity();
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    return (S - S.transpose()).cwiseAbs().maxCoeff() / scale;
}

bool all_finite(const Matrix& S) { return S.allFinite(); }

} // namespace subsel::linalg
