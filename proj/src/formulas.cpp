#include "subsel/formulas.hpp"

#include "subsel/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace subsel::formulas {

namespace {

constexpr double kDegenerateDenominator = 1e-14;

constexpr std::array<std::pair<std::string_view, XKind>, 17> kXKinds{{
    {"AOPT", XKind::AOPT},       {"DOPT", XKind::DOPT},         {"EOPT", XKind::EOPT},
    {"PEVMEAN", XKind::PEVMEAN}, {"PEVMEAN0", XKind::PEVMEAN0}, {"PEVMEAN2", XKind::PEVMEAN2},
    {"PEVMAX", XKind::PEVMAX},   {"PEVMAX0", XKind::PEVMAX0},   {"PEVMAX2", XKind::PEVMAX2},
    {"CDMEAN", XKind::CDMEAN},   {"CDMEAN0", XKind::CDMEAN0},   {"CDMEAN2", XKind::CDMEAN2},
    {"CDMAX", XKind::CDMAX},     {"CDMAX0", XKind::CDMAX0},     {"CDMAX2", XKind::CDMAX2},
    {"GOPTPEV", XKind::GOPTPEV}, {"GOPTPEV2", XKind::GOPTPEV2},
}};

bool is_sandwich(XKind k) { return k == XKind::PEVMEAN2 || k == XKind::PEVMAX2 || k == XKind::CDMEAN2 || k == XKind::CDMAX2; }

bool is_cd(XKind k) {
    switch (k) {
    case XKind::CDMEAN: case XKind::CDMEAN0: case XKind::CDMEAN2:
    case XKind::CDMAX: case XKind::CDMAX0: case XKind::CDMAX2:
        return true;
    default:
        return false;
    }
}

bool uses_max(XKind k) {
    switch (k) {
    case XKind::PEVMAX: case XKind::PEVMAX0: case XKind::PEVMAX2:
    case XKind::CDMAX: case XKind::CDMAX0: case XKind::CDMAX2:
        return true;
    default:
        return false;
    }
}

Matrix gram(const Matrix& x) {
    Matrix g = Matrix::Zero(x.cols(), x.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    return g.selfadjointView<Eigen::Lower>();
}

Matrix select(const Matrix& m, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
        }
    }
    return out;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

void require_target(Eigen::Index rows) {
    if (rows == 0) throw Error(ErrorCode::DegenerateTarget, "criterion target set is empty");
}

/// (Z_tr' M Z_tr + lambda Kinv) restricted to the q x q individual space.
Matrix mixed_model_system(const Matrix& kinv, std::span<const std::size_t> train, const Matrix& w_train,
                          double lambda) {
    Matrix system = lambda * kinv;
    const Matrix m = linalg::orthogonal_projection_complement(w_train);
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (std::size_t j = 0; j < train.size(); ++j) {
            system(static_cast<Eigen::Index>(train[i]), static_cast<Eigen::Index>(train[j])) +=
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return system;
}

/// Columns of the q x q identity for the given individuals.
Matrix incidence_transpose(Eigen::Index q, std::span<const std::size_t> rows) {
    Matrix e = Matrix::Zero(q, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) e(static_cast<Eigen::Index>(rows[j]), static_cast<Eigen::Index>(j)) = 1.0;
    return e;
}

Vector contrast_diag(const Matrix& s, const Matrix* contrast) {
    if (!contrast) return s.diagonal();
    return (*contrast * s * contrast->transpose()).diagonal();
}

} // namespace

std::optional<XKind> parse_x_kind(std::string_view name) {
    for (const auto& [n, k] : kXKinds) {
        if (n == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(XKind kind) {
    for (const auto& [n, k] : kXKinds) {
        if (k == kind) return n;
    }
    return "?";
}

TargetUse target_use(XKind kind) {
    switch (kind) {
    case XKind::AOPT: case XKind::DOPT: case XKind::EOPT:
        return TargetUse::None;
    case XKind::PEVMEAN0: case XKind::PEVMAX0: case XKind::CDMEAN0: case XKind::CDMAX0:
        return TargetUse::Train;
    default:
        return TargetUse::Test;
    }
}

double x_criterion(XKind kind, const Matrix& x_train, const Matrix* x_target, const Matrix* contrast,
                   double lambda) {
    const auto llt = linalg::shifted_cholesky(gram(x_train), lambda);
    const auto L = llt.matrixL();
    const Eigen::Index p = x_train.cols();

    const TargetUse use = target_use(kind);
    if (use == TargetUse::None) {
        if (!contrast) {
            switch (kind) {
            case XKind::AOPT:
                return L.solve(Matrix::Identity(p, p)).squaredNorm();
            case XKind::DOPT:
                return -2.0 * llt.matrixLLT().diagonal().array().log().sum();
            default:
                return linalg::eigen_extremes(llt.solve(Matrix::Identity(p, p))).max_eig;
            }
        }
        const Matrix v = L.solve(contrast->transpose());
        switch (kind) {
        case XKind::AOPT:
            return v.squaredNorm();
        case XKind::DOPT:
            return linalg::log_det_psd(v.transpose() * v, 0.0);
        default:
            return linalg::eigen_extremes(v.transpose() * v).max_eig;
        }
    }

    const Matrix& target = use == TargetUse::Train ? x_train : *x_target;
    const Matrix r = contrast ? Matrix(*contrast * target) : target;
    require_target(r.rows());

    const Matrix v = L.solve(r.transpose());
    if (kind == XKind::GOPTPEV || kind == XKind::GOPTPEV2) {
        const auto ex = linalg::eigen_extremes(v.transpose() * v);
        return kind == XKind::GOPTPEV ? ex.max_eig : ex.mean_eig;
    }

    Vector pev;
    if (is_sandwich(kind)) {
        const Matrix u = L.transpose().solve(v);
        pev = (x_train * u).colwise().squaredNorm().transpose();
    } else {
        pev = v.colwise().squaredNorm().transpose();
    }

    if (is_cd(kind)) {
        const Vector denom = r.rowwise().squaredNorm();
        if (denom.minCoeff() < kDegenerateDenominator) {
            throw Error(ErrorCode::DegenerateTarget, "target row with zero variance in CD denominator");
        }
        pev = pev.cwiseQuotient(denom);
    }
    return uses_max(kind) ? pev.maxCoeff() : pev.mean();
}

double pev_mean_mm(const Matrix& kinv, std::span<const std::size_t> train, std::span<const std::size_t> test,
                   const Matrix& w_train, const Matrix* contrast, double lambda) {
    require_target(static_cast<Eigen::Index>(test.size()));
    const auto llt = linalg::shifted_cholesky(mixed_model_system(kinv, train, w_train, lambda), 0.0);
    const Matrix block = select_rows(llt.solve(incidence_transpose(kinv.rows(), test)), test);
    return contrast_diag(block, contrast).mean();
}

double cd_mean_mm(const Matrix& k, const Matrix& kinv, std::span<const std::size_t> train,
                  std::span<const std::size_t> test, const Matrix& w_train, const Matrix* contrast,
                  double lambda) {
    require_target(static_cast<Eigen::Index>(test.size()));
    const auto llt = linalg::shifted_cholesky(mixed_model_system(kinv, train, w_train, lambda), 0.0);
    const Matrix pev_block = select_rows(llt.solve(incidence_transpose(kinv.rows(), test)), test);
    const Matrix k_block = select(k, test, test);
    const Vector num = contrast_diag(k_block - lambda * pev_block, contrast);
    const Vector den = contrast_diag(k_block, contrast);
    if (den.minCoeff() < kDegenerateDenominator) {
        throw Error(ErrorCode::DegenerateTarget, "target with zero prior variance in CD denominator");
    }
    return -num.cwiseQuotient(den).mean();
}

double gauss_mean_mm(const Matrix& k, std::span<const std::size_t> train, std::span<const std::size_t> test,
                     double lambda) {
    require_target(static_cast<Eigen::Index>(test.size()));
    const auto llt = linalg::shifted_cholesky(select(k, train, train), lambda);
    const Matrix cross = select(k, train, test);
    const Vector explained = llt.matrixL().solve(cross).colwise().squaredNorm().transpose();
    return -(select(k, test, test).diagonal() - explained).mean();
}

Matrix vanraden_amat(const Matrix& markers) {
    const Vector col_means = markers.colwise().mean().transpose();
    const Vector freq = col_means / 2.0;
    const double k = 2.0 * (freq.array() * (1.0 - freq.array())).sum();
    if (!(k > 1e-14)) throw Error(ErrorCode::MonomorphicData, "marker data has no polymorphic columns");
    const Matrix w = markers.rowwise() - col_means.transpose();
    Matrix a = (w * w.transpose()) / k;
    return a;
}

Matrix scaled_crossprod_kernel(const Matrix& features) {
    const Eigen::Index n = features.rows();
    const Eigen::Index m = features.cols();
    Matrix z = features.rowwise() - features.colwise().mean();
    for (Eigen::Index j = 0; j < m; ++j) {
        const double sd = n > 1 ? std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n - 1)) : 0.0;
        if (sd > 1e-14) z.col(j) /= sd;
        else z.col(j).setZero();
    }
    return (z * z.transpose()) / static_cast<double>(m);
}

Vector lower_triangle(const Matrix& a) {
    const Eigen::Index n = a.rows();
    Vector out(n * (n + 1) / 2);
    Eigen::Index idx = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) out[idx++] = a(i, j);
    }
    return out;
}

double lower_triangle_msd(const Matrix& a, const Matrix& b) {
    return (lower_triangle(a) - lower_triangle(b)).squaredNorm() / static_cast<double>(a.rows() * (a.rows() + 1) / 2);
}

double aic_ols(const Matrix& x_selected, const Vector& y) {
    const Eigen::Index n = x_selected.rows();
    const Eigen::Index k = x_selected.cols();
    Matrix design(n, k + 1);
    design.col(0).setOnes();
    design.rightCols(k) = x_selected;
    const Vector coef = linalg::pseudo_inverse(design) * y;
    const double rss = (y - design * coef).squaredNorm();
    const double nd = static_cast<double>(n);
    return nd * (std::log(2.0 * std::numbers::pi) + std::log(rss / nd) + 1.0) + 2.0 * static_cast<double>(k + 2);
}

double fit_logdet(const Matrix& x_selected, const Vector& y, double weight) {
    Eigen::JacobiSVD<Matrix> svd(x_selected, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& d = svd.singularValues();
    const Vector shrink = d.cwiseQuotient((d.array().square() + 1e-7).matrix());
    const Vector coef = svd.matrixV() * shrink.asDiagonal() * (svd.matrixU().transpose() * y);
    const double mse = (y - x_selected * coef).squaredNorm() / static_cast<double>(y.size());
    if (weight == 0.0) return mse;

    const bool wide = x_selected.cols() > x_selected.rows();
    if (wide || d.size() == 0 || d[d.size() - 1] <= linalg::spectral_cutoff(x_selected, d[0])) {
        return kSingularSentinel;
    }
    const double logdet = 2.0 * d.array().log().sum();
    return (1.0 - weight) * mse - weight * logdet;
}

Vector ridge_coefficients(const Matrix& design, const Vector& y, double lambda) {
    return linalg::shifted_cholesky(gram(design), lambda).solve(design.transpose() * y);
}

double dfbetas_influence(const Matrix& full_design, const Vector& y, std::span<const std::size_t> train,
                         double lambda) {
    return dfbetas_influence(full_design, y, ridge_coefficients(full_design, y, lambda), train, lambda);
}

double dfbetas_influence(const Matrix& full_design, const Vector& y, const Vector& full_coef,
                         std::span<const std::size_t> train, double lambda) {
    const Matrix xt = select_rows(full_design, train);
    Vector yt(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) yt[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(train[i])];

    Matrix g = gram(xt);
    g.diagonal().array() += lambda;
    const Vector coef = linalg::shifted_cholesky(g, 0.0).solve(xt.transpose() * yt);
    const Vector resid = yt - xt * coef;
    const double n = static_cast<double>(resid.size());
    const double sd = n > 1 ? std::sqrt((resid.array() - resid.mean()).square().sum() / (n - 1.0)) : 0.0;
    if (!(sd >= 1e-14)) throw Error(ErrorCode::DegenerateVariance, "training residual standard deviation is zero");
    const Vector diff = full_coef - coef;
    return -(diff.dot(g * diff)) / sd;
}

double gain_inbreeding(const Vector& gains, const Matrix& markers012, double weight) {
    const double gain = gains.mean();
    if (weight == 0.0) return -gain;
    const Matrix a = vanraden_amat(markers012);
    return -(1.0 - weight) * gain + weight * lower_triangle(a).mean();
}

double maximin(const Matrix& distances, std::span<const std::size_t> selected) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < selected.size(); ++i) {
        for (std::size_t j = i + 1; j < selected.size(); ++j) {
            best = std::min(best, distances(static_cast<Eigen::Index>(selected[i]), static_cast<Eigen::Index>(selected[j])));
        }
    }
    return -best;
}

} // namespace subsel::formulas
