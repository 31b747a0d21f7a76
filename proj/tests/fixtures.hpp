#pragma once

#include "naive.hpp"

#include "subsel/error.hpp"
#include "subsel/labeled_matrix.hpp"
#include "subsel/linalg.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using subsel::linalg::Matrix;
using subsel::linalg::Vector;

inline naive::Mat to_naive(const Matrix& m) {
    naive::Mat out = naive::zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

inline Matrix from_naive(const naive::Mat& m) {
    Matrix out(static_cast<Eigen::Index>(m.size()), m.empty() ? 0 : static_cast<Eigen::Index>(m[0].size()));
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return out;
}

inline double max_abs_diff(const naive::Mat& a, const naive::Mat& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
    return d;
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double mean = 0.0) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd(mean, 1.0);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = nd(g);
    return m;
}

inline Matrix random_psd(Eigen::Index n, std::uint64_t seed) {
    const Matrix a = random_matrix(n, n + 2, seed);
    return a * a.transpose();
}

inline Matrix random_markers(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_int_distribution<int> u(0, 2);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(g);
    return m;
}

inline std::vector<std::string> make_ids(const std::string& prefix, std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i + 1));
    return ids;
}

/// Quadratic response-surface design over the 5x5 grid {-2..2}^2, rows x1..x25.
inline subsel::LabeledMatrix quadratic_grid() {
    Matrix x(25, 6);
    int r = 0;
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) x.row(r++) << 1, i, j, i * i, j * j, i * j;
    return subsel::LabeledMatrix(make_ids("x", 25), x, std::vector<std::string>{"one", "x1", "x2", "x1sq", "x2sq", "x1x2"});
}

inline const std::vector<std::string>& grid_known_optimum() {
    static const std::vector<std::string> ids = {"x1", "x2", "x3", "x5", "x6", "x10", "x11",
                                                 "x13", "x15", "x21", "x22", "x24", "x25"};
    return ids;
}
inline constexpr double kGridOptimum = -21.3096195830339709687;

/// Error code thrown by f, or nullopt when it returns normally.
inline std::optional<subsel::ErrorCode> error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const subsel::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace fixtures
