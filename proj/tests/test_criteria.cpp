#include "fixtures.hpp"

#include "subsel/criteria.hpp"
#include "subsel/formulas.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

using namespace subsel;
using fixtures::error_of;
using fixtures::Matrix;
using fixtures::Vector;
using formulas::XKind;

namespace {

const std::vector<std::string> kXKinds = {"AOPT",    "DOPT",    "EOPT",   "PEVMEAN", "PEVMEAN0", "PEVMEAN2",
                                          "PEVMAX",  "PEVMAX0", "PEVMAX2", "CDMEAN", "CDMEAN0",  "CDMEAN2",
                                          "CDMAX",   "CDMAX0",  "CDMAX2", "GOPTPEV", "GOPTPEV2"};

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }
bool ends_with(const std::string& s, char c) { return !s.empty() && s.back() == c; }

/// Direct dense evaluation of a design criterion.
double naive_x(const std::string& kind, const naive::Mat& xtr, const naive::Mat& xte, const naive::Mat* c,
               double lambda) {
    const auto xtx = naive::mul(naive::transpose(xtr), xtr);
    const auto gi = naive::inverse(naive::add_diag(xtx, lambda));
    if (kind == "AOPT" || kind == "DOPT" || kind == "EOPT") {
        const auto m = c ? naive::mul(naive::mul(*c, gi), naive::transpose(*c)) : gi;
        if (kind == "AOPT") return naive::trace(m);
        if (kind == "DOPT") return naive::log_abs_det(m);
        return naive::max(naive::sym_eigenvalues(m));
    }
    const auto& t0 = ends_with(kind, '0') ? xtr : xte;
    const auto t = c ? naive::mul(*c, t0) : t0;
    const bool sandwich = ends_with(kind, '2') && !starts_with(kind, "GOPT");
    const auto core = sandwich ? naive::mul(naive::mul(gi, xtx), gi) : gi;
    const auto pev = naive::mul(naive::mul(t, core), naive::transpose(t));
    if (starts_with(kind, "GOPT")) {
        const auto ev = naive::sym_eigenvalues(pev);
        return kind == "GOPTPEV" ? naive::max(ev) : naive::mean(ev);
    }
    auto d = naive::diag(pev);
    if (starts_with(kind, "CD")) {
        const auto den = naive::diag(naive::mul(t, naive::transpose(t)));
        for (std::size_t i = 0; i < d.size(); ++i) d[i] /= den[i];
    }
    return kind.find("MAX") != std::string::npos ? naive::max(d) : naive::mean(d);
}

naive::Mat incidence(const std::vector<std::size_t>& rows, std::size_t q) {
    naive::Mat z = naive::zeros(rows.size(), q);
    for (std::size_t i = 0; i < rows.size(); ++i) z[i][rows[i]] = 1.0;
    return z;
}

naive::Mat projection_complement(const naive::Mat& w) {
    const auto wt = naive::transpose(w);
    const auto h = naive::mul(naive::mul(w, naive::inverse(naive::mul(wt, w))), wt);
    return naive::add(naive::identity(w.size()), h, -1.0);
}

struct MMNaive {
    double pev;
    double cd;
};

MMNaive naive_mm(const naive::Mat& kinv, const std::vector<std::size_t>& train, const std::vector<std::size_t>& test,
                 const naive::Mat& w_train, double lambda) {
    const std::size_t q = kinv.size();
    const auto ztr = incidence(train, q);
    const auto zte = incidence(test, q);
    const auto m = projection_complement(w_train);
    const auto a = naive::add(naive::mul(naive::mul(naive::transpose(ztr), m), ztr), naive::scale(kinv, lambda));
    const auto ai = naive::inverse(a);
    const auto pev = naive::mul(naive::mul(zte, ai), naive::transpose(zte));
    const auto k = naive::inverse(kinv);
    const auto kt = naive::mul(naive::mul(zte, k), naive::transpose(zte));
    const auto num = naive::add(kt, naive::scale(pev, lambda), -1.0);
    double cd = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) cd += num[i][i] / kt[i][i];
    return {naive::mean(naive::diag(pev)), -cd / static_cast<double>(test.size())};
}

double naive_gauss(const naive::Mat& k, const std::vector<std::size_t>& train, const std::vector<std::size_t>& test,
                   double lambda) {
    const auto ktt = naive::cols(naive::rows(k, test), test);
    const auto ktr = naive::cols(naive::rows(k, train), train);
    const auto kx = naive::cols(naive::rows(k, test), train);
    const auto expl = naive::mul(naive::mul(kx, naive::inverse(naive::add_diag(ktr, lambda))), naive::transpose(kx));
    return -naive::mean(naive::diag(naive::add(ktt, expl, -1.0)));
}

double naive_vanraden_entry_mean(const naive::Mat& markers) {
    const std::size_t n = markers.size(), m = markers[0].size();
    naive::Vec p(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) p[j] += markers[i][j];
        p[j] /= 2.0 * static_cast<double>(n);
    }
    double k = 0.0;
    for (double f : p) k += 2.0 * f * (1.0 - f);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l <= i; ++l) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += (markers[i][j] - 2 * p[j]) * (markers[l][j] - 2 * p[j]);
            sum += s / k;
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

} // namespace

TEST(DesignCriteria, GridDOptimumValue) {
    const auto grid = fixtures::quadratic_grid();
    const auto plan = validate_partition(grid, std::nullopt, std::nullopt, 13);
    CriterionSpec spec;
    spec.name = "DOPT";
    spec.lambda = 1e-9;
    const CriterionContext ctx(grid, plan, spec);
    EXPECT_NEAR(ctx.evaluate_ids(fixtures::grid_known_optimum()), fixtures::kGridOptimum, 1e-9);
}

TEST(DesignCriteria, OrthonormalAOpt) {
    const Matrix q = Eigen::HouseholderQR<Matrix>(fixtures::random_matrix(6, 3, 2)).householderQ() * Matrix::Identity(6, 3);
    for (double lambda : {1e-6, 0.1, 2.0}) {
        EXPECT_NEAR(formulas::x_criterion(XKind::AOPT, q, nullptr, nullptr, lambda), 3.0 / (1.0 + lambda), 1e-12);
    }
}

TEST(DesignCriteria, EveryKindMatchesDenseFormulaWithTest) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const LabeledMatrix p(fixtures::make_ids("r", 10), fixtures::random_matrix(10, 3, seed));
        const auto plan = validate_partition(p, std::nullopt, std::vector<std::string>{"r8", "r9", "r10"}, 4);
        const std::vector<std::string> train{"r1", "r3", "r4", "r6"};
        const std::vector<std::size_t> tr{0, 2, 3, 5}, te{7, 8, 9};
        const auto np = fixtures::to_naive(p.values());
        for (const auto& kind : kXKinds) {
            for (double lambda : {1e-6, 0.3}) {
                CriterionSpec spec;
                spec.name = kind;
                spec.lambda = lambda;
                const CriterionContext ctx(p, plan, spec);
                const double expected = naive_x(kind, naive::rows(np, tr), naive::rows(np, te), nullptr, lambda);
                EXPECT_NEAR(ctx.evaluate_ids(train), expected, 1e-10 * std::max(1.0, std::abs(expected)))
                    << kind << " lambda " << lambda;
            }
        }
    }
}

TEST(DesignCriteria, EveryKindMatchesDenseFormulaImplicitTarget) {
    const LabeledMatrix p(fixtures::make_ids("r", 10), fixtures::random_matrix(10, 3, 17));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 4);
    const std::vector<std::string> train{"r2", "r5", "r7", "r9"};
    const std::vector<std::size_t> tr{1, 4, 6, 8}, te{0, 2, 3, 5, 7, 9};
    const auto np = fixtures::to_naive(p.values());
    for (const auto& kind : kXKinds) {
        CriterionSpec spec;
        spec.name = kind;
        const CriterionContext ctx(p, plan, spec);
        const double expected = naive_x(kind, naive::rows(np, tr), naive::rows(np, te), nullptr, 1e-6);
        EXPECT_NEAR(ctx.evaluate_ids(train), expected, 1e-10 * std::max(1.0, std::abs(expected))) << kind;
    }
}

TEST(DesignCriteria, EveryKindWithContrast) {
    const LabeledMatrix p(fixtures::make_ids("r", 10), fixtures::random_matrix(10, 3, 23));
    const auto plan = validate_partition(p, std::nullopt, std::vector<std::string>{"r8", "r9", "r10"}, 4);
    const std::vector<std::string> train{"r1", "r2", "r5", "r6"};
    const std::vector<std::size_t> tr{0, 1, 4, 5}, te{7, 8, 9};
    const auto np = fixtures::to_naive(p.values());
    for (const auto& kind : kXKinds) {
        const bool param = kind == "AOPT" || kind == "DOPT" || kind == "EOPT";
        const Eigen::Index cols = param ? 3 : ends_with(kind, '0') ? 4 : 3;
        const Matrix c = fixtures::random_matrix(2, cols, 99);
        CriterionSpec spec;
        spec.name = kind;
        spec.lambda = 0.05;
        spec.contrast = c;
        const CriterionContext ctx(p, plan, spec);
        const auto nc = fixtures::to_naive(c);
        const double expected = naive_x(kind, naive::rows(np, tr), naive::rows(np, te), &nc, 0.05);
        EXPECT_NEAR(ctx.evaluate_ids(train), expected, 1e-10 * std::max(1.0, std::abs(expected))) << kind;
    }
}

TEST(DesignCriteria, ContrastShapeChecked) {
    const LabeledMatrix p(fixtures::make_ids("r", 10), fixtures::random_matrix(10, 3, 23));
    const auto plan = validate_partition(p, std::nullopt, std::vector<std::string>{"r9", "r10"}, 4);
    CriterionSpec spec;
    spec.name = "PEVMEAN";
    spec.contrast = Matrix::Identity(3, 3);
    EXPECT_EQ(error_of([&] { CriterionContext(p, plan, spec); }), ErrorCode::SizeError);
    spec.name = "DOPT";
    EXPECT_EQ(error_of([&] { CriterionContext(p, plan, spec); }), std::nullopt);
}

TEST(DesignCriteria, CdRatiosPositive) {
    const LabeledMatrix p(fixtures::make_ids("r", 12), fixtures::random_matrix(12, 4, 8));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 5);
    for (std::string kind : {"CDMEAN", "CDMAX", "CDMEAN0", "CDMAX0", "CDMEAN2", "CDMAX2"}) {
        CriterionSpec spec;
        spec.name = kind;
        spec.lambda = 0.1;
        const CriterionContext ctx(p, plan, spec);
        EXPECT_GT(ctx.evaluate_ids({"r1", "r2", "r3", "r4", "r5"}), 0.0) << kind;
    }
}

TEST(DesignCriteria, PevMeanMatchesKernelForm) {
    // mean diag(T (X'X + l I)^-1 T') = mean diag(TT' - T X'(XX' + l I)^-1 X T') / l
    const LabeledMatrix p(fixtures::make_ids("r", 15), fixtures::random_matrix(15, 6, 31));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 5);
    const double lambda = 0.5;
    CriterionSpec spec;
    spec.lambda = lambda;
    const CriterionContext ctx(p, plan, spec);
    const std::vector<std::size_t> tr{0, 3, 6, 9, 12};
    std::vector<std::size_t> te;
    for (std::size_t i = 0; i < 15; ++i)
        if (std::find(tr.begin(), tr.end(), i) == tr.end()) te.push_back(i);
    Matrix x(5, 6), t(10, 6);
    for (int i = 0; i < 5; ++i) x.row(i) = p.values().row(static_cast<Eigen::Index>(tr[i]));
    for (int i = 0; i < 10; ++i) t.row(i) = p.values().row(static_cast<Eigen::Index>(te[i]));
    const Matrix k = x * x.transpose() + lambda * Matrix::Identity(5, 5);
    const Matrix dual = (t * t.transpose() - t * x.transpose() * k.inverse() * x * t.transpose()) / lambda;
    EXPECT_NEAR(ctx.evaluate_rows(tr), dual.diagonal().mean(), 1e-8);
}

TEST(DesignCriteria, FastPevMeanMatchesGeneral) {
    const LabeledMatrix p(fixtures::make_ids("r", 30), fixtures::random_matrix(30, 5, 4));
    for (bool with_test : {false, true}) {
        const auto plan = with_test ? validate_partition(p, std::nullopt, std::vector<std::string>{"r1", "r2"}, 8)
                                    : validate_partition(p, std::nullopt, std::nullopt, 8);
        CriterionSpec spec;
        const CriterionContext ctx(p, plan, spec);
        std::mt19937_64 g(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::uint32_t> pos(plan.num_candidates());
            std::iota(pos.begin(), pos.end(), 0u);
            std::shuffle(pos.begin(), pos.end(), g);
            pos.resize(8);
            const SubsetSolution s(pos);
            const auto rows = s.rows(plan);
            std::vector<std::size_t> sorted_rows(rows);
            std::sort(sorted_rows.begin(), sorted_rows.end());
            Matrix xtr(8, 5);
            for (int i = 0; i < 8; ++i) xtr.row(i) = p.values().row(static_cast<Eigen::Index>(sorted_rows[i]));
            const auto target = ctx.target_rows(sorted_rows);
            Matrix xte(static_cast<Eigen::Index>(target.size()), 5);
            for (std::size_t i = 0; i < target.size(); ++i)
                xte.row(static_cast<Eigen::Index>(i)) = p.values().row(static_cast<Eigen::Index>(target[i]));
            const double general = formulas::x_criterion(XKind::PEVMEAN, xtr, &xte, nullptr, 1e-6);
            EXPECT_NEAR(ctx.evaluate(s), general, 1e-10 * std::abs(general));
        }
    }
}

TEST(DesignCriteria, PermutationInvariantAndPure) {
    const LabeledMatrix p(fixtures::make_ids("r", 12), fixtures::random_matrix(12, 3, 12));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 5);
    for (const auto& kind : kXKinds) {
        CriterionSpec spec;
        spec.name = kind;
        const CriterionContext ctx(p, plan, spec);
        std::vector<std::size_t> rows{7, 1, 10, 4, 2};
        const double base = ctx.evaluate_rows(rows);
        std::mt19937_64 g(1);
        for (int i = 0; i < 5; ++i) {
            std::shuffle(rows.begin(), rows.end(), g);
            EXPECT_EQ(ctx.evaluate_rows(rows), base) << kind;
        }
        std::vector<double> seen(4);
        std::vector<std::thread> threads;
        for (int t = 0; t < 4; ++t) threads.emplace_back([&, t] { seen[t] = ctx.evaluate_rows(rows); });
        for (auto& t : threads) t.join();
        for (double v : seen) EXPECT_EQ(v, base) << kind;
    }
}

TEST(DesignCriteria, DegenerateCdTarget) {
    Matrix x = fixtures::random_matrix(6, 2, 3);
    x.row(5).setZero();
    const LabeledMatrix p(fixtures::make_ids("r", 6), x);
    const auto plan = validate_partition(p, std::nullopt, std::vector<std::string>{"r6"}, 3);
    CriterionSpec spec;
    spec.name = "CDMEAN";
    const CriterionContext ctx(p, plan, spec);
    EXPECT_EQ(error_of([&] { ctx.evaluate_ids({"r1", "r2", "r3"}); }), ErrorCode::DegenerateTarget);
}

TEST(MixedModel, PevMeanHandComputed) {
    const Matrix kinv = Matrix::Identity(2, 2);
    const std::vector<std::size_t> both{0, 1};
    const Matrix w = Matrix::Ones(2, 1);
    EXPECT_NEAR(formulas::pev_mean_mm(kinv, both, both, w, nullptr, 1.0), 0.75, 1e-14);
}

TEST(MixedModel, GaussLargeLambdaLimit) {
    const Matrix k = fixtures::random_psd(8, 6);
    const std::vector<std::size_t> train{0, 3, 5}, test{1, 2, 7};
    double prior = 0.0;
    for (auto t : test) prior += k(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t));
    prior = -prior / 3.0;
    const double v = formulas::gauss_mean_mm(k, train, test, 1e12);
    EXPECT_NEAR(v, prior, 1e-6 * std::abs(prior));
}

TEST(MixedModel, MatchesDenseFormula) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Matrix k = fixtures::random_psd(8, seed) + 0.5 * Matrix::Identity(8, 8);
        const Matrix kinv = k.inverse();
        const Matrix kinv_sym = 0.5 * (kinv + kinv.transpose());
        const auto ids = fixtures::make_ids("g", 8);
        Matrix w(8, 2);
        w.col(0).setOnes();
        w.col(1) = fixtures::random_matrix(8, 1, seed + 50);
        const auto plan = validate_partition(LabeledMatrix(ids, kinv_sym), std::nullopt,
                                             std::vector<std::string>{"g7", "g8"}, 3);
        const std::vector<std::string> train{"g1", "g3", "g4"};
        const std::vector<std::size_t> tr{0, 2, 3}, te{6, 7};
        naive::Mat w_train = naive::rows(fixtures::to_naive(w), tr);
        for (double lambda : {0.3, 2.0}) {
            const auto expected = naive_mm(fixtures::to_naive(kinv_sym), tr, te, w_train, lambda);
            CriterionSpec spec;
            spec.lambda = lambda;
            spec.fixed_design = w;
            spec.name = "PEVMEANMM";
            const CriterionContext pev(LabeledMatrix(ids, kinv_sym), plan, spec);
            EXPECT_NEAR(pev.evaluate_ids(train), expected.pev, 1e-10);
            spec.name = "CDMEANMM";
            const CriterionContext cd(LabeledMatrix(ids, kinv_sym), plan, spec);
            EXPECT_NEAR(cd.evaluate_ids(train), expected.cd, 1e-10);

            // K supplied as P together with its inverse
            spec.kernel_inverse = LabeledMatrix(ids, kinv_sym);
            const CriterionContext cd2(LabeledMatrix(ids, 0.5 * (k + k.transpose())), plan, spec);
            EXPECT_NEAR(cd2.evaluate_ids(train), expected.cd, 1e-9);
            spec.kernel_inverse.reset();

            spec.name = "GAUSSMEANMM";
            spec.fixed_design.reset();
            const CriterionContext gauss(LabeledMatrix(ids, 0.5 * (k + k.transpose())), plan, spec);
            EXPECT_NEAR(gauss.evaluate_ids(train), naive_gauss(fixtures::to_naive(k), tr, te, lambda), 1e-10);
        }
    }
}

TEST(MixedModel, KernelInverseAlignedById) {
    const Matrix k = fixtures::random_psd(6, 2) + Matrix::Identity(6, 6);
    const Matrix kinv = k.inverse();
    const auto ids = fixtures::make_ids("g", 6);
    // kernel_inverse given in reversed row/column order
    Matrix rev(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) rev(i, j) = kinv(5 - i, 5 - j);
    std::vector<std::string> rev_ids(ids.rbegin(), ids.rend());
    const auto plan = validate_partition(LabeledMatrix(ids, k), std::nullopt, std::nullopt, 3);
    CriterionSpec a;
    a.name = "PEVMEANMM";
    a.kernel_inverse = LabeledMatrix(rev_ids, rev);
    CriterionSpec b;
    b.name = "PEVMEANMM";
    const CriterionContext ca(LabeledMatrix(ids, k), plan, a);
    const CriterionContext cb(LabeledMatrix(ids, 0.5 * (kinv + kinv.transpose())), plan, b);
    EXPECT_NEAR(ca.evaluate_ids({"g1", "g2", "g5"}), cb.evaluate_ids({"g1", "g2", "g5"}), 1e-10);
}

TEST(MixedModel, Validation) {
    const auto ids = fixtures::make_ids("g", 4);
    const LabeledMatrix rect(ids, fixtures::random_matrix(4, 3, 1));
    const auto plan = validate_partition(rect, std::nullopt, std::nullopt, 2);
    CriterionSpec spec;
    spec.name = "PEVMEANMM";
    EXPECT_EQ(error_of([&] { CriterionContext(rect, plan, spec); }), ErrorCode::SizeError);
    const LabeledMatrix sq(ids, fixtures::random_psd(4, 1));
    spec.vg = Matrix::Identity(2, 2);
    spec.ve = Matrix::Identity(2, 2);
    EXPECT_EQ(error_of([&] { CriterionContext(sq, plan, spec); }), ErrorCode::UnsupportedCriterion);
    spec.vg.reset();
    spec.ve.reset();
    spec.fixed_design = Matrix::Ones(3, 1);
    EXPECT_EQ(error_of([&] { CriterionContext(sq, plan, spec); }), ErrorCode::SizeError);
}

TEST(Maximin, CollinearEndpoints) {
    Matrix x(3, 1);
    x << 0, 1, 10;
    const LabeledMatrix p({"p0", "p1", "p10"}, x);
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 2);
    CriterionSpec spec;
    spec.name = "MAXIMIN";
    const CriterionContext ctx(p, plan, spec);
    EXPECT_DOUBLE_EQ(ctx.evaluate_ids({"p0", "p10"}), -10.0);
    EXPECT_DOUBLE_EQ(ctx.evaluate_ids({"p0", "p1"}), -1.0);
    EXPECT_DOUBLE_EQ(ctx.evaluate_ids({"p1", "p10"}), -9.0);
}

TEST(Maximin, CoincidentPoints) {
    const LabeledMatrix p(fixtures::make_ids("p", 5), Matrix::Constant(5, 2, 3.0));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 3);
    CriterionSpec spec;
    spec.name = "MAXIMIN";
    const CriterionContext ctx(p, plan, spec);
    EXPECT_EQ(ctx.evaluate_ids({"p1", "p3", "p5"}), 0.0);
}

TEST(Maximin, NeverPositive) {
    const LabeledMatrix p(fixtures::make_ids("p", 12), fixtures::random_matrix(12, 2, 4));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 4);
    CriterionSpec spec;
    spec.name = "MAXIMIN";
    const CriterionContext ctx(p, plan, spec);
    EXPECT_LT(ctx.evaluate_ids({"p1", "p2", "p3", "p4"}), 0.0);
    const auto one = validate_partition(p, std::nullopt, std::nullopt, 1);
    EXPECT_EQ(error_of([&] { CriterionContext(p, one, spec); }), ErrorCode::SizeError);
}

TEST(VanRaden, SingleMarker) {
    Matrix m(2, 1);
    m << 0, 2;
    const Matrix a = formulas::vanraden_amat(m);
    EXPECT_DOUBLE_EQ(a(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(a(0, 1), -2.0);
    EXPECT_DOUBLE_EQ(a(1, 0), -2.0);
    EXPECT_DOUBLE_EQ(a(1, 1), 2.0);
}

TEST(VanRaden, Monomorphic) {
    EXPECT_EQ(error_of([] { formulas::vanraden_amat(Matrix::Constant(4, 3, 2.0)); }), ErrorCode::MonomorphicData);
}

TEST(VanRaden, RandomMarkers) {
    const Matrix m = fixtures::random_markers(15, 40, 3);
    const Matrix a = formulas::vanraden_amat(m);
    EXPECT_LT(linalg::asymmetry(a), 1e-12);
    const auto ev = naive::sym_eigenvalues(fixtures::to_naive(a));
    EXPECT_GT(*std::min_element(ev.begin(), ev.end()), -1e-10);
    EXPECT_NEAR(formulas::lower_triangle(a).mean(), naive_vanraden_entry_mean(fixtures::to_naive(m)), 1e-12);
}

TEST(KernelAlignment, AllFeaturesGiveZero) {
    const Matrix markers = fixtures::random_markers(10, 8, 5);  // individuals x markers
    const LabeledMatrix p(fixtures::make_ids("m", 8), markers.transpose(), fixtures::make_ids("i", 10));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 8);
    CriterionSpec spec;
    spec.name = "KERNELALIGN";
    const CriterionContext ctx(p, plan, spec);
    EXPECT_NEAR(ctx.evaluate_ids(plan.candidates), 0.0, 1e-24);

    spec.alignment_kernel = AlignmentKernel::Scaled;
    const CriterionContext scaled(p, plan, spec);
    EXPECT_NEAR(scaled.evaluate_ids(plan.candidates), 0.0, 1e-24);
}

TEST(KernelAlignment, MatchesDirectFormula) {
    const Matrix markers = fixtures::random_markers(9, 12, 6);
    const LabeledMatrix p(fixtures::make_ids("m", 12), markers.transpose(), fixtures::make_ids("i", 9));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 4);
    CriterionSpec spec;
    spec.name = "KERNELALIGN";
    const CriterionContext ctx(p, plan, spec);
    const std::vector<std::size_t> sel{1, 4, 6, 10};
    Matrix sub(9, 4);
    for (int j = 0; j < 4; ++j) sub.col(j) = markers.col(static_cast<Eigen::Index>(sel[j]));
    const double expected = formulas::lower_triangle_msd(formulas::vanraden_amat(markers), formulas::vanraden_amat(sub));
    EXPECT_NEAR(ctx.evaluate_rows(sel), expected, 1e-14);

    spec.target_kernel = Matrix::Identity(3, 3);
    EXPECT_EQ(error_of([&] { CriterionContext(p, plan, spec); }), ErrorCode::SizeError);
}

TEST(Aic, ClosedForm) {
    // residuals (1,-1,-1,1) are orthogonal to [1, x], so RSS/n = 1
    Matrix x(4, 1);
    x << 1, 2, 3, 4;
    Vector y(4);
    y << 2 + 0.5 * 1 + 1, 2 + 0.5 * 2 - 1, 2 + 0.5 * 3 - 1, 2 + 0.5 * 4 + 1;
    const double expected = 4.0 * (std::log(2.0 * std::numbers::pi) + 1.0) + 6.0;
    EXPECT_NEAR(formulas::aic_ols(x, y), expected, 1e-12);

    const LabeledMatrix p({"v"}, x.transpose(), fixtures::make_ids("o", 4));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 1);
    CriterionSpec spec;
    spec.name = "AICOLS";
    EXPECT_EQ(error_of([&] { CriterionContext(p, plan, spec); }), ErrorCode::MissingParameter);
    spec.response = y;
    const CriterionContext ctx(p, plan, spec);
    EXPECT_NEAR(ctx.evaluate_ids({"v"}), expected, 1e-12);
    spec.response = Vector::Ones(3);
    EXPECT_EQ(error_of([&] { CriterionContext(p, plan, spec); }), ErrorCode::SizeError);
}

TEST(Dfbetas, AllRowsGiveZero) {
    const LabeledMatrix p(fixtures::make_ids("o", 12), fixtures::random_matrix(12, 3, 2));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 12);
    CriterionSpec spec;
    spec.name = "DFBETAS";
    const CriterionContext ctx(p, plan, spec);
    EXPECT_EQ(ctx.evaluate_ids(plan.candidates), 0.0);
}

TEST(Dfbetas, MatchesDirectFormula) {
    const Matrix d = fixtures::random_matrix(15, 4, 3);
    const LabeledMatrix p(fixtures::make_ids("o", 15), d);
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 10);
    CriterionSpec spec;
    spec.name = "DFBETAS";
    spec.lambda = 0.01;
    const CriterionContext ctx(p, plan, spec);
    const std::vector<std::size_t> tr{0, 1, 2, 4, 5, 7, 9, 10, 12, 14};
    auto design = [&](const std::vector<std::size_t>& rows) {
        naive::Mat x;
        for (auto r : rows) {
            naive::Vec row{1.0};
            for (int j = 1; j < 4; ++j) row.push_back(d(static_cast<Eigen::Index>(r), j));
            x.push_back(row);
        }
        return x;
    };
    auto response = [&](const std::vector<std::size_t>& rows) {
        naive::Mat y;
        for (auto r : rows) y.push_back({d(static_cast<Eigen::Index>(r), 0)});
        return y;
    };
    std::vector<std::size_t> all(15);
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto coef = [&](const naive::Mat& x, const naive::Mat& y) {
        return naive::mul(naive::inverse(naive::add_diag(naive::mul(naive::transpose(x), x), 0.01)),
                          naive::mul(naive::transpose(x), y));
    };
    const auto xt = design(tr);
    const auto yt = response(tr);
    const auto b = coef(design(all), response(all));
    const auto bt = coef(xt, yt);
    const auto diff = naive::add(b, bt, -1.0);
    const auto g = naive::add_diag(naive::mul(naive::transpose(xt), xt), 0.01);
    const double quad = naive::mul(naive::mul(naive::transpose(diff), g), diff)[0][0];
    const auto fitted = naive::mul(xt, bt);
    naive::Vec res;
    for (std::size_t i = 0; i < tr.size(); ++i) res.push_back(yt[i][0] - fitted[i][0]);
    const double mu = naive::mean(res);
    double ss = 0.0;
    for (double r : res) ss += (r - mu) * (r - mu);
    const double sd = std::sqrt(ss / static_cast<double>(res.size() - 1));
    EXPECT_NEAR(ctx.evaluate_rows(tr), -quad / sd, 1e-10);
}

TEST(GainInbreeding, PureGain) {
    Matrix p(6, 4);
    p.col(0) << 0.5, -1.0, 2.0, 0.1, 1.5, -0.3;
    p.rightCols(3) = fixtures::random_markers(6, 3, 1).array() - 1.0;
    const LabeledMatrix m(fixtures::make_ids("i", 6), p);
    const auto plan = validate_partition(m, std::nullopt, std::nullopt, 2);
    CriterionSpec spec;
    spec.name = "GAININB";
    EXPECT_EQ(error_of([&] { CriterionContext(m, plan, spec); }), ErrorCode::MissingParameter);
    spec.weight = 0.0;
    const CriterionContext ctx(m, plan, spec);
    EXPECT_DOUBLE_EQ(ctx.evaluate_ids({"i3", "i5"}), -(2.0 + 1.5) / 2.0);
}

TEST(GainInbreeding, PureRelatedness) {
    Matrix p(7, 6);
    p.col(0) = fixtures::random_matrix(7, 1, 2);
    const Matrix markers = fixtures::random_markers(7, 5, 3);
    p.rightCols(5) = markers.array() - 1.0;
    const LabeledMatrix m(fixtures::make_ids("i", 7), p);
    const auto plan = validate_partition(m, std::nullopt, std::nullopt, 4);
    CriterionSpec spec;
    spec.name = "GAININB";
    spec.weight = 1.0;
    const CriterionContext ctx(m, plan, spec);
    const std::vector<std::size_t> sel{0, 2, 3, 6};
    const double expected = naive_vanraden_entry_mean(naive::rows(fixtures::to_naive(markers), sel));
    EXPECT_NEAR(ctx.evaluate_rows(sel), expected, 1e-12);

    spec.weight = 0.5;
    const CriterionContext half(m, plan, spec);
    double g = 0.0;
    for (auto s : sel) g += p(static_cast<Eigen::Index>(s), 0);
    EXPECT_NEAR(half.evaluate_rows(sel), -0.5 * g / 4.0 + 0.5 * expected, 1e-12);
}

TEST(FitLogdet, ZeroWeightIsMse) {
    const Matrix x = fixtures::random_matrix(20, 3, 4);
    const Vector y = fixtures::random_matrix(20, 1, 5).col(0);
    const naive::Mat nx = fixtures::to_naive(x);
    naive::Mat ny;
    for (int i = 0; i < 20; ++i) ny.push_back({y[i]});
    const auto coef = naive::mul(naive::inverse(naive::add_diag(naive::mul(naive::transpose(nx), nx), 1e-7)),
                                 naive::mul(naive::transpose(nx), ny));
    const auto fit = naive::mul(nx, coef);
    double mse = 0.0;
    for (int i = 0; i < 20; ++i) mse += (y[i] - fit[static_cast<std::size_t>(i)][0]) * (y[i] - fit[static_cast<std::size_t>(i)][0]);
    mse /= 20.0;
    EXPECT_NEAR(formulas::fit_logdet(x, y, 0.0), mse, 1e-10);
    const double logdet = naive::log_abs_det(naive::mul(naive::transpose(nx), nx));
    EXPECT_NEAR(formulas::fit_logdet(x, y, 0.3), 0.7 * mse - 0.3 * logdet, 1e-10);
}

TEST(FitLogdet, ContextOverFeatureRows) {
    const Matrix obs = fixtures::random_matrix(25, 6, 7);  // observations x features
    const Vector y = fixtures::random_matrix(25, 1, 8).col(0);
    const LabeledMatrix p(fixtures::make_ids("f", 6), obs.transpose(), fixtures::make_ids("o", 25));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 3);
    CriterionSpec spec;
    spec.name = "FITLOGDET";
    spec.response = y;
    EXPECT_EQ(error_of([&] { CriterionContext(p, plan, spec); }), ErrorCode::MissingParameter);
    spec.weight = 0.1;
    const CriterionContext ctx(p, plan, spec);
    Matrix sel(25, 3);
    sel.col(0) = obs.col(0);
    sel.col(1) = obs.col(2);
    sel.col(2) = obs.col(5);
    EXPECT_NEAR(ctx.evaluate_ids({"f1", "f3", "f6"}), formulas::fit_logdet(sel, y, 0.1), 1e-12);
}

TEST(FitLogdet, SingularSentinel) {
    Matrix x(5, 2);
    x.col(0) = fixtures::random_matrix(5, 1, 1);
    x.col(1) = 2.0 * x.col(0);
    EXPECT_EQ(formulas::fit_logdet(x, Vector::Ones(5), 0.5), formulas::kSingularSentinel);
}

TEST(Registry, CatalogContents) {
    const CriterionRegistry reg;
    const auto cat = reg.catalog();
    std::vector<std::string> names;
    for (const auto& c : cat) names.push_back(c.name);
    for (const auto& k : kXKinds) EXPECT_NE(std::find(names.begin(), names.end(), k), names.end()) << k;
    for (std::string n : {"PEVMEANMM", "CDMEANMM", "GAUSSMEANMM", "MAXIMIN", "KERNELALIGN", "AICOLS", "DFBETAS",
                          "GAININB", "FITLOGDET"}) {
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    }
    EXPECT_EQ(cat.size(), 26u);
    EXPECT_EQ(builtin_criterion_names().size(), 26u);
    for (const auto& c : cat) {
        EXPECT_TRUE(c.builtin);
        EXPECT_FALSE(c.formula.empty());
    }
}

TEST(Registry, CustomRegistration) {
    CriterionRegistry reg;
    reg.register_custom("MYCRIT", [](std::span<const std::size_t> rows, const CriterionContext&) {
        return static_cast<double>(rows.size());
    });
    EXPECT_EQ(error_of([&] { reg.register_custom("DOPT", [](auto, const auto&) { return 0.0; }); }),
              ErrorCode::ShadowingBuiltin);
    EXPECT_EQ(error_of([&] { reg.register_custom("MYCRIT", [](auto, const auto&) { return 0.0; }); }),
              ErrorCode::DuplicateName);
    ASSERT_NE(reg.find("MYCRIT"), nullptr);
    EXPECT_FALSE(reg.find("MYCRIT")->builtin);

    const LabeledMatrix p(fixtures::make_ids("r", 5), fixtures::random_matrix(5, 2, 1));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 3);
    CriterionSpec spec;
    spec.name = "MYCRIT";
    const CriterionContext ctx(p, plan, spec, reg);
    EXPECT_EQ(ctx.evaluate_ids({"r1", "r2", "r3"}), 3.0);
}

TEST(Registry, UnknownName) {
    const LabeledMatrix p(fixtures::make_ids("r", 5), fixtures::random_matrix(5, 2, 1));
    const auto plan = validate_partition(p, std::nullopt, std::nullopt, 3);
    CriterionSpec spec;
    spec.name = "NOSUCH";
    EXPECT_EQ(error_of([&] { CriterionContext(p, plan, spec); }), ErrorCode::UnknownCriterion);
    spec.name = "dopt";
    EXPECT_EQ(error_of([&] { CriterionContext(p, plan, spec); }), ErrorCode::UnknownCriterion);
}
