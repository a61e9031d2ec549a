#include <random>

#include <gtest/gtest.h>

#include "siegel/analytic_map.hpp"
#include "siegel/io.hpp"

using namespace siegel;

namespace {

AnalyticMap table_map() { return read_map(std::string(SIEGEL_DATA_DIR) + "/fhat_paper.json"); }

AnalyticMap random_map(std::mt19937& rng, int D, double rho) {
    std::normal_distribution<double> n(0.0, 1.0);
    AnalyticMap f;
    f.rho = rho;
    for (int k = 1; k <= D; ++k) f.c.push_back(cplx(n(rng), n(rng)) * std::pow(rho, -k));
    return f;
}

// Columns are e_1..e_D in monomial coordinates z^1..z^D (the z^{D+1} row is the spill).
Eigen::MatrixXcd basis_matrix(int D, double rho) {
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(D, D);
    for (int j = 1; j <= D; ++j) {
        auto e = basis_vector(j, rho);
        for (int k = 1; k <= D; ++k) B(k - 1, j - 1) = e.coeff(k);
    }
    return B;
}

std::vector<cplx> dense_expansion(const AnalyticMap& f) {
    int D = f.degree();
    Eigen::VectorXcd c(D);
    for (int k = 1; k <= D; ++k) c(k - 1) = f.coeff(k);
    Eigen::VectorXcd x = basis_matrix(D, f.rho).partialPivLu().solve(c);
    return std::vector<cplx>(x.data(), x.data() + D);
}

}  // namespace

TEST(AnalyticMapEval, IdentityAndOrigin) {
    AnalyticMap id({1.0});
    EXPECT_EQ(id(0.5), cplx(0.5));
    EXPECT_EQ(quadratic_literal()(0.0), cplx(0.0));
    auto r = eval(id, 3.0);
    EXPECT_TRUE(r.extrapolated);
}

TEST(AnalyticMapEval, TableMapIsCriticalAtOne) {
    auto f = table_map();
    EXPECT_LE(std::abs(f.deriv(1.0)), 1e-3);
    EXPECT_TRUE(f.critically_normalized());
}

TEST(AnalyticMapNorm, Weighted) {
    EXPECT_DOUBLE_EQ(norm_weighted(AnalyticMap({1.0}, 2.0)), 2.0);
    AnalyticMap q({1.0, -0.5}, 2.266);
    EXPECT_NEAR(norm_weighted(q), 2.266 + 2.266 * 2.266 / 2, 1e-12);
    EXPECT_NEAR(norm_weighted(q), 4.833378, 1e-6);
    double v = norm_weighted(table_map());
    EXPECT_NEAR(1.88e-3 / v, 0.89e-4, 0.01e-4);
}

TEST(AnalyticMapNorm, BasisExamples) {
    double rho = 2.266;
    EXPECT_NEAR(norm_basis(basis_vector(2, rho)), 1.0, 1e-14);
    auto f = 3.0 * basis_vector(2, rho) + 4.0 * basis_vector(5, rho);
    EXPECT_NEAR(norm_basis(f), 7.0, 1e-13);
}

TEST(AnalyticMapNorm, BasisMatchesDenseSolve) {
    AnalyticMap z2({0.0, 1.0}, 2.266);
    auto tri = to_basis(z2).f;
    auto dense = dense_expansion(z2);
    double s = 0.0;
    for (std::size_t j = 0; j < tri.size(); ++j) {
        EXPECT_NEAR(std::abs(tri[j] - dense[j]), 0.0, 1e-12 * (1 + std::abs(dense[j])));
        s += std::abs(dense[j]);
    }
    EXPECT_NEAR(norm_basis(z2), s, 1e-12 * s);
    // z^2 = ||g_2|| e_2 + (2/3) z^3, so the e_2 coordinate is ||g_2||
    EXPECT_NEAR(std::abs(tri[1] - basis_scale(2, 2.266)), 0.0, 1e-12);

    std::mt19937 rng(7);
    auto f = random_map(rng, 17, 2.266);
    tri = to_basis(f).f;
    dense = dense_expansion(f);
    for (std::size_t j = 0; j < tri.size(); ++j) EXPECT_NEAR(std::abs(tri[j] - dense[j]), 0.0, 1e-10 * (1 + std::abs(dense[j])));
}

TEST(AnalyticMapProjection, Leq) {
    double rho = 2.266;
    auto e3 = basis_vector(3, rho);
    auto p = project_leq(e3, 5);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(std::abs(p.coeff(k) - e3.coeff(k)), 0.0, 1e-15);
    auto z = project_leq(e3, 2);
    for (int k = 1; k <= 6; ++k) EXPECT_NEAR(std::abs(z.coeff(k)), 0.0, 1e-15);

    AnalyticMap f({0.0, 1.0, 0.0, 1.0}, rho);
    auto dense = dense_expansion(f);
    auto q = project_leq(f, 2);
    auto expect = dense[0] * basis_vector(1, rho) + dense[1] * basis_vector(2, rho);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(std::abs(q.coeff(k) - expect.coeff(k)), 0.0, 1e-12);
    auto qq = project_leq(q, 2);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(std::abs(qq.coeff(k) - q.coeff(k)), 0.0, 1e-12);
    auto rest = project_gt(f, 2);
    for (int k = 1; k <= 5; ++k) EXPECT_NEAR(std::abs((q + rest).coeff(k) - f.coeff(k)), 0.0, 1e-12);
    auto s = project_leq(cplx(2.0, -1.0) * f, 2);
    for (int k = 1; k <= 4; ++k) EXPECT_NEAR(std::abs(s.coeff(k) - cplx(2.0, -1.0) * q.coeff(k)), 0.0, 1e-12);
}

TEST(AnalyticMapProjection, Stable) {
    auto P = quadratic_literal();
    auto Ps = project_stable(P);
    EXPECT_EQ(Ps.c, P.c);
    auto z = project_stable(AnalyticMap({1.0}));
    EXPECT_EQ(z.c[0], siegel_multiplier);
    std::mt19937 rng(3);
    auto f = random_map(rng, 9, 2.266);
    auto once = project_stable(f), twice = project_stable(once);
    EXPECT_EQ(once.c, twice.c);
    for (int k = 2; k <= 9; ++k) EXPECT_EQ(once.coeff(k), f.coeff(k));
}

TEST(AnalyticMapDynamics, DerivativeAndOrbit) {
    AnalyticMap sq({0.0, 1.0});
    EXPECT_EQ(sq.deriv(1.0), cplx(2.0));
    EXPECT_EQ(horner(derivative(sq), 1.0), cplx(2.0));
    auto P = quadratic_literal();
    auto o = iterate(P, 4, 1.0);
    ASSERT_EQ(o.points.size(), 4u);
    cplx z = 1.0;
    for (int i = 0; i < 4; ++i) z = z * z + siegel_multiplier * z;
    EXPECT_NEAR(std::abs(o.points[3] - z), 0.0, 1e-14);
    AnalyticMap id({1.0});
    auto oi = iterate(id, 5, cplx(0.3, 0.2));
    for (auto w : oi.points) EXPECT_EQ(w, cplx(0.3, 0.2));
    EXPECT_FALSE(oi.escape);
    auto esc = iterate(AnalyticMap({2.0}, 1.0), 5, 0.3);
    ASSERT_TRUE(esc.escape);
    EXPECT_EQ(*esc.escape, 2);
}

TEST(AnalyticMapDynamics, RepellingFixedPoint) {
    auto P = quadratic_literal();
    cplx a = find_repelling_fixed_point(P, 1.0 - siegel_multiplier);
    EXPECT_NEAR(std::abs(a - (1.0 - siegel_multiplier)), 0.0, 1e-14);
    EXPECT_THROW(find_repelling_fixed_point(AnalyticMap({siegel_multiplier}), 1.0), numerical_error);

    auto f = table_map();
    cplx af = repelling_fixed_point(f);
    EXPECT_LE(std::abs(f(af) - af), 1e-12);
    EXPECT_GT(std::abs(f.deriv(af)), 1.0);
    EXPECT_NEAR(std::abs(af - cplx(0.6483, -2.0404)), 0.0, 1e-3);
    // The neutral fixed point attracts Newton from the quadratic's closed form.
    EXPECT_THROW(find_repelling_fixed_point(f, 1.0 - siegel_multiplier), numerical_error);

    auto q = quadratic_normalized();
    EXPECT_NEAR(std::abs(repelling_fixed_point(q) - 2.0 * (1.0 - 1.0 / siegel_multiplier)), 0.0, 1e-12);
}

TEST(AnalyticMapInvariants, MaximumBoundedByNorm) {
    std::mt19937 rng(11);
    std::vector<AnalyticMap> maps = {table_map(), quadratic_normalized()};
    for (int t = 0; t < 5; ++t) maps.push_back(random_map(rng, 12, 2.266));
    for (const auto& f : maps) {
        double n = norm_weighted(f), mx = 0.0;
        for (int j = 0; j < 360; ++j) mx = std::max(mx, std::abs(f(std::polar(f.rho, two_pi * j / 360))));
        EXPECT_LE(mx, n + 1e-10);
    }
}

TEST(AnalyticMapInvariants, CauchyEstimate) {
    std::mt19937 rng(12);
    double rho = 2.266, rp = 3.0;
    for (int t = 0; t < 5; ++t) {
        auto f = random_map(rng, 10, rho);
        double sup = 0.0;
        for (int j = 0; j < 4096; ++j) sup = std::max(sup, std::abs(f(std::polar(rp, two_pi * j / 4096))));
        EXPECT_LE(norm_weighted(f), rho / (rp - rho) * sup + 1e-8);
    }
}

TEST(AnalyticMapInvariants, BasisRoundTrip) {
    std::mt19937 rng(5);
    for (int t = 0; t < 5; ++t) {
        auto f = random_map(rng, 17, 2.266);
        auto ex = to_basis(f);
        auto g = from_basis(ex.f, f.rho);
        double scale = norm_weighted(f);
        for (int k = 1; k <= 17; ++k)
            EXPECT_LE(std::abs(g.coeff(k) - f.coeff(k)) * std::pow(f.rho, k), 1e-12 * scale);
        EXPECT_NEAR(std::abs(g.coeff(18) + (-ex.spill)), 0.0, 1e-12 * std::abs(ex.spill) + 1e-300);
    }
}

TEST(AnalyticMapInvariants, BasisCriticalAtOne) {
    for (int j = 1; j <= 30; ++j) EXPECT_LE(std::abs(basis_vector(j, 2.266).deriv(1.0)), 1e-14);
}

TEST(AnalyticMapIo, JsonRoundTrip) {
    auto f = table_map();
    auto g = map_from_json(json::parse(map_to_json(f).dump()));
    EXPECT_EQ(f.c, g.c);
    EXPECT_EQ(f.rho, g.rho);
    auto j = map_to_json(f);
    j["c0"] = json::array({0.1, 0.0});
    EXPECT_THROW(map_from_json(j), std::invalid_argument);
    j["c0"] = json::array({0.0, 0.0});
    EXPECT_NO_THROW(map_from_json(j));
}
