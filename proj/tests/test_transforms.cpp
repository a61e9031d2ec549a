#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "siegel/transforms.hpp"

using namespace siegel;

namespace {

using Density = std::function<cplx(cplx)>;

std::vector<Density> densities() {
    return {
        [](cplx z) { return cplx(oracle::bump(z)); },
        [](cplx z) { return oracle::bump(z) * std::conj(z) * std::conj(z) * cplx(1.0, 0.5); },
        [](cplx z) { return oracle::bump(z) * (z + 0.3 * std::pow(std::conj(z), 3) + 0.5); },
    };
}

PolarField field_of(const PolarGrid& g, const Density& d) { return from_samples(sample(g, d)); }

std::vector<cplx> probes() {
    std::vector<cplx> p;
    for (int i = 0; i < 20; ++i) {
        double r = 0.1 + 1.3 * i / 19.0;
        p.push_back(std::polar(r, 0.7 + 2.1 * i));
    }
    return p;
}

double rel_err(cplx got, cplx want, double scale) { return std::abs(got - want) / std::max(std::abs(want), 0.1 * scale); }

}  // namespace

TEST(Transforms, ZeroMapsToZero) {
    auto g = uniform_grid(1.0 / 32, 1.0, 32, 16);
    PolarField z = field_of(g, [](cplx) { return cplx(0.0); });
    EXPECT_EQ(cauchy_transform(z).h.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(hilbert_transform(z).h.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Transforms, IndicatorClosedForms) {
    double R = 1.0;
    auto g = uniform_grid(2.0 / 256, 2.0, 256, 64, R);
    auto h = field_of(g, [&](cplx z) { return std::abs(z) <= R * (1 + 1e-12) ? cplx(1.0) : cplx(0.0); });
    auto P = cauchy_transform(h);
    auto T = hilbert_transform(h);
    double cell = g.r[1] - g.r[0];
    for (cplx z : probes()) {
        if (std::abs(std::abs(z) - R) < 3 * cell) continue;
        bool in = std::abs(z) < R;
        cplx p = in ? std::conj(z) : R * R / z;
        cplx t = in ? cplx(0.0) : -R * R / (z * z);
        EXPECT_LE(std::abs(eval(P, z).value - p), 1e-3) << z;
        EXPECT_LE(std::abs(eval(T, z).value - t), 1e-3) << z;
    }
    // exact on grid nodes
    int km1 = g.col(-1), km2 = g.col(-2);
    for (int i = 0; i < g.M(); ++i) {
        double r = g.r[i];
        EXPECT_NEAR(std::abs(P.h(i, km1) - (r <= R ? r : R * R / r)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(T.h(i, km2) - (r < R ? 0.0 : (r > R ? -R * R / (r * r) : 0.0))), 0.0, 1e-12);
    }
}

TEST(Transforms, AgreeWithPlanarQuadrature) {
    auto g = uniform_grid(1.5 / 128, 1.5, 128, 128, 1.0);
    double eps = 2 * (g.r[1] - g.r[0]);
    for (const auto& d : densities()) {
        auto h = field_of(g, d);
        auto P = cauchy_transform(h);
        auto T = hilbert_transform(h);
        std::vector<cplx> po, to, pn, tn;
        for (cplx z : probes()) {
            po.push_back(oracle::cauchy(d, z, 1.0));
            to.push_back(oracle::hilbert(d, z, 1.0, eps));
            pn.push_back(eval(P, z).value);
            tn.push_back(eval(T, z).value);
        }
        double ps = 0.0, ts = 0.0;
        for (std::size_t i = 0; i < po.size(); ++i) ps = std::max(ps, std::abs(po[i])), ts = std::max(ts, std::abs(to[i]));
        for (std::size_t i = 0; i < po.size(); ++i) {
            EXPECT_LE(rel_err(pn[i], po[i], ps), 5e-2) << i;
            EXPECT_LE(rel_err(tn[i], to[i], ts), 5e-2) << i;
        }
    }
}

TEST(Transforms, SingleModeSelection) {
    auto g = uniform_grid(1.5 / 96, 1.5, 96, 32, 1.0);
    Density d = [](cplx z) { return oracle::bump(z) * z * z * z; };
    auto h = field_of(g, d);
    auto P = cauchy_transform(h);
    auto T = hilbert_transform(h);
    double pmax = P.h.cwiseAbs().maxCoeff(), tmax = T.h.cwiseAbs().maxCoeff();
    for (int col = 0; col < g.N; ++col) {
        if (g.mode(col) != 2) { EXPECT_LE(P.h.col(col).cwiseAbs().maxCoeff(), 1e-12 * pmax) << g.mode(col); }
        if (g.mode(col) != 1) { EXPECT_LE(T.h.col(col).cwiseAbs().maxCoeff(), 1e-12 * tmax) << g.mode(col); }
    }
    // brute force: the quadrature values on a circle carry only e^{2i phi}
    double r = 0.6;
    std::vector<cplx> v;
    for (int j = 0; j < 8; ++j) v.push_back(oracle::cauchy(d, std::polar(r, two_pi * j / 8), 1.0));
    for (int k = -3; k <= 4; ++k) {
        cplx c = 0.0;
        for (int j = 0; j < 8; ++j) c += v[j] * std::polar(1.0, -k * two_pi * j / 8) / 8.0;
        if (k != 2) { EXPECT_LE(std::abs(c), 1e-6 * std::abs(v[0])); }
    }
}

TEST(Transforms, HilbertAtOrigin) {
    auto g = uniform_grid(1.5 / 128, 1.5, 128, 64, 1.0);
    Density d = [](cplx z) { return oracle::bump(z) * z * z * cplx(0.5, 1.0); };
    auto res = hilbert_transform_full(field_of(g, d));
    EXPECT_FALSE(res.origin_divergent);
    cplx want = oracle::hilbert(d, 0.0, 1.0, 2 * (g.r[1] - g.r[0]));
    EXPECT_LE(std::abs(res.origin_c0 - want), 1e-3 * std::abs(want));
    // every other mode vanishes at r = 0: the k != 0 values shrink with r
    for (int col = 0; col < g.N; ++col) {
        if (g.mode(col) == 0) continue;
        EXPECT_LE(std::abs(res.field.h(0, col)), 0.05 * std::abs(want)) << g.mode(col);
    }
    Density bad = [](cplx z) { return std::abs(z) > 0 ? oracle::bump(z) * z * z / std::norm(z) : cplx(0.0); };
    EXPECT_TRUE(hilbert_transform_full(field_of(g, bad)).origin_divergent);
}

TEST(Transforms, DerivativeIdentities) {
    auto g = uniform_grid(1.5 / 200, 1.5, 200, 128, 1.0);
    Density d = densities()[2];
    auto h = field_of(g, d);
    auto P = to_samples(cauchy_transform(h));
    auto T = to_samples(hilbert_transform(h));
    auto H = to_samples(h);
    double dr = g.r[1] - g.r[0], dphi = two_pi / g.N;
    double errbar = 0.0, errd = 0.0;
    for (int i = 3; i + 3 < g.M(); ++i) {
        if (std::abs(g.r[i] - 1.0) < 3 * dr) continue;
        if (g.r[i + 1] - g.r[i] != g.r[i] - g.r[i - 1] && std::abs((g.r[i + 1] - g.r[i]) - (g.r[i] - g.r[i - 1])) > 1e-12) continue;
        for (int j = 0; j < g.N; ++j) {
            int jp = (j + 1) % g.N, jm = (j + g.N - 1) % g.N;
            cplx Pr = (P.v(i + 1, j) - P.v(i - 1, j)) / (g.r[i + 1] - g.r[i - 1]);
            cplx Pp = (P.v(i, jp) - P.v(i, jm)) / (2 * dphi);
            cplx e = std::polar(1.0, g.phi(j));
            cplx dbar = e / 2.0 * (Pr + cplx(0, 1) / g.r[i] * Pp);
            cplx dz = std::conj(e) / 2.0 * (Pr - cplx(0, 1) / g.r[i] * Pp);
            errbar = std::max(errbar, std::abs(dbar - H.v(i, j)));
            errd = std::max(errd, std::abs(dz - T.v(i, j)));
        }
    }
    EXPECT_LE(errbar, 1e-2);
    EXPECT_LE(errd, 1e-2);
}

TEST(Transforms, Linearity) {
    std::mt19937 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    auto g = geometric_grid(0.01, 2.0, 64, 32, 1.0);
    auto rnd = [&] {
        PolarSamples s = sample(g, [](cplx) { return cplx(0.0); });
        for (int i = 0; i < g.M(); ++i)
            if (g.r[i] <= 1.0)
                for (int j = 0; j < g.N; ++j) s.v(i, j) = cplx(n(rng), n(rng));
        return from_samples(s);
    };
    auto a = rnd(), b = rnd();
    cplx al(0.3, -1.2), be(2.0, 0.4);
    PolarField c = a;
    c.h = al * a.h + be * b.h;
    for (auto tr : {cauchy_transform, hilbert_transform}) {
        auto ta = tr(a), tb = tr(b), tc = tr(c);
        Table lin = al * ta.h + be * tb.h;
        EXPECT_LE((tc.h - lin).cwiseAbs().maxCoeff(), 1e-12 * lin.cwiseAbs().maxCoeff());
    }
}

TEST(Transforms, RecursionMatchesDirectQuadrature) {
    std::mt19937 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    auto g = geometric_grid(0.05, 1.0, 120, 32);
    PolarField h;
    h.grid = g;
    h.h.resize(g.M(), g.N);
    for (int i = 0; i < g.M(); ++i)
        for (int c = 0; c < g.N; ++c) h.h(i, c) = cplx(n(rng), n(rng));
    auto t = build_radial_tables(h, 1, 0);
    const auto& r = g.r;
    for (int col = 0; col < g.N; ++col) {
        double e = t.exponent(col);
        double scale = std::max(t.inner.col(col).cwiseAbs().maxCoeff(), t.outer.col(col).cwiseAbs().maxCoeff());
        for (int i = 0; i < g.M(); i += 7) {
            cplx direct = 0.0;
            auto lin = [&](int m, double rho) {
                double w = (rho - r[m]) / (r[m + 1] - r[m]);
                return (1 - w) * t.src(m, col) + w * t.src(m + 1, col);
            };
            if (t.uses_inner(col)) {
                direct = t.src(0, col) * r[0] / (t.origin_order(col) - e + 1.0) * std::pow(r[i] / r[0], e);
                for (int m = 0; m < i; ++m)
                    direct += oracle::gauss([&](double rho) { return std::pow(r[i] / rho, e) * lin(m, rho); }, r[m], r[m + 1]);
                EXPECT_LE(std::abs(direct - t.inner(i, col)), 1e-10 * scale) << col << " " << i;
            } else {
                for (int m = i; m + 1 < g.M(); ++m)
                    direct += oracle::gauss([&](double rho) { return std::pow(r[i] / rho, e) * lin(m, rho); }, r[m], r[m + 1]);
                EXPECT_LE(std::abs(direct - t.outer(i, col)), 1e-10 * scale) << col << " " << i;
            }
        }
    }
}

TEST(Transforms, LpBoundedness) {
    auto g = uniform_grid(2.0 / 128, 2.0, 128, 64, 1.0);
    std::mt19937 rng(6);
    std::normal_distribution<double> n(0.0, 1.0);
    double cp = hilbert_cp(4.0);
    for (int trial = 0; trial < 4; ++trial) {
        cplx a(n(rng), n(rng)), b(n(rng), n(rng)), c(n(rng), n(rng));
        Density d = [&](cplx z) { return oracle::bump(z) * (a + b * z + c * std::conj(z) * std::conj(z)); };
        auto h = field_of(g, d);
        auto T = to_samples(hilbert_transform(h));
        auto H = to_samples(h);
        auto lp = [&](const Table& v) {
            double s = 0.0;
            for (int i = 0; i < g.M(); ++i) {
                double w = g.r[i] * (i + 1 < g.M() ? g.r[i + 1] - g.r[i] : g.r[i] - g.r[i - 1]);
                for (int j = 0; j < g.N; ++j) s += std::pow(std::abs(v(i, j)), 4) * w;
            }
            return std::pow(s, 0.25);
        };
        EXPECT_LE(lp(T.v), cp * lp(H.v) * 1.1);
    }
}

TEST(Transforms, HolderHeuristic) {
    auto g = uniform_grid(1.0 / 64, 1.0, 64, 64);
    EXPECT_FALSE(holder_warning(field_of(g, [](cplx z) { return oracle::bump(z * 0.9) * z; })));
    std::mt19937 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    auto s = sample(g, [&](cplx) { return cplx(n(rng), n(rng)); });
    EXPECT_TRUE(holder_warning(from_samples(s)));
}

TEST(Transforms, CauchyEvaluationOffGrid) {
    auto g = uniform_grid(1.5 / 128, 1.5, 128, 64, 1.0);
    Density d = densities()[2];
    CauchyTransform P(field_of(g, d));
    for (cplx z : {cplx(0.31, 0.2), cplx(-0.7, 0.55), cplx(1.2, -0.1)}) {
        cplx want = oracle::cauchy(d, z, 1.0);
        EXPECT_LE(std::abs(P(z) - want), 2e-3 * std::abs(want) + 1e-4) << z;
    }
    cplx want0 = oracle::cauchy(d, 0.0, 1.0);
    EXPECT_LE(std::abs(P.at_origin() - want0), 2e-3 * std::abs(want0) + 1e-4);
}
