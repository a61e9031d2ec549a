#include <random>

#include <gtest/gtest.h>

#include "siegel/polar_field.hpp"

using namespace siegel;

namespace {

PolarSamples random_samples(const PolarGrid& g, std::mt19937& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    PolarSamples s;
    s.grid = g;
    s.v.resize(g.M(), g.N);
    for (int i = 0; i < g.M(); ++i)
        for (int j = 0; j < g.N; ++j) s.v(i, j) = cplx(n(rng), n(rng));
    return s;
}

}  // namespace

TEST(PolarField, ConstantRowsGiveZeroMode) {
    auto g = geometric_grid(0.01, 2.0, 16, 32);
    auto f = from_samples(sample(g, [](cplx) { return cplx(1.0, 0.0); }));
    for (int i = 0; i < g.M(); ++i)
        for (int col = 0; col < g.N; ++col)
            EXPECT_NEAR(std::abs(f.h(i, col) - (g.mode(col) == 0 ? 1.0 : 0.0)), 0.0, 1e-15);
}

TEST(PolarField, IdentityIsModeOne) {
    auto g = geometric_grid(0.01, 2.0, 16, 32);
    auto f = from_samples(sample(g, [](cplx z) { return z; }));
    for (int i = 0; i < g.M(); ++i)
        for (int col = 0; col < g.N; ++col)
            EXPECT_NEAR(std::abs(f.h(i, col) - (g.mode(col) == 1 ? g.r[i] : 0.0)), 0.0, 1e-12);
}

TEST(PolarField, MatchesDirectDft) {
    std::mt19937 rng(1);
    auto g = geometric_grid(0.1, 1.0, 8, 64);
    auto s = random_samples(g, rng);
    auto f = from_samples(s);
    for (int i = 0; i < g.M(); ++i)
        for (int col = 0; col < g.N; ++col) {
            int k = g.mode(col);
            cplx d = 0.0;
            for (int j = 0; j < g.N; ++j) d += s.v(i, j) * std::polar(1.0, -k * g.phi(j));
            EXPECT_NEAR(std::abs(f.h(i, col) - d / double(g.N)), 0.0, 1e-12);
        }
    auto back = to_samples(f);
    EXPECT_LE((back.v - s.v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PolarField, Parseval) {
    std::mt19937 rng(2);
    auto g = geometric_grid(0.1, 1.0, 8, 128);
    auto s = random_samples(g, rng);
    auto f = from_samples(s);
    for (int i = 0; i < g.M(); ++i) {
        double modes = f.h.row(i).cwiseAbs2().sum();
        double mean = s.v.row(i).cwiseAbs2().sum() / g.N;
        EXPECT_NEAR(modes, mean, 1e-10 * mean);
    }
}

TEST(PolarField, Eval) {
    auto g = geometric_grid(0.01, 2.0, 200, 32);
    auto c = from_samples(sample(g, [](cplx) { return cplx(2.5, -1.0); }));
    EXPECT_NEAR(std::abs(eval(c, cplx(0.7, -0.2)).value - cplx(2.5, -1.0)), 0.0, 1e-13);
    auto id = from_samples(sample(g, [](cplx z) { return z; }));
    cplx z(0.3, 0.4);
    auto v = eval(id, z);
    EXPECT_FALSE(v.extrapolated);
    double spacing = 0.5 * (std::pow(200.0, 1.0 / 199) - 1.0);
    EXPECT_LE(std::abs(v.value - z), spacing * spacing);
    auto low = eval(id, cplx(0.001, 0.0));
    EXPECT_TRUE(low.extrapolated);
    EXPECT_NEAR(std::abs(low.value - g.r[0]), 0.0, 1e-14);
}

TEST(PolarField, PointwiseProduct) {
    auto g = geometric_grid(0.1, 1.0, 6, 32);
    auto zero = sample(g, [](cplx) { return cplx(0.0); });
    auto two = sample(g, [](cplx) { return cplx(2.0); });
    EXPECT_EQ(pointwise_product(zero, two).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR((pointwise_product(two, two).array() - cplx(4.0)).abs().maxCoeff(), 0.0, 1e-15);

    std::mt19937 rng(3);
    auto a = random_samples(g, rng), b = random_samples(g, rng);
    PolarSamples prod{g, pointwise_product(a, b)};
    auto fp = from_samples(prod), fa = from_samples(a), fb = from_samples(b);
    for (int i = 0; i < g.M(); ++i)
        for (int c = 0; c < g.N; ++c) {
            cplx conv = 0.0;
            for (int m = 0; m < g.N; ++m) conv += fa.h(i, m) * fb.h(i, (c - m + g.N) % g.N);
            EXPECT_NEAR(std::abs(fp.h(i, c) - conv), 0.0, 1e-10);
        }
    auto other = geometric_grid(0.1, 1.0, 7, 32);
    EXPECT_THROW(pointwise_product(a, sample(other, [](cplx) { return cplx(1.0); })), std::invalid_argument);
}

TEST(PolarField, Validation) {
    PolarGrid g;
    g.N = 24;
    g.r = {0.1, 0.2};
    g.R = 0.2;
    EXPECT_THROW(validate(g), std::invalid_argument);
    g.N = 16;
    g.r = {0.1, 0.3, 0.2};
    EXPECT_THROW(validate(g), std::invalid_argument);
    auto ok = geometric_grid(0.1, 4.0, 10, 16, 1.0);
    EXPECT_TRUE(std::find(ok.r.begin(), ok.r.end(), 1.0) != ok.r.end());
}

TEST(PolarField, CsvHeader) {
    auto g = geometric_grid(0.1, 1.0, 4, 8);
    auto f = from_samples(sample(g, [](cplx z) { return z; }));
    auto csv = field_csv(f);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "# radii:4 modes:8 R:1");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 8);
    auto dump = samples_csv(to_samples(f));
    EXPECT_EQ(std::count(dump.begin(), dump.end(), '\n'), 32);
}
