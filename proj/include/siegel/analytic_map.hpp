#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>

#include "constants.hpp"

namespace siegel {

// Truncated Taylor series f(z) = sum_{k=1..D} c_k z^k, norm taken on |z| <= rho.
struct AnalyticMap {
    double rho = default_rho;
    std::vector<cplx> c;  // c[k-1] is the coefficient of z^k

    AnalyticMap() = default;
    AnalyticMap(std::vector<cplx> coeffs, double r = default_rho) : rho(r), c(std::move(coeffs)) {}

    int degree() const { return static_cast<int>(c.size()); }

    cplx coeff(int k) const {
        if (k < 1 || k > degree()) return 0.0;
        return c[k - 1];
    }

    cplx operator()(cplx z) const {
        cplx s = 0.0;
        for (int k = degree(); k >= 1; --k) s = (s + c[k - 1]) * z;
        return s;
    }

    cplx deriv(cplx z) const {
        cplx s = 0.0;
        for (int k = degree(); k >= 1; --k) s = s * z + double(k) * c[k - 1];
        return s;
    }

    bool critically_normalized(double tol = crit_tol) const { return std::abs(deriv(1.0)) <= tol; }
};

struct EvalResult {
    cplx value;
    bool extrapolated;
};

inline EvalResult eval(const AnalyticMap& f, cplx z) {
    return {f(z), std::abs(z) > f.rho};
}

inline AnalyticMap operator+(const AnalyticMap& a, const AnalyticMap& b) {
    AnalyticMap out;
    out.rho = a.rho;
    out.c.assign(std::max(a.degree(), b.degree()), 0.0);
    for (int k = 1; k <= out.degree(); ++k) out.c[k - 1] = a.coeff(k) + b.coeff(k);
    return out;
}

inline AnalyticMap operator*(cplx s, const AnalyticMap& a) {
    AnalyticMap out = a;
    for (auto& x : out.c) x *= s;
    return out;
}

inline AnalyticMap operator-(const AnalyticMap& a, const AnalyticMap& b) { return a + (-1.0) * b; }

inline double norm_weighted(const AnalyticMap& f, double rho) {
    double s = 0.0, rk = 1.0;
    for (int k = 1; k <= f.degree(); ++k) {
        rk *= rho;
        s += std::abs(f.c[k - 1]) * rk;
    }
    return s;
}

inline double norm_weighted(const AnalyticMap& f) { return norm_weighted(f, f.rho); }

// ||g_j||_rho for g_j = z^j - j/(j+1) z^{j+1}
inline double basis_scale(int j, double rho) {
    return std::pow(rho, j) * (1.0 + rho * j / (j + 1.0));
}

// e_j as a polynomial
inline AnalyticMap basis_vector(int j, double rho) {
    AnalyticMap e;
    e.rho = rho;
    e.c.assign(j + 1, 0.0);
    double s = basis_scale(j, rho);
    e.c[j - 1] = 1.0 / s;
    e.c[j] = -(j / (j + 1.0)) / s;
    return e;
}

inline AnalyticMap monomial_vector(int j, double rho) {
    AnalyticMap h;
    h.rho = rho;
    h.c.assign(j, 0.0);
    h.c[j - 1] = std::pow(rho, -j);
    return h;
}

struct BasisExpansion {
    std::vector<cplx> f;  // f[j-1] multiplies e_j
    cplx spill;           // dropped z^{D+1} coefficient
};

// Back-substitution: a_1 = c_1, a_k = c_k + (k-1)/k a_{k-1}, f_k = a_k ||g_k||.
inline BasisExpansion to_basis(const AnalyticMap& f) {
    int D = f.degree();
    BasisExpansion out;
    out.f.resize(D);
    cplx a = 0.0;
    for (int k = 1; k <= D; ++k) {
        a = f.c[k - 1] + ((k - 1.0) / k) * a;
        out.f[k - 1] = a * basis_scale(k, f.rho);
    }
    out.spill = D > 0 ? -(D / (D + 1.0)) * a : cplx(0.0);
    return out;
}

inline AnalyticMap from_basis(const std::vector<cplx>& fk, double rho) {
    AnalyticMap out;
    out.rho = rho;
    int n = static_cast<int>(fk.size());
    out.c.assign(n + 1, 0.0);
    for (int j = 1; j <= n; ++j) {
        cplx a = fk[j - 1] / basis_scale(j, rho);
        out.c[j - 1] += a;
        out.c[j] -= (j / (j + 1.0)) * a;
    }
    return out;
}

inline double norm_basis(const AnalyticMap& f) {
    double s = 0.0;
    for (cplx x : to_basis(f).f) s += std::abs(x);
    return s;
}

inline AnalyticMap project_leq(const AnalyticMap& f, int N) {
    auto e = to_basis(f).f;
    e.resize(std::min<std::size_t>(e.size(), std::max(N, 0)));
    if (e.empty()) return AnalyticMap({}, f.rho);
    return from_basis(e, f.rho);
}

inline AnalyticMap project_gt(const AnalyticMap& f, int N) { return f - project_leq(f, N); }

inline AnalyticMap project_stable(const AnalyticMap& f) {
    AnalyticMap out = f;
    if (out.c.empty()) out.c.push_back(0.0);
    out.c[0] = siegel_multiplier;
    return out;
}

// Coefficients of f' including its constant term: d[k] multiplies z^k.
inline std::vector<cplx> derivative(const AnalyticMap& f) {
    std::vector<cplx> d;
    for (int k = 1; k <= f.degree(); ++k) d.push_back(double(k) * f.c[k - 1]);
    return d;
}

inline cplx horner(const std::vector<cplx>& p, cplx z) {
    cplx s = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * z + *it;
    return s;
}

struct Orbit {
    std::vector<cplx> points;     // f(z), f^2(z), ...
    std::optional<int> escape;    // first index i (1-based) with |f^i(z)| > rho
};

inline Orbit iterate(const AnalyticMap& f, int m, cplx z) {
    Orbit o;
    o.points.reserve(m);
    for (int i = 1; i <= m; ++i) {
        z = f(z);
        o.points.push_back(z);
        if (!o.escape && std::abs(z) > f.rho) o.escape = i;
    }
    return o;
}

inline cplx find_repelling_fixed_point(const AnalyticMap& f, cplx seed, int max_iter = 100, double tol = 1e-13) {
    cplx z = seed;
    bool ok = false;
    for (int i = 0; i < max_iter; ++i) {
        cplx d = f.deriv(z) - 1.0;
        if (d == 0.0) break;
        cplx dz = (f(z) - z) / d;
        z -= dz;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
        if (std::abs(dz) <= tol * (1.0 + std::abs(z))) {
            ok = true;
            break;
        }
    }
    if (!ok || std::abs(f(z) - z) > 1e-10 * (1.0 + std::abs(z)))
        throw numerical_error("fixed point Newton iteration did not converge");
    if (std::abs(f.deriv(z)) <= 1.0) throw numerical_error("fixed point found is not repelling");
    return z;
}

// Solve f(z) = w by Newton from z0.
inline cplx inverse_newton(const AnalyticMap& f, cplx w, cplx z0, int max_iter = 60) {
    cplx z = z0;
    for (int i = 0; i < max_iter; ++i) {
        cplx dz = (f(z) - w) / f.deriv(z);
        z -= dz;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
        if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) return z;
    }
    if (std::isfinite(z.real()) && std::abs(f(z) - w) <= 1e-11 * (1.0 + std::abs(w))) return z;
    throw numerical_error("Newton inversion of the map failed");
}

// Roots of sum p[k] z^k; trailing zero coefficients are dropped.
inline std::vector<cplx> poly_roots(std::vector<cplx> p) {
    while (!p.empty() && p.back() == 0.0) p.pop_back();
    if (p.size() < 2) return {};
    Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(p.data(), p.size());
    Eigen::PolynomialSolver<cplx, Eigen::Dynamic> solver(v);
    std::vector<cplx> out;
    for (int i = 0; i < solver.roots().size(); ++i) out.push_back(solver.roots()(i));
    return out;
}

// Nonzero roots of f(z) = z.
inline std::vector<cplx> fixed_points(const AnalyticMap& f) {
    std::vector<cplx> p;
    for (int k = 1; k <= f.degree(); ++k) p.push_back(f.coeff(k) - (k == 1 ? 1.0 : 0.0));
    return poly_roots(p);
}

// Solutions of f(z) = w.
inline std::vector<cplx> preimages_of(const AnalyticMap& f, cplx w) {
    std::vector<cplx> p{-w};
    for (int k = 1; k <= f.degree(); ++k) p.push_back(f.coeff(k));
    return poly_roots(p);
}

// The repelling fixed point with the weakest multiplier; truncation produces
// additional strongly repelling roots near the edge of convergence.
inline cplx repelling_fixed_point(const AnalyticMap& f) {
    std::optional<cplx> best;
    double best_mult = 0.0;
    for (cplx z : fixed_points(f)) {
        double m = std::abs(f.deriv(z));
        if (m <= 1.0 + 1e-9) continue;
        if (!best || m < best_mult) {
            best = z;
            best_mult = m;
        }
    }
    if (!best) throw numerical_error("no repelling fixed point");
    return find_repelling_fixed_point(f, *best);
}

// Critical point of f nearest 1.
inline cplx critical_point(const AnalyticMap& f) {
    auto d = derivative(f);
    std::vector<cplx> dd;
    for (std::size_t k = 1; k < d.size(); ++k) dd.push_back(double(k) * d[k]);
    auto roots = poly_roots(d);
    if (roots.empty()) throw numerical_error("map has no critical point");
    cplx c = *std::min_element(roots.begin(), roots.end(), [](cplx a, cplx b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
    for (int i = 0; i < 20; ++i) {
        cplx step = horner(d, c) / horner(dd, c);
        c -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return c;
}

// z^2 + e^{2 pi i theta} z
inline AnalyticMap quadratic_literal(double rho = default_rho) {
    return AnalyticMap({siegel_multiplier, 1.0}, rho);
}

// The quadratic conjugated so that its critical point sits at 1.
inline AnalyticMap quadratic_normalized(double rho = default_rho) {
    return AnalyticMap({siegel_multiplier, -siegel_multiplier / 2.0}, rho);
}

}  // namespace siegel
