#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "crescent.hpp"
#include "polar_field.hpp"
#include "transforms.hpp"

namespace siegel {

struct SolverConfig {
    int N = 256;          // angular samples
    int M = 400;          // radial samples
    double r_min = 1e-7;
    double r_max = 1e5;
    double p = 4.0;
    double K_cap = 0.99;
    double tol = 1e-12;
    int max_iter = 300;
};

struct BeltramiProblem {
    PolarGrid grid;
    Table mu;  // samples on the grid; zero beyond grid.R
    double K = 0.0;
    double p = 4.0;
    double tol = 1e-12;
    int max_iter = 300;
};

inline BeltramiProblem make_problem(const PolarGrid& grid, Table mu, const SolverConfig& cfg = {}) {
    validate(grid);
    if (mu.rows() != grid.M() || mu.cols() != grid.N) throw std::invalid_argument("mu table shape mismatch");
    if (!(cfg.p > 2.0)) throw std::invalid_argument("integrability exponent must exceed 2");
    BeltramiProblem b;
    b.grid = grid;
    b.mu = std::move(mu);
    b.K = b.mu.cwiseAbs().maxCoeff();
    b.p = cfg.p;
    b.tol = cfg.tol;
    b.max_iter = cfg.max_iter;
    if (!std::isfinite(b.K)) throw numerical_error("non-finite Beltrami coefficient");
    if (b.K >= cfg.K_cap) throw numerical_error("Beltrami coefficient too large: K = " + std::to_string(b.K));
    return b;
}

inline PolarGrid solver_grid(const SolverConfig& cfg) { return geometric_grid(cfg.r_min, cfg.r_max, cfg.M, cfg.N); }

// mu = e^{2i phi} (r g_r + i g_phi) / (r g_r - i g_phi) of the strip map on the grid.
inline BeltramiProblem build_mu(const StripMap& s, const PolarGrid& grid, const SolverConfig& cfg = {}) {
    if (s.r != grid.r) throw std::invalid_argument("strip map radii differ from the solver grid");
    Table mu(grid.M(), grid.N);
    const cplx I(0, 1);
    for (int i = 0; i < grid.M(); ++i) {
        double r = grid.r[i];
        cplx gphi = (s.Lf[i] - s.R[i]) / two_pi;
        for (int j = 0; j < grid.N; ++j) {
            double phi = grid.phi(j);
            if (phi > pi) phi -= two_pi;
            double u = StripMap::weight(phi);
            cplx gr = u * s.Lfp[i] + (1 - u) * s.Rp[i];
            cplx num = r * gr + I * gphi, den = r * gr - I * gphi;
            double scale = std::abs(r * gr) + std::abs(gphi);
            if (std::abs(den) <= 1e-14 * scale || scale == 0.0) throw numerical_error("degenerate gluing: vanishing Beltrami denominator");
            mu(i, j) = std::polar(1.0, 2 * phi) * num / den;
        }
    }
    return make_problem(grid, std::move(mu), cfg);
}

inline double grid_lp(const Table& v, double p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v.data()[i]), p);
    return std::pow(s / double(v.size()), 1.0 / p);
}

struct BeltramiSolution {
    BeltramiProblem problem;
    Table H;                            // fixed point of h -> T[mu (h + 1)]
    std::vector<double> history;        // grid L_p norm of successive increments
    std::vector<double> history_max;    // max norm of the same increments
    bool converged = false;
    bool max_iter_hit = false;
    std::shared_ptr<CauchyTransform> P;  // Cauchy transform of mu (H + 1)
    cplx g0 = 0.0, g1 = 1.0;             // raw values at 0 and 1

    // normalized solution G with G(0) = 0, G(1) = 1
    cplx eval(cplx z) const {
        if (z == 0.0) return 0.0;
        return (z + (*P)(z) - g0) / (g1 - g0);
    }

    // d/dphi of G along |z| = const
    cplx eval_dphi(cplx z) const {
        auto p = P->modes_at(std::abs(z));
        double ph = std::arg(z);
        cplx s = cplx(0, 1) * z;
        const auto& g = problem.grid;
        for (int col = 0; col < g.N; ++col) s += cplx(0, g.mode(col)) * p[col] * std::polar(1.0, g.mode(col) * ph);
        return s / (g1 - g0);
    }

    // Samples of G on the solver grid.
    Table grid_values() const {
        auto ps = to_samples(P->field());
        const auto& g = problem.grid;
        Table out(g.M(), g.N);
        for (int i = 0; i < g.M(); ++i)
            for (int j = 0; j < g.N; ++j) out(i, j) = (std::polar(g.r[i], g.phi(j)) + ps.v(i, j) - g0) / (g1 - g0);
        return out;
    }

    cplx eval_inverse(cplx w) const;
};

inline BeltramiSolution solve(const BeltramiProblem& prob) {
    BeltramiSolution sol;
    sol.problem = prob;
    const PolarGrid& g = prob.grid;
    Table H = Table::Zero(g.M(), g.N);
    double best = std::numeric_limits<double>::infinity();
    auto density = [&](const Table& h) {
        PolarSamples s{g, prob.mu.cwiseProduct((h.array() + 1.0).matrix())};
        return from_samples(s);
    };
    for (int it = 0; it < prob.max_iter; ++it) {
        Table Hn = to_samples(hilbert_transform(density(H))).v;
        Table d = Hn - H;
        double inc = grid_lp(d, prob.p), incmax = d.cwiseAbs().maxCoeff();
        H = std::move(Hn);
        sol.history.push_back(inc);
        sol.history_max.push_back(incmax);
        // increments may rise for a while before decaying; only a blow-up counts as failure
        if (!std::isfinite(incmax) || incmax > 1e6 * std::max(best, 1.0))
            throw numerical_error("Beltrami iteration is not contracting");
        best = std::min(best, incmax);
        // rounding in the transforms scales with the iterate, so the tolerance does too
        if (incmax < prob.tol * (1.0 + H.cwiseAbs().maxCoeff())) {
            sol.converged = true;
            break;
        }
    }
    sol.max_iter_hit = !sol.converged;
    sol.H = H;
    sol.P = std::make_shared<CauchyTransform>(density(H));
    sol.g0 = sol.P->at_origin();
    sol.g1 = 1.0 + (*sol.P)(1.0);
    return sol;
}

inline cplx BeltramiSolution::eval_inverse(cplx w) const {
    const auto& g = problem.grid;
    cplx best = 0.0;
    double bestd = std::abs(w), wmax = 0.0;
    int rstep = std::max(1, g.M() / 100), astep = std::max(1, g.N / 32);
    for (int i = 0; i < g.M(); i += rstep)
        for (int j = 0; j < g.N; j += astep) {
            cplx z = std::polar(g.r[i], g.phi(j));
            cplx v = eval(z);
            wmax = std::max(wmax, std::abs(v));
            if (std::abs(v - w) < bestd) bestd = std::abs(v - w), best = z;
        }
    if (std::abs(w) > 2.0 * wmax) throw numerical_error("inverse requested outside the solution range");
    if (best == 0.0) best = std::polar(g.r.front(), 0.0);
    cplx z = best;
    double lo = g.r.front() * 1.01, hi = g.r.back() / 1.01;
    for (int it = 0; it < 60; ++it) {
        cplx F = eval(z) - w;
        if (std::abs(F) <= 1e-14 * (1 + std::abs(w))) return z;
        double h = 1e-7 * std::abs(z);
        cplx dx = (eval(z + h) - eval(z - h)) / (2 * h);
        cplx dy = (eval(z + cplx(0, h)) - eval(z - cplx(0, h))) / (2 * h);
        // real Jacobian [[Re dx, Re dy], [Im dx, Im dy]]
        double a = dx.real(), b = dy.real(), c = dx.imag(), d = dy.imag();
        double det = a * d - b * c;
        if (det == 0.0) break;
        double sx = (d * F.real() - b * F.imag()) / det, sy = (-c * F.real() + a * F.imag()) / det;
        cplx step(sx, sy);
        double lim = 0.5 * std::abs(z);
        if (std::abs(step) > lim) step *= lim / std::abs(step);
        z -= step;
        if (std::abs(z) < lo) z *= lo / std::abs(z);
        if (std::abs(z) > hi) z *= hi / std::abs(z);
    }
    if (std::abs(eval(z) - w) <= 1e-10 * (1 + std::abs(w))) return z;
    throw numerical_error("inverse of the Beltrami solution did not converge");
}

struct ResidualReport {
    double median = 0.0;
    double max = 0.0;
    double outside_max_dbar = 0.0;  // max |g_zbar| beyond the support
    int nodes = 0;
};

namespace detail {
// three-point derivative on a non-uniform grid
inline cplx d3(double xm, double x0, double xp, cplx fm, cplx f0, cplx fp) {
    double h1 = x0 - xm, h2 = xp - x0;
    return (-h2 / (h1 * (h1 + h2))) * fm + ((h2 - h1) / (h1 * h2)) * f0 + (h1 / (h2 * (h1 + h2))) * fp;
}
}  // namespace detail

// Finite-difference residual |g_zbar - mu g_z| at nodes 3 cells away from the
// grid ends and from |z| = support_radius.
inline ResidualReport residual(const BeltramiSolution& sol, double support_radius) {
    const auto& g = sol.problem.grid;
    Table G = sol.grid_values();
    double dphi = two_pi / g.N;
    std::vector<double> res;
    ResidualReport rep;
    for (int i = 3; i + 3 < g.M(); ++i) {
        bool near = false;
        for (int d = -3; d <= 3; ++d)
            if (i + d >= 1 && i + d < g.M() && ((g.r[i + d - 1] - support_radius) * (g.r[i + d] - support_radius) <= 0)) near = true;
        if (near) continue;
        for (int j = 0; j < g.N; ++j) {
            int jp = (j + 1) % g.N, jm = (j + g.N - 1) % g.N;
            cplx gr = detail::d3(g.r[i - 1], g.r[i], g.r[i + 1], G(i - 1, j), G(i, j), G(i + 1, j));
            cplx gp = (G(i, jp) - G(i, jm)) / (2 * dphi);
            cplx e = std::polar(1.0, g.phi(j));
            cplx gz = std::conj(e) / 2.0 * (gr - cplx(0, 1) / g.r[i] * gp);
            cplx gzb = e / 2.0 * (gr + cplx(0, 1) / g.r[i] * gp);
            double scale = std::abs(gz);
            double rr = std::abs(gzb - sol.problem.mu(i, j) * gz) / (scale > 0 ? scale : 1.0);
            res.push_back(rr);
            rep.max = std::max(rep.max, rr);
            if (g.r[i] > support_radius) rep.outside_max_dbar = std::max(rep.outside_max_dbar, std::abs(gzb) / (scale > 0 ? scale : 1.0));
        }
    }
    rep.nodes = static_cast<int>(res.size());
    if (!res.empty()) {
        std::nth_element(res.begin(), res.begin() + res.size() / 2, res.end());
        rep.median = res[res.size() / 2];
    }
    return rep;
}

}  // namespace siegel
