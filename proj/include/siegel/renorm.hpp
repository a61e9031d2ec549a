#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "analytic_map.hpp"
#include "beltrami.hpp"
#include "crescent.hpp"

namespace siegel {

struct RenormConfig {
    double contour_radius = 0.0;  // 0: chosen adaptively
    int n_contour = 1024;
    int out_degree = default_degree;
    double rho_in = default_rho;
    double rho_out = default_rho_prime;
    CrescentConfig crescent;
    bool auto_boundary = true;    // fall back to the arc boundary when the parabola is unusable
    double K_switch = 0.95;
    SolverConfig solver;
    double contour_target = 2.35;  // min |G| on the contour over |critical point|
    int contour_attempts = 8;
    double c0_tol = 1e-2;          // relative size of the discarded constant term
    bool project = true;
    bool self_distance = false;
};

inline void validate(const RenormConfig& cfg) {
    if (!(cfg.rho_in < cfg.rho_out)) throw std::invalid_argument("rho_in must be below rho_out");
    if (cfg.n_contour < 16) throw std::invalid_argument("contour needs at least 16 samples");
    if (cfg.out_degree < 2) throw std::invalid_argument("output degree must be at least 2");
    if (cfg.contour_radius < 0) throw std::invalid_argument("negative contour radius");
}

struct ContourData {
    double radius = 0.0;
    std::vector<cplx> z;     // model-plane samples
    std::vector<cplx> w;     // G(z)
    std::vector<cplx> dw;    // dG/dphi
    std::vector<cplx> vals;  // G(model(R_f(crescent point)))
    std::vector<int> counts;
    double max_modulus = 0.0;
    cplx worst_point = 0.0;
};

// Crescent, strip map and Beltrami solution for one map.
class RenormContext {
public:
    AnalyticMap f;
    std::shared_ptr<const FundamentalCrescent> crescent;
    std::shared_ptr<const StripMap> strip;
    BeltramiSolution sol;

    static RenormContext build(const AnalyticMap& f, const RenormConfig& cfg) {
        std::string why;
        std::vector<BoundaryKind> kinds{cfg.crescent.boundary};
        if (cfg.auto_boundary && cfg.crescent.boundary == BoundaryKind::parabola) kinds.push_back(BoundaryKind::arc);
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            bool last = i + 1 == kinds.size();
            try {
                CrescentConfig cc = cfg.crescent;
                cc.boundary = kinds[i];
                RenormContext ctx;
                ctx.f = f;
                ctx.crescent = std::make_shared<const FundamentalCrescent>(FundamentalCrescent::build(f, cc));
                if (!last && !ctx.crescent->validate(2000).simple) throw numerical_error("crescent boundary self-intersects");
                PolarGrid g = solver_grid(cfg.solver);
                ctx.strip = std::make_shared<const StripMap>(ctx.crescent, g.r);
                auto prob = build_mu(*ctx.strip, g, cfg.solver);
                if (!last && prob.K >= cfg.K_switch) throw numerical_error("Beltrami coefficient near 1");
                ctx.sol = solve(prob);
                if (!last && !ctx.sol.converged) throw numerical_error("Beltrami iteration did not converge");
                return ctx;
            } catch (const numerical_error& e) {
                if (last) throw;
                why = e.what();
            }
        }
        throw numerical_error("no usable crescent: " + why);
    }

    BoundaryKind boundary() const { return crescent->cfg.boundary; }

    // crescent point -> model plane
    cplx model(cplx z) const {
        auto p = strip->g1_inverse(crescent->tau_inverse(z));
        return std::polar(p.r, p.phi);
    }

    // model plane -> crescent
    cplx crescent_point(cplx z) const { return crescent->tau(strip->g1(std::abs(z), std::arg(z))); }

    cplx uniformize(cplx z) const { return sol.eval(model(z)); }

    // A critical point of the first return map lying in the crescent.
    cplx critical_point() const {
        const auto& C = *crescent;
        const cplx c = C.critical;
        if (C.contains(c)) return c;
        std::optional<cplx> best;
        auto consider = [&](cplx z) {
            if (C.contains(z) && (!best || std::abs(z) < std::abs(*best))) best = z;
        };
        for (cplx r1 : preimages_of(f, c)) {
            try {
                r1 = inverse_newton(f, c, r1);
            } catch (const numerical_error&) {
                continue;
            }
            consider(r1);
            for (cplx r2 : preimages_of(f, r1)) {
                try {
                    consider(inverse_newton(f, r1, r2));
                } catch (const numerical_error&) {
                }
            }
        }
        if (!best) throw numerical_error("no critical point of the return map in the crescent");
        return *best;
    }

    std::vector<cplx> circle(double rc, int n) const {
        std::vector<cplx> z(n);
        for (int j = 0; j < n; ++j) z[j] = std::polar(rc, -pi + two_pi * (j + 0.5) / n);
        return z;
    }

    double min_modulus(double rc, int n = 64) const {
        double m = std::numeric_limits<double>::infinity();
        for (cplx z : circle(rc, n)) m = std::min(m, std::abs(sol.eval(z)));
        return m;
    }

    // Radius whose G-image has min modulus target (bisection in log r).
    double radius_for(double target, double r_lo, double r_hi) const {
        double lo = std::log(r_lo), hi = std::log(r_hi);
        if (min_modulus(std::exp(hi)) < target) throw numerical_error("contour search range too small");
        for (int it = 0; it < 40; ++it) {
            double mid = 0.5 * (lo + hi);
            if (min_modulus(std::exp(mid)) < target)
                lo = mid;
            else
                hi = mid;
        }
        return std::exp(hi);
    }

    ContourData run_contour(double rc, int n) const {
        ContourData d;
        d.radius = rc;
        d.z = circle(rc, n);
        for (cplx z : d.z) {
            d.w.push_back(sol.eval(z));
            d.dw.push_back(sol.eval_dphi(z));
            auto ret = crescent->return_map(crescent_point(z));
            d.counts.push_back(ret.count);
            if (ret.max_modulus > d.max_modulus) d.max_modulus = ret.max_modulus, d.worst_point = z;
            d.vals.push_back(uniformize(ret.value));
        }
        return d;
    }
};

inline int winding_number(const std::vector<cplx>& w) {
    double total = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) total += std::arg(w[(j + 1) % w.size()] / w[j]);
    return static_cast<int>(std::lround(total / two_pi));
}

// c_m = (1/2 pi i) \oint h(w) w^{-m-1} dw, m = 0..D, trapezoid in the parameter.
inline std::vector<cplx> cauchy_coefficients(const std::vector<cplx>& w, const std::vector<cplx>& dw, const std::vector<cplx>& vals, int D) {
    std::size_t n = w.size();
    if (dw.size() != n || vals.size() != n || n == 0) throw std::invalid_argument("contour arrays differ in length");
    std::vector<cplx> c(D + 1, 0.0);
    const double h = two_pi / n;
    for (std::size_t j = 0; j < n; ++j) {
        cplx inv = 1.0 / w[j];
        cplx term = vals[j] * inv * dw[j] * h;
        for (int m = 0; m <= D; ++m) {
            c[m] += term;
            term *= inv;
        }
    }
    for (auto& x : c) x /= cplx(0, two_pi);
    return c;
}

struct RenormResult {
    AnalyticMap map_out;
    double self_distance = std::numeric_limits<double>::quiet_NaN();
    BoundaryKind boundary = BoundaryKind::parabola;
    cplx fixed_point = 0.0;
    double K = 0.0;
    int beltrami_iterations = 0;
    double contour_radius = 0.0;
    double contour_target = 0.0;
    double contour_margin = 0.0;  // min |G| on the contour over |critical point|
    cplx critical_point = 0.0;    // in the uniformized plane, before rescaling
    cplx critical_value = 0.0;
    double c0 = 0.0;
    std::map<int, int> return_counts;
    ContourData contour;
};

namespace detail {

inline RenormResult finish(const RenormContext& ctx, const ContourData& d, const RenormConfig& cfg, cplx cv) {
    if (winding_number(d.w) != 1) throw numerical_error("contour image does not wind once around 0");
    const int D = cfg.out_degree;
    auto coef = cauchy_coefficients(d.w, d.dw, d.vals, D);
    double vmax = 0.0, wmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d.vals.size(); ++j) vmax = std::max(vmax, std::abs(d.vals[j])), wmin = std::min(wmin, std::abs(d.w[j]));

    std::vector<cplx> hp;
    for (int m = 1; m <= D; ++m) hp.push_back(double(m) * coef[m]);
    auto crit = poly_roots(hp);
    if (crit.empty()) throw numerical_error("extracted map has no critical point");
    auto hval = [&](cplx z) {
        cplx s = 0.0;
        for (int m = D; m >= 1; --m) s = s * z + coef[m];
        return s * z;
    };
    cplx cc = crit.front();
    for (cplx z : crit)
        if (std::abs(hval(z) - cv) < std::abs(hval(cc) - cv)) cc = z;
    if (!(wmin > std::abs(cc))) throw numerical_error("contour does not enclose the critical point");
    // rounding amplification of the top coefficient after rescaling by cc
    double amp = vmax * std::pow(std::abs(cc) / wmin, D) * 1e-15 * d.w.size();
    if (amp > 1e-3) throw numerical_error("coefficient extraction is ill-conditioned");

    RenormResult res;
    res.c0 = std::abs(coef[0]) / std::max(vmax, 1e-300);
    if (res.c0 > cfg.c0_tol) throw numerical_error("constant Cauchy coefficient is not negligible: " + std::to_string(res.c0));
    std::vector<cplx> out(D);
    cplx scale = 1.0;
    for (int m = 1; m <= D; ++m) {
        out[m - 1] = coef[m] * scale;
        scale *= cc;
    }
    res.map_out = AnalyticMap(out, cfg.rho_in);
    if (cfg.project) res.map_out = project_stable(res.map_out);
    res.boundary = ctx.boundary();
    res.fixed_point = ctx.crescent->a;
    res.K = ctx.sol.problem.K;
    res.beltrami_iterations = static_cast<int>(ctx.sol.history.size());
    res.contour_radius = d.radius;
    res.contour_margin = wmin / std::abs(cc);
    res.critical_point = cc;
    res.critical_value = cv;
    for (int k : d.counts) ++res.return_counts[k];
    res.contour = d;
    return res;
}

inline bool usual_counts(const ContourData& d) {
    return std::all_of(d.counts.begin(), d.counts.end(), [](int k) { return k == 2 || k == 3; });
}

}  // namespace detail

// One application of the cylinder renormalization operator.
inline RenormResult renormalize_once(const AnalyticMap& f, const RenormConfig& cfg = {}) {
    validate(cfg);
    auto ctx = RenormContext::build(f, cfg);
    cplx cR = ctx.critical_point();
    cplx zc = ctx.model(cR);
    double ccm = std::abs(ctx.sol.eval(zc));
    cplx cv = ctx.uniformize(ctx.crescent->return_map(cR).value);

    RenormResult res;
    if (cfg.contour_radius > 0) {
        res = detail::finish(ctx, ctx.run_contour(cfg.contour_radius, cfg.n_contour), cfg, cv);
        res.contour_target = res.contour_margin;
    } else {
        double t = cfg.contour_target;
        std::string why = "no attempt";
        bool done = false;
        for (int attempt = 0; attempt < cfg.contour_attempts && !done; ++attempt, t *= 0.9) {
            try {
                double rc = ctx.radius_for(t * ccm, std::abs(zc), 50 * std::abs(zc));
                auto d = ctx.run_contour(rc, cfg.n_contour);
                if (!detail::usual_counts(d)) {
                    why = "unexpected return times on the contour";
                    continue;
                }
                res = detail::finish(ctx, d, cfg, cv);
                res.contour_target = t;
                done = true;
            } catch (const numerical_error& e) {
                why = e.what();
            }
        }
        if (!done) throw numerical_error("no admissible contour: " + why);
    }
    if (cfg.self_distance) res.self_distance = norm_weighted(res.map_out - f, cfg.rho_in);
    return res;
}

struct FixedPointStep {
    AnalyticMap map;
    double step_norm;  // |f_{i+1} - f_i|_rho
    RenormResult detail;
};

// f -> P_s R f applied k times.
using StepLogger = std::function<void(int, const FixedPointStep&)>;

inline std::vector<FixedPointStep> iterate_fixed_point(const AnalyticMap& f0, int k, RenormConfig cfg = {}, const StepLogger& log = {}) {
    if (k < 0) throw std::invalid_argument("negative step count");
    cfg.project = true;
    std::vector<FixedPointStep> out;
    AnalyticMap cur = f0;
    int growth = 0;
    for (int i = 0; i < k; ++i) {
        auto r = renormalize_once(cur, cfg);
        double step = norm_weighted(r.map_out - cur, cfg.rho_in);
        if (!out.empty() && step > out.back().step_norm)
            ++growth;
        else
            growth = 0;
        out.push_back({r.map_out, step, r});
        if (log) log(i, out.back());
        if (growth >= 3) throw numerical_error("fixed point iteration diverges");
        cur = r.map_out;
    }
    return out;
}

struct DomainReport {
    bool encircles_3 = false;
    bool containment_2266 = false;
    double max_modulus = 0.0;
    double image_min_modulus = 0.0;   // min |Phi| on the loop after rescaling
    int winding = 0;
    std::vector<int> iterate_counts;  // distinct return times along the loop
    double contour_radius = 0.0;
    int samples = 0;
    std::optional<cplx> offending_point;
};

// Domain experiment: a loop whose rescaled image encircles the disk of radius
// rho_out, and the return orbits of the enclosed piece of the crescent.
inline DomainReport check_domain(const AnalyticMap& f, const RenormConfig& cfg = {}, int samples = 1000) {
    validate(cfg);
    auto ctx = RenormContext::build(f, cfg);
    cplx cR = ctx.critical_point();
    cplx zc = ctx.model(cR);
    cplx cc = ctx.sol.eval(zc);
    double target = 1.02 * cfg.rho_out * std::abs(cc);

    DomainReport rep;
    rep.samples = samples;
    rep.contour_radius = ctx.radius_for(target, std::abs(zc), 50 * std::abs(zc));
    auto loop = ctx.circle(rep.contour_radius, samples);
    std::vector<cplx> img;
    double mn = std::numeric_limits<double>::infinity();
    for (cplx z : loop) {
        img.push_back(ctx.sol.eval(z) / cc);
        mn = std::min(mn, std::abs(img.back()));
    }
    rep.image_min_modulus = mn;
    rep.winding = winding_number(img);
    rep.encircles_3 = rep.winding == 1 && mn >= cfg.rho_out;

    // the loop itself plus interior rays of the enclosed component
    std::map<int, int> counts;
    rep.containment_2266 = true;
    auto visit = [&](cplx z, bool on_loop) {
        auto ret = ctx.crescent->return_map(ctx.crescent_point(z));
        if (on_loop) ++counts[ret.count];
        rep.max_modulus = std::max(rep.max_modulus, ret.max_modulus);
        if (ret.max_modulus >= cfg.rho_in && !rep.offending_point) {
            rep.containment_2266 = false;
            rep.offending_point = ctx.crescent_point(z);
        }
    };
    for (cplx z : loop) visit(z, true);
    for (int i = 1; i < 8; ++i)
        for (int j = 0; j < 32; ++j) visit(std::polar(rep.contour_radius * i / 8.0, -pi + two_pi * (j + 0.5) / 32), false);
    for (auto [k, n] : counts) rep.iterate_counts.push_back(k);
    return rep;
}

}  // namespace siegel
