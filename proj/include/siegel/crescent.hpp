#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "analytic_map.hpp"

namespace siegel {

enum class BoundaryKind { parabola, arc };

inline const char* to_string(BoundaryKind k) { return k == BoundaryKind::parabola ? "parabola" : "arc"; }

struct CrescentConfig {
    BoundaryKind boundary = BoundaryKind::parabola;
    double slope = 1.1;       // common tangent slope at f^4(1)
    double arc_scale = 0.1;   // d(Im xi)/d(ln r) of the arc boundary
    std::optional<cplx> a_seed;
    double r_min = 1e-7;      // parameter range of the boundary curve
    double r_max = 1e5;
    int polygon_vertices = 4096;
    int max_return = 10;
    double escape_radius = 0.0;  // 0: max(rho, 2|a|)
};

struct CurvePoint {
    cplx z;
    cplx dz;  // derivative in r
};

struct ReturnResult {
    cplx value;
    int count;
    double max_modulus;  // over f(z), ..., f^count(z)
};

struct ValidationReport {
    bool simple = true;
    int crossings = 0;
    cplx first_crossing = 0.0;
};

class FundamentalCrescent {
public:
    AnalyticMap f;
    CrescentConfig cfg;
    cplx a = 0.0;           // repelling fixed point
    cplx critical = 1.0;    // critical point nearest 1
    cplx anchor_in = 0.0;   // f^3(critical), tau^{-1} = 0
    cplx anchor_mid = 0.0;  // f^4(critical), |tau^{-1}| = 1
    double A = 0, B = 0, C = 0, D = 0, E = 0;
    double r_tilde = 0.0;   // branch switch, T(r_tilde) = |f^4(1)|
    double T_inf = 0.0;     // |a - f^4(1)| + |f^4(1)|
    double alpha = 0.0;
    cplx beta = 0.0;
    cplx branch_dir = 1.0;  // unit bisector of the arguments used for the logarithm
    cplx xi_mid = 0.0;      // tau^{-1}(f^4(1))
    std::vector<cplx> polygon;
    std::vector<cplx> boundary_l, boundary_pre;  // polygon sides with their parameters
    std::vector<double> boundary_r;

    static FundamentalCrescent build(const AnalyticMap& f, const CrescentConfig& cfg = {}) {
        FundamentalCrescent c;
        c.f = f;
        c.cfg = cfg;
        c.a = cfg.a_seed ? find_repelling_fixed_point(f, *cfg.a_seed) : repelling_fixed_point(f);
        c.critical = critical_point(f);
        auto orbit = iterate(f, 4, c.critical);
        c.anchor_in = orbit.points[2];
        c.anchor_mid = orbit.points[3];
        cplx w3 = 1.0 - c.a / c.anchor_in, w4 = 1.0 - c.a / c.anchor_mid;
        cplx bis = w3 / std::abs(w3) + w4 / std::abs(w4);
        if (std::abs(bis) < 1e-12) throw numerical_error("crescent anchors are antipodal for the logarithm branch");
        c.branch_dir = bis / std::abs(bis);
        c.beta = c.log_branch(w3);
        c.alpha = std::abs(c.log_branch(w4) - c.beta);
        if (!(c.alpha > 1e-12) || !std::isfinite(c.alpha)) throw numerical_error("crescent scale alpha is not positive");
        c.xi_mid = c.tau_inverse(c.anchor_mid);

        cplx f4 = c.anchor_mid;
        double x4 = f4.real(), y4 = f4.imag(), xa = c.a.real(), ya = c.a.imag();
        double u = std::abs(f4), v = std::abs(c.a - f4);
        c.T_inf = u + v;
        c.r_tilde = (u / v) * (u / v);
        if (cfg.boundary == BoundaryKind::parabola) {
            if (std::abs(x4) < 1e-12 || std::abs(ya - y4) < 1e-12 || cfg.slope == 0.0)
                throw numerical_error("degenerate parabola data");
            double s = cfg.slope;
            c.A = (s * x4 - y4) / (x4 * x4);
            c.B = s - 2 * c.A * x4;
            double m = (xa - x4) / (ya - y4);
            c.C = (m - 1 / s) / (ya - y4);
            c.D = 1 / s - 2 * c.C * y4;
            c.E = x4 - c.C * y4 * y4 - c.D * y4;
        }
        c.build_polygon();
        return c;
    }

    // ln with the cut opposite to branch_dir
    cplx log_branch(cplx w) const {
        return {std::log(std::abs(w)), std::arg(w / branch_dir) + std::arg(branch_dir)};
    }

    cplx tau(cplx xi) const { return a / (1.0 - std::exp(cplx(0, alpha) * xi + beta)); }

    cplx tau_inverse(cplx z) const {
        if (z == 0.0 || z == a) throw numerical_error("tau inverse at a puncture");
        return (log_branch(1.0 - a / z) - beta) / cplx(0, alpha);
    }

    cplx tau_inverse_deriv(cplx z) const { return a / (z * (z - a)) / cplx(0, alpha); }

    double T(double r) const {
        double sq = std::sqrt(r);
        return T_inf * sq / (sq + 1);
    }

    // lambda_1(r) with d/dr
    CurvePoint lambda(double r) const {
        if (cfg.boundary == BoundaryKind::arc) {
            cplx xi(xi_mid.real(), xi_mid.imag() + cfg.arc_scale * std::log(r));
            cplx e = std::exp(cplx(0, alpha) * xi + beta);
            cplx z = a / (1.0 - e);
            cplx dz = a * cplx(0, alpha) * e / ((1.0 - e) * (1.0 - e)) * cplx(0, cfg.arc_scale / r);
            return {z, dz};
        }
        cplx f4 = anchor_mid;
        double u = std::abs(f4), v = std::abs(a - f4);
        double sq = std::sqrt(r);
        double t = T(r), tp = T_inf / (2 * sq * (sq + 1) * (sq + 1));
        if (r <= r_tilde) {
            double x = f4.real() / u * t, xp = f4.real() / u * tp;
            return {cplx(x, A * x * x + B * x), xp * cplx(1.0, 2 * A * x + B)};
        }
        double y = f4.imag() * (v + u - t) / v + a.imag() * (t - u) / v;
        double yp = (a.imag() - f4.imag()) / v * tp;
        return {cplx(C * y * y + D * y + E, y), yp * cplx(2 * C * y + D, 1.0)};
    }

    // f^{-1}(lambda(r)) on the sample radii, by continuation from the origin
    std::vector<cplx> preimages(const std::vector<double>& r) const {
        std::vector<cplx> out(r.size());
        cplx z = lambda(r.front()).z / f.coeff(1);
        for (std::size_t i = 0; i < r.size(); ++i) {
            z = inverse_newton(f, lambda(r[i]).z, z);
            out[i] = z;
        }
        return out;
    }

    bool contains(cplx z) const { return point_in_polygon(polygon, z); }

    double escape_radius() const { return cfg.escape_radius > 0 ? cfg.escape_radius : std::max(f.rho, 2 * std::abs(a)); }

    ReturnResult return_map(cplx z, std::optional<int> expected = std::nullopt) const {
        if (!contains(z)) throw numerical_error("return map start point outside the crescent");
        cplx y = z;
        double mx = 0.0;
        for (int k = 1; k <= cfg.max_return; ++k) {
            y = f(y);
            mx = std::max(mx, std::abs(y));
            if (!std::isfinite(y.real()) || std::abs(y) > escape_radius()) throw numerical_error("orbit escaped during the return map");
            if (contains(y)) {
                if (expected && *expected != k) throw numerical_error("unexpected return time");
                return {y, k, mx};
            }
        }
        throw numerical_error("no return to the crescent within the iterate limit");
    }

    // Crossings of lambda with f^{-1}(lambda) away from the endpoints.
    ValidationReport validate(int samples = 10000, double endpoint_radius = 1e-6) const {
        std::vector<double> r = geometric(cfg.r_min, cfg.r_max, samples);
        std::vector<cplx> l(samples);
        for (int i = 0; i < samples; ++i) l[i] = lambda(r[i]).z;
        auto p = preimages(r);
        ValidationReport rep;
        auto near_end = [&](cplx q) { return std::abs(q) < endpoint_radius || std::abs(q - a) < endpoint_radius; };
        struct Seg {
            cplx p, q;
            double lo, hi;
        };
        auto segs = [](const std::vector<cplx>& pts) {
            std::vector<Seg> s;
            for (std::size_t i = 0; i + 1 < pts.size(); ++i)
                s.push_back({pts[i], pts[i + 1], std::min(pts[i].real(), pts[i + 1].real()), std::max(pts[i].real(), pts[i + 1].real())});
            return s;
        };
        auto sl = segs(l), sp = segs(p);
        std::sort(sp.begin(), sp.end(), [](const Seg& x, const Seg& y) { return x.lo < y.lo; });
        for (const auto& s : sl) {
            for (const auto& t : sp) {
                if (t.lo > s.hi) break;
                if (t.hi < s.lo) continue;
                cplx x;
                if (segments_cross(s.p, s.q, t.p, t.q, x) && !near_end(x)) {
                    if (rep.crossings == 0) rep.first_crossing = x;
                    ++rep.crossings;
                    rep.simple = false;
                }
            }
        }
        return rep;
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(10);
        os << "boundary=" << to_string(cfg.boundary) << " a=" << a << " alpha=" << alpha << " beta=" << beta;
        return os.str();
    }

    static std::vector<double> geometric(double lo, double hi, int n) {
        std::vector<double> r(n);
        double lq = std::log(hi / lo) / (n - 1);
        for (int i = 0; i < n; ++i) r[i] = lo * std::exp(lq * i);
        return r;
    }

    static bool segments_cross(cplx p1, cplx p2, cplx q1, cplx q2, cplx& at) {
        auto cross = [](cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); };
        cplx d1 = p2 - p1, d2 = q2 - q1;
        double den = cross(d1, d2);
        if (den == 0.0) return false;
        double t = cross(q1 - p1, d2) / den, s = cross(q1 - p1, d1) / den;
        if (t < 0 || t > 1 || s < 0 || s > 1) return false;
        at = p1 + t * d1;
        return true;
    }

    // Winding number test; points on an edge count as inside.
    static bool point_in_polygon(const std::vector<cplx>& poly, cplx z) {
        int wn = 0;
        std::size_t n = poly.size();
        double scale = 0.0;
        for (auto v : poly) scale = std::max(scale, std::abs(v));
        double tol = 1e-12 * std::max(scale, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            cplx p = poly[i], q = poly[(i + 1) % n];
            cplx d = q - p;
            double len2 = std::norm(d);
            if (len2 > 0) {
                double t = std::clamp(((z - p) * std::conj(d)).real() / len2, 0.0, 1.0);
                if (std::abs(z - (p + t * d)) <= tol) return true;
            }
            double is_left = d.real() * (z.imag() - p.imag()) - (z.real() - p.real()) * d.imag();
            if (p.imag() <= z.imag()) {
                if (q.imag() > z.imag() && is_left > 0) ++wn;
            } else {
                if (q.imag() <= z.imag() && is_left < 0) --wn;
            }
        }
        return wn != 0;
    }

private:
    void build_polygon() {
        int side = (cfg.polygon_vertices - 2) / 2;
        boundary_r = geometric(cfg.r_min, cfg.r_max, side);
        boundary_l.resize(side);
        for (int i = 0; i < side; ++i) boundary_l[i] = lambda(boundary_r[i]).z;
        boundary_pre = preimages(boundary_r);
        polygon.clear();
        polygon.push_back(0.0);
        polygon.insert(polygon.end(), boundary_l.begin(), boundary_l.end());
        polygon.push_back(a);
        polygon.insert(polygon.end(), boundary_pre.rbegin(), boundary_pre.rend());
    }
};

// Strip map g_1 built over a fixed radial sample of the boundary.
class StripMap {
public:
    std::shared_ptr<const FundamentalCrescent> c;
    std::vector<double> r;
    std::vector<cplx> R, Rp, Lf, Lfp, pre;

    StripMap() = default;
    StripMap(std::shared_ptr<const FundamentalCrescent> cres, std::vector<double> radii) : c(std::move(cres)), r(std::move(radii)) {
        pre = c->preimages(r);
        std::size_t n = r.size();
        R.resize(n), Rp.resize(n), Lf.resize(n), Lfp.resize(n);
        for (std::size_t i = 0; i < n; ++i) side_values(r[i], pre[i], R[i], Rp[i], Lf[i], Lfp[i]);
    }

    static double weight(double phi) { return phi <= 0 ? 1.0 + phi / two_pi : phi / two_pi; }

    // g_1 and its partial derivatives at (r, phi)
    struct Value {
        cplx g, g_r, g_phi;
    };

    Value eval(double rq, double phi) const {
        cplx Rv, Rpv, Lv, Lpv;
        side_values(rq, seed_for(rq), Rv, Rpv, Lv, Lpv);
        double u = weight(phi);
        return {u * Lv + (1 - u) * Rv, u * Lpv + (1 - u) * Rpv, (Lv - Rv) / two_pi};
    }

    cplx g1(double rq, double phi) const { return eval(rq, phi).g; }

    struct Polar {
        double r, phi;
    };

    Polar g1_inverse(cplx xi) const {
        auto F = [&](std::size_t i) { return ((xi - R[i]) / (Lf[i] - R[i])).imag(); };
        std::size_t idx = r.size();
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            double a = F(i), b = F(i + 1);
            if ((a < 0) != (b < 0)) {
                idx = i;
                break;
            }
        }
        if (idx == r.size()) throw numerical_error("strip map inverse: point outside the parametrized range");
        double lo = std::log(r[idx]), hi = std::log(r[idx + 1]);
        auto q_at = [&](double t) {
            cplx Rv, Rpv, Lv, Lpv;
            double rq = std::exp(t);
            side_values(rq, seed_for(rq), Rv, Rpv, Lv, Lpv);
            return (xi - Rv) / (Lv - Rv);
        };
        double flo = q_at(lo).imag();
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = q_at(mid).imag();
            if ((fm < 0) == (flo < 0))
                lo = mid, flo = fm;
            else
                hi = mid;
        }
        double t = 0.5 * (lo + hi);
        double w = q_at(t).real();
        double phi = w > 0.5 ? two_pi * (w - 1.0) : two_pi * w;
        return {std::exp(t), phi};
    }

private:
    cplx seed_for(double rq) const {
        if (rq <= r.front()) return pre.front();
        if (rq >= r.back()) return pre.back();
        std::size_t i = std::upper_bound(r.begin(), r.end(), rq) - r.begin() - 1;
        double t = std::log(rq / r[i]) / std::log(r[i + 1] / r[i]);
        return (1 - t) * pre[i] + t * pre[i + 1];
    }

    void side_values(double rq, cplx seed, cplx& Rv, cplx& Rpv, cplx& Lv, cplx& Lpv) const {
        auto l = c->lambda(rq);
        cplx p = inverse_newton(c->f, l.z, seed);
        Rv = c->tau_inverse(l.z);
        Rpv = c->tau_inverse_deriv(l.z) * l.dz;
        Lv = c->tau_inverse(p);
        Lpv = c->tau_inverse_deriv(p) * l.dz / c->f.deriv(p);
    }
};

inline std::string contour_csv(const FundamentalCrescent& c) {
    std::ostringstream os;
    os.precision(17);
    const auto& r = c.boundary_r;
    for (std::size_t i = 0; i < r.size(); ++i) os << "l, " << r[i] << ", " << c.boundary_l[i].real() << ", " << c.boundary_l[i].imag() << "\n";
    for (std::size_t i = 0; i < r.size(); ++i) os << "preimage, " << r[i] << ", " << c.boundary_pre[i].real() << ", " << c.boundary_pre[i].imag() << "\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        cplx x = c.tau_inverse(c.boundary_l[i]);
        os << "tau_inv_l, " << r[i] << ", " << x.real() << ", " << x.imag() << "\n";
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        cplx x = c.tau_inverse(c.boundary_pre[i]);
        os << "tau_inv_preimage, " << r[i] << ", " << x.real() << ", " << x.imag() << "\n";
    }
    return os.str();
}

}  // namespace siegel
