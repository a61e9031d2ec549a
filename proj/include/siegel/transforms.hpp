#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "polar_field.hpp"

namespace siegel {

namespace detail {

// (e^x - 1)/x
inline double expm1_ratio(double x) { return std::abs(x) > 1e-8 ? std::expm1(x) / x : 1.0 + x / 2.0; }

// int_{e^{-lq}}^1 t^p dt
inline double moment_down(double p, double lq) { return lq * expm1_ratio(-(p + 1.0) * lq); }
// int_1^{e^{lq}} t^p dt
inline double moment_up(double p, double lq) { return lq * expm1_ratio((p + 1.0) * lq); }

// Integral over [a,b] of the linear interpolant of (sa, sb) against a weight
// whose moments m0 = int w, m1 = int w*rho are given.
inline cplx linear_piece(cplx sa, cplx sb, double a, double b, double m0, double m1) {
    return (sa * (b * m0 - m1) + sb * (m1 - a * m0)) / (b - a);
}

}  // namespace detail

// Cumulative radial integrals for one family of modes:
//   inner_i = int_0^{r_i} (r_i/rho)^e s(rho) drho   (e <= 0)
//   outer_i = int_{r_i}^{R} (r_i/rho)^e s(rho) drho (e >= 0)
// The source s is piecewise linear in rho and behaves like rho^j below r_1.
struct RadialTables {
    PolarGrid grid;
    Table src;    // src(i, col) source mode feeding output mode col
    Table inner;  // used for output modes with k < 0
    Table outer;  // used for output modes with k >= 0
    int shift = 1;      // source index is k + shift
    int exp_offset = 0; // exponent e = k + exp_offset

    double exponent(int col) const { return double(grid.mode(col) + exp_offset); }
    bool uses_inner(int col) const { return grid.mode(col) < 0; }
    double origin_order(int col) const { return std::abs(grid.mode(col) + shift); }

    // Mode values of the two integrals at an arbitrary radius r_1 <= rq <= r_M.
    void at_radius(double rq, std::vector<cplx>& in_out, std::vector<cplx>& out_out) const;
};

inline RadialTables build_radial_tables(const PolarField& h, int shift, int exp_offset) {
    const PolarGrid& g = h.grid;
    const int M = g.M(), N = g.N;
    RadialTables t;
    t.grid = g;
    t.shift = shift;
    t.exp_offset = exp_offset;
    t.src = Table::Zero(M, N);
    for (int col = 0; col < N; ++col) {
        int ks = g.mode(col) + shift;
        if (!g.has_mode(ks)) continue;
        t.src.col(col) = h.h.col(g.col(ks));
    }
    t.inner = Table::Zero(M, N);
    t.outer = Table::Zero(M, N);
    const auto& r = g.r;
    const double Rs = g.R * (1 + 1e-12);
    for (int col = 0; col < N; ++col) {
        double e = t.exponent(col);
        if (t.uses_inner(col)) {
            t.inner(0, col) = t.src(0, col) * r[0] / (t.origin_order(col) - e + 1.0);
            for (int i = 0; i + 1 < M; ++i) {
                double a = r[i], b = r[i + 1], lq = std::log(b / a);
                cplx loc = 0.0;
                if (b <= Rs) {
                    double m0 = b * detail::moment_down(-e, lq);
                    double m1 = b * b * detail::moment_down(1.0 - e, lq);
                    loc = detail::linear_piece(t.src(i, col), t.src(i + 1, col), a, b, m0, m1);
                }
                t.inner(i + 1, col) = std::exp(e * lq) * t.inner(i, col) + loc;
            }
        } else {
            for (int i = M - 2; i >= 0; --i) {
                double a = r[i], b = r[i + 1], lq = std::log(b / a);
                cplx loc = 0.0;
                if (b <= Rs) {
                    double m0 = a * detail::moment_up(-e, lq);
                    double m1 = a * a * detail::moment_up(1.0 - e, lq);
                    loc = detail::linear_piece(t.src(i, col), t.src(i + 1, col), a, b, m0, m1);
                }
                t.outer(i, col) = std::exp(-e * lq) * t.outer(i + 1, col) + loc;
            }
        }
    }
    return t;
}

inline void RadialTables::at_radius(double rq, std::vector<cplx>& in_out, std::vector<cplx>& out_out) const {
    const auto& r = grid.r;
    const int N = grid.N;
    if (rq < r.front() * (1 - 1e-12) || rq > r.back() * (1 + 1e-12)) throw numerical_error("radius outside the transform grid");
    rq = std::clamp(rq, r.front(), r.back());
    int i = int(std::upper_bound(r.begin(), r.end(), rq) - r.begin()) - 1;
    i = std::clamp(i, 0, grid.M() - 2);
    double a = r[i], b = r[i + 1];
    bool live = b <= grid.R * (1 + 1e-12);
    in_out.assign(N, 0.0);
    out_out.assign(N, 0.0);
    double lq1 = std::log(rq / a), lq2 = std::log(b / rq);
    for (int col = 0; col < N; ++col) {
        double e = exponent(col);
        cplx beta = live ? (src(i + 1, col) - src(i, col)) / (b - a) : cplx(0.0);
        cplx alpha = live ? src(i, col) - beta * a : cplx(0.0);
        if (uses_inner(col)) {
            double m0 = rq * detail::moment_down(-e, lq1), m1 = rq * rq * detail::moment_down(1.0 - e, lq1);
            in_out[col] = std::exp(e * lq1) * inner(i, col) + alpha * m0 + beta * m1;
        } else {
            double m0 = rq * detail::moment_up(-e, lq2), m1 = rq * rq * detail::moment_up(1.0 - e, lq2);
            out_out[col] = std::exp(-e * lq2) * outer(i + 1, col) + alpha * m0 + beta * m1;
        }
    }
}

inline void require_compact(const PolarField& h) {
    if (!h.compact) throw std::invalid_argument("transform needs a compactly supported field");
}

// Cauchy transform P[h]: p_k = 2 int_0^r (r/rho)^k h_{k+1}, k < 0; -2 int_r^R (r/rho)^k h_{k+1}, k >= 0.
struct CauchyTransform {
    RadialTables t;

    explicit CauchyTransform(const PolarField& h) {
        require_compact(h);
        t = build_radial_tables(h, 1, 0);
    }

    PolarField field() const {
        PolarField p;
        p.grid = t.grid;
        p.compact = false;
        p.h.resize(t.grid.M(), t.grid.N);
        for (int col = 0; col < t.grid.N; ++col) {
            if (t.uses_inner(col))
                p.h.col(col) = 2.0 * t.inner.col(col);
            else
                p.h.col(col) = -2.0 * t.outer.col(col);
        }
        return p;
    }

    std::vector<cplx> modes_at(double rq) const {
        std::vector<cplx> in, out;
        t.at_radius(rq, in, out);
        for (int col = 0; col < t.grid.N; ++col) in[col] = t.uses_inner(col) ? 2.0 * in[col] : -2.0 * out[col];
        return in;
    }

    // P[h](z) for r_1 <= |z| <= r_M
    cplx operator()(cplx z) const {
        auto p = modes_at(std::abs(z));
        double ph = std::arg(z);
        cplx s = 0.0;
        for (int col = 0; col < t.grid.N; ++col) s += p[col] * std::polar(1.0, t.grid.mode(col) * ph);
        return s;
    }

    // P[h](0) = -2 int_0^R h_1(rho) drho
    cplx at_origin() const {
        int col0 = t.grid.col(0);
        return -2.0 * (t.outer(0, col0) + t.src(0, col0) * t.grid.r[0] / (t.origin_order(col0) + 1.0));
    }
};

inline PolarField cauchy_transform(const PolarField& h) { return CauchyTransform(h).field(); }

struct HilbertResult {
    PolarField field;
    cplx origin_c0 = 0.0;           // c_0(0); all other modes vanish at the origin
    bool origin_divergent = false;  // h_2 does not vanish at the origin
};

// Hilbert transform T[h]: c_k = A_k int_0^r r^k/rho^{k+1} h_{k+2} + B_k int_r^R r^k/rho^{k+1} h_{k+2} + h_{k+2}(r).
inline HilbertResult hilbert_transform_full(const PolarField& h) {
    require_compact(h);
    RadialTables t = build_radial_tables(h, 2, 1);
    const PolarGrid& g = t.grid;
    HilbertResult out;
    out.field.grid = g;
    out.field.compact = false;
    out.field.h.resize(g.M(), g.N);
    for (int col = 0; col < g.N; ++col) {
        int k = g.mode(col);
        double A = k < 0 ? 2.0 * (k + 1) : 0.0;
        double B = k >= 0 ? -2.0 * (k + 1) : 0.0;
        for (int i = 0; i < g.M(); ++i) {
            cplx integ = k < 0 ? A * t.inner(i, col) : B * t.outer(i, col);
            out.field.h(i, col) = integ / g.r[i] + t.src(i, col);
        }
    }
    int col0 = g.col(0);
    cplx s0 = t.src(0, col0);
    out.origin_c0 = -2.0 * (t.outer(0, col0) / g.r[0] + s0 / 2.0);
    // local power law of h_2 at the innermost nodes; exponent <= 0 makes h_2/rho non-integrable
    double a0 = std::abs(s0), a1 = std::abs(t.src(1, col0));
    if (a0 > 0.0) {
        double order = a1 > 0.0 ? std::log(a1 / a0) / std::log(g.r[1] / g.r[0]) : 0.0;
        out.origin_divergent = order < 0.5;
    }
    return out;
}

inline PolarField hilbert_transform(const PolarField& h) { return hilbert_transform_full(h).field; }

// True when the angular spectrum decays slower than |k|^{-1.5} in its upper half.
inline bool holder_warning(const PolarField& h) {
    const PolarGrid& g = h.grid;
    double head = 0.0, tail = 0.0;
    for (int col = 0; col < g.N; ++col) {
        int k = std::abs(g.mode(col));
        if (k == 0) continue;
        double amp = h.h.col(col).cwiseAbs().maxCoeff() * std::pow(double(k), 1.5);
        if (k < g.N / 4)
            head = std::max(head, amp);
        else
            tail = std::max(tail, amp);
    }
    return tail > head && tail > 1e-12;
}

}  // namespace siegel
