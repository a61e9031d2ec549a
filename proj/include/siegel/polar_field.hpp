#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "constants.hpp"

namespace siegel {

using Table = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PolarGrid {
    std::vector<double> r;  // strictly increasing radii
    int N = 0;              // angular samples / Fourier modes
    double R = 0.0;         // support radius, must be one of the radii

    int M() const { return static_cast<int>(r.size()); }
    double phi(int j) const { return two_pi * j / N; }
    int mode(int col) const { return col < N / 2 ? col : col - N; }
    int col(int k) const { return ((k % N) + N) % N; }
    bool has_mode(int k) const { return k >= -N / 2 && k < N / 2; }

    bool operator==(const PolarGrid& o) const { return N == o.N && R == o.R && r == o.r; }
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline void validate(const PolarGrid& g) {
    if (!is_power_of_two(g.N)) throw std::invalid_argument("angular size must be a power of two");
    if (g.r.size() < 2) throw std::invalid_argument("need at least two radii");
    for (std::size_t i = 0; i < g.r.size(); ++i) {
        if (!(g.r[i] > 0.0) || !std::isfinite(g.r[i])) throw std::invalid_argument("radii must be positive");
        if (i && !(g.r[i] > g.r[i - 1])) throw std::invalid_argument("radii must be strictly increasing");
    }
    if (!(g.r.back() >= g.R)) throw std::invalid_argument("outermost radius below support radius");
}

// Geometric radii from r1 to rM; R is inserted as a node when it falls strictly inside.
inline PolarGrid geometric_grid(double r1, double rM, int M, int N, double R = -1.0) {
    PolarGrid g;
    g.N = N;
    g.r.resize(M);
    double lq = std::log(rM / r1) / (M - 1);
    for (int i = 0; i < M; ++i) g.r[i] = r1 * std::exp(lq * i);
    g.r.back() = rM;
    if (R <= 0.0) R = rM;
    auto it = std::lower_bound(g.r.begin(), g.r.end(), R);
    if (it == g.r.end()) throw std::invalid_argument("support radius outside the grid");
    if (std::abs(*it - R) > 1e-12 * R) {
        if (it != g.r.begin() && std::abs(*(it - 1) - R) <= 1e-12 * R)
            *(it - 1) = R;
        else
            g.r.insert(it, R);
    } else {
        *it = R;
    }
    g.R = R;
    validate(g);
    return g;
}

inline PolarGrid uniform_grid(double r1, double rM, int M, int N, double R = -1.0) {
    PolarGrid g;
    g.N = N;
    for (int i = 0; i < M; ++i) g.r.push_back(r1 + (rM - r1) * i / (M - 1.0));
    if (R <= 0.0) R = rM;
    if (std::find(g.r.begin(), g.r.end(), R) == g.r.end()) {
        g.r.insert(std::lower_bound(g.r.begin(), g.r.end(), R), R);
    }
    g.R = R;
    validate(g);
    return g;
}

struct PolarField {
    PolarGrid grid;
    Table h;  // h(i, col) = h_k(r_i), k = grid.mode(col)
    bool compact = true;

    cplx mode(int i, int k) const { return grid.has_mode(k) ? h(i, grid.col(k)) : cplx(0.0); }
};

struct PolarSamples {
    PolarGrid grid;
    Table v;  // v(i, j) = value at r_i e^{i phi_j}
};

namespace detail {
inline Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> fft;
    return fft;
}
}  // namespace detail

inline PolarField from_samples(const PolarSamples& s) {
    validate(s.grid);
    if (s.v.rows() != s.grid.M() || s.v.cols() != s.grid.N) throw std::invalid_argument("sample table shape mismatch");
    auto& fft = detail::fft_engine();
    PolarField f;
    f.grid = s.grid;
    f.h.resize(s.grid.M(), s.grid.N);
    std::vector<cplx> in(s.grid.N), out;
    for (int i = 0; i < s.grid.M(); ++i) {
        for (int j = 0; j < s.grid.N; ++j) {
            in[j] = s.v(i, j);
            if (!std::isfinite(in[j].real()) || !std::isfinite(in[j].imag()))
                throw numerical_error("non-finite sample");
        }
        fft.fwd(out, in);
        for (int j = 0; j < s.grid.N; ++j) f.h(i, j) = out[j] / double(s.grid.N);
    }
    for (int i = 0; i < s.grid.M() && f.compact; ++i)
        if (s.grid.r[i] > s.grid.R * (1 + 1e-12) && f.h.row(i).cwiseAbs().maxCoeff() != 0.0) f.compact = false;
    return f;
}

inline PolarSamples to_samples(const PolarField& f) {
    auto& fft = detail::fft_engine();
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    PolarSamples s;
    s.grid = f.grid;
    s.v.resize(f.grid.M(), f.grid.N);
    std::vector<cplx> in(f.grid.N), out;
    for (int i = 0; i < f.grid.M(); ++i) {
        for (int j = 0; j < f.grid.N; ++j) in[j] = f.h(i, j);
        fft.inv(out, in);
        for (int j = 0; j < f.grid.N; ++j) s.v(i, j) = out[j];
    }
    fft.ClearFlag(Eigen::FFT<double>::Unscaled);
    return s;
}

template <class F>
PolarSamples sample(const PolarGrid& g, F&& fn) {
    PolarSamples s;
    s.grid = g;
    s.v.resize(g.M(), g.N);
    for (int i = 0; i < g.M(); ++i)
        for (int j = 0; j < g.N; ++j) s.v(i, j) = fn(std::polar(g.r[i], g.phi(j)));
    return s;
}

struct FieldValue {
    cplx value;
    bool extrapolated;
};

// Piecewise linear in r per mode, then the mode sum at arg z.
inline FieldValue eval(const PolarField& f, cplx z) {
    const auto& r = f.grid.r;
    double rq = std::abs(z);
    bool extra = rq < r.front() || rq > r.back();
    rq = std::clamp(rq, r.front(), r.back());
    int i = int(std::upper_bound(r.begin(), r.end(), rq) - r.begin()) - 1;
    i = std::clamp(i, 0, f.grid.M() - 2);
    double t = (rq - r[i]) / (r[i + 1] - r[i]);
    double ph = std::arg(z);
    cplx s = 0.0;
    for (int col = 0; col < f.grid.N; ++col) {
        cplx hk = (1 - t) * f.h(i, col) + t * f.h(i + 1, col);
        s += hk * std::polar(1.0, f.grid.mode(col) * ph);
    }
    return {s, extra};
}

inline Table pointwise_product(const PolarSamples& a, const PolarSamples& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("grid mismatch");
    return a.v.cwiseProduct(b.v);
}

inline std::string field_csv(const PolarField& f) {
    std::ostringstream os;
    os.precision(17);
    os << "# radii:" << f.grid.M() << " modes:" << f.grid.N << " R:" << f.grid.R << "\n";
    for (int col = 0; col < f.grid.N; ++col) {
        int k = f.grid.mode(col);
        for (int i = 0; i < f.grid.M(); ++i)
            os << k << ", " << i << ", " << f.h(i, col).real() << ", " << f.h(i, col).imag() << "\n";
    }
    return os.str();
}

inline std::string samples_csv(const PolarSamples& s) {
    std::ostringstream os;
    os.precision(17);
    for (int i = 0; i < s.grid.M(); ++i)
        for (int j = 0; j < s.grid.N; ++j)
            os << s.grid.r[i] << ", " << s.grid.phi(j) << ", " << s.v(i, j).real() << ", " << s.v(i, j).imag() << "\n";
    return os.str();
}

}  // namespace siegel
