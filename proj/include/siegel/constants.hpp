#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace siegel {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// fractional part of the golden mean
inline const double theta = (std::sqrt(5.0) - 1.0) / 2.0;
inline const cplx siegel_multiplier = std::polar(1.0, two_pi * theta);

inline constexpr double default_rho = 2.266;
inline constexpr double default_rho_prime = 3.0;
inline constexpr int default_degree = 17;
inline constexpr double crit_tol = 1e-3;

inline constexpr const char* algorithm_revision = "siegel-renorm 1.0.0";

// L_p norm bound of the planar Hilbert transform
inline double hilbert_cp(double p) {
    double c = 1.0 / std::tan(pi / (2.0 * p));
    return c * c;
}

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace siegel
