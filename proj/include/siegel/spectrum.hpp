#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "analytic_map.hpp"
#include "io.hpp"
#include "renorm.hpp"

namespace siegel {

using Operator = std::function<AnalyticMap(const AnalyticMap&)>;

// The renormalization operator with contour radius and crescent boundary
// frozen at the values chosen for f, so nearby maps see the same discretization.
inline Operator frozen_operator(const AnalyticMap& f, RenormConfig cfg, bool project = true) {
    auto base = renormalize_once(f, cfg);
    cfg.contour_radius = base.contour_radius;
    cfg.crescent.boundary = base.boundary;
    cfg.auto_boundary = false;
    cfg.project = project;
    return [cfg](const AnalyticMap& g) { return renormalize_once(g, cfg).map_out; };
}

// e-basis coordinates 2..N of g
inline Eigen::VectorXcd stable_coordinates(const AnalyticMap& g, int N) {
    auto e = to_basis(g).f;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(N - 1);
    for (int k = 2; k <= N && k <= static_cast<int>(e.size()); ++k) v(k - 2) = e[k - 1];
    return v;
}

// How outputs are brought back to the slice before differencing.
//  basis:      drop the e_1 coordinate, i.e. project along z - z^2/2, which keeps f'(1) = 0
//  multiplier: project_stable on both outputs (adds a multiple of z)
enum class SliceProjection { basis, multiplier };

// Probe directions and output coordinates: e_j, or monomials z^j / rho^j.
enum class ProbeBasis { e, monomial };

inline AnalyticMap probe_vector(ProbeBasis b, int j, double rho) {
    return b == ProbeBasis::e ? basis_vector(j, rho) : monomial_vector(j, rho);
}

inline Eigen::VectorXcd slice_coordinates(ProbeBasis b, const AnalyticMap& g, int N) {
    if (b == ProbeBasis::e) return stable_coordinates(g, N);
    Eigen::VectorXcd v(N - 1);
    for (int k = 2; k <= N; ++k) v(k - 2) = g.coeff(k) * std::pow(g.rho, k);
    return v;
}

// (R(f + eps e_j) - R f) / eps in coordinates e_2..e_N; R must not project.
inline Eigen::VectorXcd fd_column(const Operator& R, const AnalyticMap& f, const AnalyticMap& Rf, int j, double eps, int N,
                                  SliceProjection proj = SliceProjection::basis, ProbeBasis basis = ProbeBasis::e) {
    if (j < 2) throw std::invalid_argument("finite-difference directions start at e_2");
    if (!(eps > 0 && eps <= 0.1)) throw std::invalid_argument("eps must lie in (0, 0.1]");
    AnalyticMap pert = R(f + eps * probe_vector(basis, j, f.rho));
    AnalyticMap d = proj == SliceProjection::multiplier ? (1.0 / eps) * (project_stable(pert) - project_stable(Rf))
                                                        : (1.0 / eps) * (pert - Rf);
    d.rho = f.rho;
    return slice_coordinates(basis, d, N);
}

struct LinearizationMatrix {
    int N = 0;
    double eps = 0.0;
    Eigen::MatrixXcd A;  // (N-1) x (N-1), column j-2 is the image of e_j
    json metadata = json::object();
};

inline LinearizationMatrix build_matrix(const Operator& R, const AnalyticMap& f, int N, double eps,
                                        SliceProjection proj = SliceProjection::basis, ProbeBasis basis = ProbeBasis::e) {
    if (N < 2) throw std::invalid_argument("matrix size N must be at least 2");
    LinearizationMatrix m;
    m.N = N;
    m.eps = eps;
    m.A.resize(N - 1, N - 1);
    AnalyticMap Rf = R(f);
    for (int j = 2; j <= N; ++j) m.A.col(j - 2) = fd_column(R, f, Rf, j, eps, N, proj, basis);
    m.metadata["basis"] = basis == ProbeBasis::e ? "e" : "monomial";
    m.metadata["projection"] = proj == SliceProjection::basis ? "basis" : "multiplier";
    m.metadata["map_hash"] = std::to_string(std::hash<std::string>{}(map_to_json(f).dump()));
    return m;
}

// Leading (N-1) x (N-1) block: the matrix for a smaller N from the same columns.
inline LinearizationMatrix truncate(const LinearizationMatrix& m, int N) {
    if (N < 2 || N > m.N) throw std::invalid_argument("cannot truncate to that size");
    LinearizationMatrix t = m;
    t.N = N;
    t.A = m.A.topLeftCorner(N - 1, N - 1);
    return t;
}

inline json matrix_to_json(const LinearizationMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.A.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.A.cols(); ++j) row.push_back(to_json(m.A(i, j)));
        rows.push_back(row);
    }
    return {{"N", m.N}, {"eps", m.eps}, {"entries", rows}, {"metadata", m.metadata}};
}

inline LinearizationMatrix matrix_from_json(const json& j) {
    LinearizationMatrix m;
    m.N = j.at("N").get<int>();
    m.eps = j.value("eps", 0.0);
    const auto& rows = j.at("entries");
    if (static_cast<int>(rows.size()) != m.N - 1) throw std::invalid_argument("matrix rows do not match N");
    m.A.resize(m.N - 1, m.N - 1);
    for (int r = 0; r < m.N - 1; ++r) {
        if (static_cast<int>(rows[r].size()) != m.N - 1) throw std::invalid_argument("matrix is not square");
        for (int c = 0; c < m.N - 1; ++c) m.A(r, c) = cplx_from_json(rows[r][c]);
    }
    if (!m.A.allFinite()) throw numerical_error("matrix has non-finite entries");
    if (j.contains("metadata")) m.metadata = j["metadata"];
    return m;
}

inline Eigen::VectorXcd eigenvalues(const Eigen::MatrixXcd& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("matrix is not square");
    if (M.rows() == 0) return {};
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
    if (es.info() != Eigen::Success) throw numerical_error("eigenvalue iteration did not converge");
    return es.eigenvalues();
}

inline cplx leading_eigenvalue(const Eigen::MatrixXcd& M) {
    auto ev = eigenvalues(M);
    if (ev.size() == 0) throw std::invalid_argument("empty matrix");
    Eigen::Index i;
    ev.cwiseAbs().maxCoeff(&i);
    return ev(i);
}

inline double spectral_radius(const Eigen::MatrixXcd& M) { return std::abs(leading_eigenvalue(M)); }

// induced l1 norm: largest column sum
inline double l1_norm(const Eigen::MatrixXcd& M) {
    if (M.size() == 0) return 0.0;
    return M.cwiseAbs().colwise().sum().maxCoeff();
}

struct BoundConstants {
    double gamma = 0.0;
    double delta = 0.0;
    double C = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    int k = 1;
    double tail_factor = 0.0;
};

// gamma^{1/k} (1 + C delta / gamma)^{1/k}
inline double rsp_bound(double gamma, double delta, double C, int k) {
    if (!(gamma > 0) || delta < 0 || C < 0 || k < 1) throw std::invalid_argument("bound constants out of range");
    return std::exp((std::log(gamma) + std::log1p(C * delta / gamma)) / k);
}

inline double rsp_bound(const BoundConstants& b) { return rsp_bound(b.gamma, b.delta, b.C, b.k); }

// sum_{i=1..k} binom(k,i) |A^{k-i}| delta^{i-1}
inline double binomial_constant(const Eigen::MatrixXcd& A, double delta, int k) {
    std::vector<double> pn(k + 1);
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(A.rows(), A.cols());
    for (int i = 0; i <= k; ++i) {
        pn[i] = l1_norm(P);
        P = P * A;
    }
    double s = 0.0;
    for (int i = 1; i <= k; ++i) {
        if (pn[k - i] == 0.0) continue;
        if (delta == 0.0 && i > 1) break;
        double lb = std::lgamma(k + 1.0) - std::lgamma(i + 1.0) - std::lgamma(k - i + 1.0);
        double lt = lb + std::log(pn[k - i]) + (i > 1 ? (i - 1) * std::log(delta) : 0.0);
        s += std::exp(lt);
    }
    return s;
}

inline double power_norm(const Eigen::MatrixXcd& A, int k) {
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(A.rows(), A.cols());
    for (int i = 0; i < k; ++i) P = P * A;
    return l1_norm(P);
}

struct TailConfig {
    int N = 14;
    double eps = 0.01;
    int k = 80;
    double rho_prime = default_rho_prime;
    std::vector<int> probes_outer;  // empty: {N + 1}
    std::vector<int> probes_inner;  // empty: {2}
    bool subtract_image = true;     // subtract R f; false subtracts f itself
};

struct TailTerms {
    int probe = 0;
    double lin_leq = 0, full_leq = 0;  // P_{<=N} parts, rho norm
    double lin_gt = 0, full_gt = 0;    // P_{>N} parts, rho' norm
    double value = 0;
};

// C1 over probes e_j, j > N, and C2 over probes e_j, 2 <= j <= N; R must not project.
inline BoundConstants estimate_tail_constants(const Operator& R, const AnalyticMap& f, const Eigen::MatrixXcd& A, const TailConfig& tc,
                                              std::vector<TailTerms>* terms = nullptr) {
    const int N = tc.N;
    const double rho = f.rho, eps = tc.eps;
    auto outer = tc.probes_outer.empty() ? std::vector<int>{N + 1} : tc.probes_outer;
    auto inner = tc.probes_inner.empty() ? std::vector<int>{2} : tc.probes_inner;
    for (int j : outer)
        if (j <= N) throw std::invalid_argument("C1 probes must lie beyond N");
    for (int j : inner)
        if (j < 2 || j > N) throw std::invalid_argument("C2 probes must lie in 2..N");

    BoundConstants b;
    b.k = tc.k;
    b.tail_factor = std::pow(rho / tc.rho_prime, N + 1);
    AnalyticMap ref = tc.subtract_image ? R(f) : f;
    double w = eps / (1 - eps);
    auto eval_probe = [&](int j, bool with_leq) {
        AnalyticMap h = basis_vector(j, rho);
        AnalyticMap d_eps = R(f + eps * h) - ref, d_one = R(f + h) - ref;
        d_eps.rho = d_one.rho = rho;
        TailTerms t;
        t.probe = j;
        t.lin_gt = norm_weighted(project_gt(d_eps, N), tc.rho_prime) / eps;
        t.full_gt = norm_weighted(project_gt(d_one, N), tc.rho_prime);
        t.value = b.tail_factor * (t.lin_gt + w * t.full_gt);
        if (with_leq) {
            t.lin_leq = norm_weighted(project_leq(d_eps, N), rho) / eps;
            t.full_leq = norm_weighted(project_leq(d_one, N), rho);
            t.value += t.lin_leq + w * t.full_leq;
        }
        if (terms) terms->push_back(t);
        return t.value;
    };
    for (int j : outer) b.C1 = std::max(b.C1, eval_probe(j, true));
    for (int j : inner) b.C2 = std::max(b.C2, eval_probe(j, false));
    b.delta = std::max(b.C1, b.C2);
    b.gamma = power_norm(A, tc.k);
    b.C = binomial_constant(A, b.delta, tc.k);
    return b;
}

// Leading eigenvalues of the leading blocks of one matrix.
inline std::vector<cplx> leading_eigenvalue_trend(const LinearizationMatrix& m, const std::vector<int>& Ns) {
    std::vector<cplx> out;
    for (int N : Ns) out.push_back(leading_eigenvalue(truncate(m, N).A));
    return out;
}

// Growth of the c_1 component along a direction off the stable slice; the
// operator must not project.
inline double unstable_direction_probe(const Operator& R_unprojected, const AnalyticMap& f, const AnalyticMap& v, double eps) {
    if (std::abs(v.coeff(1)) == 0.0) throw std::invalid_argument("probe direction lies in the stable slice");
    if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
    cplx base = R_unprojected(f).coeff(1);
    cplx pert = R_unprojected(f + eps * v).coeff(1);
    return std::abs(pert - base) / (eps * std::abs(v.coeff(1)));
}

}  // namespace siegel
