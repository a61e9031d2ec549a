#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "siegel/siegel.hpp"

using namespace siegel;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(cplx z) {
    std::ostringstream os;
    os << std::setprecision(4) << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

std::string data(const std::string& name) { return std::string(SIEGEL_DATA_DIR) + "/" + name; }

AnalyticMap table_map() { return read_map(data("fhat_paper.json")); }

Eigen::MatrixXcd typed_table() { return matrix_from_json(json::parse(read_file(data("table1_a6.json")))).A; }

PolarField field_of(const PolarGrid& g, const std::function<cplx(cplx)>& d) { return from_samples(sample(g, d)); }

Outcome transforms_vs_quadrature() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::function<cplx(cplx)>> dens{
        [](cplx z) { return cplx(oracle::bump(z)); },
        [](cplx z) { return oracle::bump(z) * std::conj(z) * std::conj(z) * cplx(1.0, 0.5); },
        [](cplx z) { return oracle::bump(z) * (z + 0.3 * std::pow(std::conj(z), 3) + 0.5); },
    };
    std::vector<cplx> probes;
    for (int i = 0; i < 20; ++i) probes.push_back(std::polar(0.1 + 1.3 * i / 19.0, 0.7 + 2.1 * i));
    auto g = uniform_grid(1.5 / 128, 1.5, 128, 128, 1.0);
    double eps = 2 * (g.r[1] - g.r[0]);
    double worst_p = 0, worst_t = 0;
    for (const auto& d : dens) {
        auto h = field_of(g, d);
        auto P = cauchy_transform(h);
        auto T = hilbert_transform(h);
        std::vector<cplx> po, to;
        double ps = 0, ts = 0;
        for (cplx z : probes) {
            po.push_back(oracle::cauchy(d, z, 1.0));
            to.push_back(oracle::hilbert(d, z, 1.0, eps));
            ps = std::max(ps, std::abs(po.back()));
            ts = std::max(ts, std::abs(to.back()));
        }
        for (std::size_t i = 0; i < probes.size(); ++i) {
            worst_p = std::max(worst_p, std::abs(eval(P, probes[i]).value - po[i]) / std::max(std::abs(po[i]), 0.1 * ps));
            worst_t = std::max(worst_t, std::abs(eval(T, probes[i]).value - to[i]) / std::max(std::abs(to[i]), 0.1 * ts));
        }
    }
    double secs = seconds_since(t0);
    std::ostringstream os;
    os << "max relative error P " << worst_p << ", T " << worst_t << " (limit 5e-2), " << secs << " s (limit 120)";
    return {worst_p <= 5e-2 && worst_t <= 5e-2 && secs < 120, os.str()};
}

Outcome indicator_closed_forms() {
    double R = 1.0;
    auto g = uniform_grid(2.0 / 512, 2.0, 512, 512, R);
    auto h = field_of(g, [&](cplx z) { return std::abs(z) <= R * (1 + 1e-12) ? cplx(1.0) : cplx(0.0); });
    auto P = cauchy_transform(h);
    auto T = hilbert_transform(h);
    double cell = g.r[1] - g.r[0];
    double ep = 0, et = 0;
    int used = 0;
    for (int i = 0; i < 400; ++i) {
        cplx z = std::polar(0.02 + 1.95 * i / 399.0, 2.399963 * i);
        if (std::abs(std::abs(z) - R) < 3 * cell) continue;
        bool in = std::abs(z) < R;
        ep = std::max(ep, std::abs(eval(P, z).value - (in ? std::conj(z) : R * R / z)));
        et = std::max(et, std::abs(eval(T, z).value - (in ? cplx(0.0) : -R * R / (z * z))));
        ++used;
    }
    std::ostringstream os;
    os << used << " probes, max error P " << ep << ", T " << et << " (limit 1e-3)";
    return {ep <= 1e-3 && et <= 1e-3, os.str()};
}

BeltramiSolution disk_solution(int M, int N, double k) {
    PolarGrid g = geometric_grid(1e-4, 1e4, M, N, 1.0);
    Table mu = Table::Zero(g.M(), g.N);
    for (int i = 0; i < g.M(); ++i)
        if (g.r[i] < 1.0) mu.row(i).setConstant(k);
    return solve(make_problem(g, mu));
}

Outcome beltrami_solver() {
    PolarGrid g0 = geometric_grid(1e-4, 1e4, 120, 64);
    auto id = solve(make_problem(g0, Table::Zero(g0.M(), g0.N)));
    double eid = 0;
    for (int i = 0; i < 50; ++i) {
        cplx z = std::polar(0.05 + 0.95 * i / 49.0, 1.3 * i);
        eid = std::max(eid, std::abs(id.eval(z) - z));
    }
    auto coarse = disk_solution(160, 32, 0.3), fine = disk_solution(320, 64, 0.3);
    double rc = residual(coarse, 1.0).median, rf = residual(fine, 1.0).median;
    double bound = fine.problem.K * hilbert_cp(fine.problem.p) + 0.1, worst = 0;
    for (std::size_t i = 1; i < fine.history.size(); ++i) {
        if (fine.history[i - 1] < 1e-13) break;
        worst = std::max(worst, fine.history[i] / fine.history[i - 1]);
    }

    // the disk problem converges in one step, so also run the gluing coefficient of the table map
    auto f = table_map();
    auto cres = std::make_shared<const FundamentalCrescent>(FundamentalCrescent::build(f));
    SolverConfig sc;
    PolarGrid g = solver_grid(sc);
    auto glued = solve(build_mu(StripMap(cres, g.r), g, sc));
    double bound_f = glued.problem.K * hilbert_cp(glued.problem.p) + 0.1, worst_f = 0;
    double peak = *std::max_element(glued.history.begin(), glued.history.end());
    for (std::size_t i = 3; i < glued.history.size(); ++i) {
        if (glued.history[i - 1] < 1e-12 * peak) break;
        worst_f = std::max(worst_f, glued.history[i] / glued.history[i - 1]);
    }

    std::ostringstream os;
    os << "identity error " << eid << " (limit 1e-12); median residual " << rc << " -> " << rf << ", improvement " << rc / rf
       << " (limits 1e-2, 1.5); contraction ratio " << worst << " vs K c_p + 0.1 = " << bound << " (disk), " << worst_f << " vs "
       << bound_f << " (table map, after 3 iterations)";
    return {eid <= 1e-12 && rf <= 1e-2 && rc <= 1e-2 && rc / rf >= 1.5 && worst <= bound && worst_f <= bound_f && glued.converged, os.str()};
}

Outcome fixed_point_reproduction() {
    auto t0 = std::chrono::steady_clock::now();
    auto steps = iterate_fixed_point(quadratic_normalized(), 11);
    const auto& f = steps.back().map;
    auto ref = table_map();
    double e2 = std::abs(f.coeff(2) - ref.coeff(2)) / std::abs(ref.coeff(2));
    double e3 = std::abs(f.coeff(3) - ref.coeff(3)) / std::abs(ref.coeff(3));
    double e4 = std::abs(f.coeff(4) - ref.coeff(4)) / std::abs(ref.coeff(4));
    double secs = seconds_since(t0);
    std::ostringstream os;
    os << "c2 = " << fmt(f.coeff(2)) << " (rel err " << e2 << ", limit 0.02), c3 = " << fmt(f.coeff(3)) << " (" << e3
       << ", limit 0.05), c4 = " << fmt(f.coeff(4)) << " (" << e4 << ", limit 0.05); last step " << steps.back().step_norm << ", "
       << secs << " s";
    return {e2 <= 0.02 && e3 <= 0.05 && e4 <= 0.05 && secs <= 7200, os.str()};
}

Outcome self_consistency() {
    auto f = table_map();
    RenormConfig cfg;
    cfg.self_distance = true;
    auto r = renormalize_once(f, cfg);
    double rel = r.self_distance / norm_weighted(f, cfg.rho_in);
    std::ostringstream os;
    os << "|R f - f| / |f| = " << rel << " (limit 1e-2); R f has c2 = " << fmt(r.map_out.coeff(2));
    return {rel <= 1e-2, os.str()};
}

Outcome domain_experiment() {
    auto rep = check_domain(table_map());
    std::ostringstream os;
    os << "image min modulus " << rep.image_min_modulus << " (winding " << rep.winding << "), orbit max modulus " << rep.max_modulus
       << ", return counts {";
    for (std::size_t i = 0; i < rep.iterate_counts.size(); ++i) os << (i ? ", " : "") << rep.iterate_counts[i];
    os << "}";
    return {rep.encircles_3 && rep.containment_2266 && rep.iterate_counts == std::vector<int>{2, 3}, os.str()};
}

struct SpectrumData {
    LinearizationMatrix A14;
    double probe = 0, probe_half = 0;
};

Outcome table_replication(const SpectrumData& s) {
    auto A6 = truncate(s.A14, 6).A;
    auto T = typed_table();
    double entry = (A6 - T).cwiseAbs().maxCoeff();
    double typed = spectral_radius(T), computed = spectral_radius(A6);
    std::ostringstream os;
    os << "max entry difference " << entry << " (limit 0.1); typed radius " << typed << " (0.53 +- 0.01); computed radius " << computed
       << " (range [0.40, 0.65])";
    return {entry <= 0.1 && std::abs(typed - 0.53) <= 0.01 && computed >= 0.40 && computed <= 0.65, os.str()};
}

Outcome eigenvalue_trend(const SpectrumData& s) {
    auto trend = leading_eigenvalue_trend(s.A14, {6, 8, 10, 12, 14});
    cplx target(0.15, 0.56);
    std::ostringstream os;
    os << "leading eigenvalues N = 6..14:";
    for (cplx l : trend) os << " " << fmt(l);
    double d = std::abs(trend.back() - target);
    os << "; distance at N = 14 " << d << " (limit 0.1)";
    return {d <= 0.1, os.str()};
}

Outcome bound_formula() {
    double b = rsp_bound(2.07e-18, 0.24, 8.4e-6, 80);
    std::ostringstream os;
    os << std::setprecision(6) << "bound " << b << " (range [0.84, 0.86])";
    return {b >= 0.84 && b <= 0.86, os.str()};
}

Outcome hyperbolicity(const SpectrumData& s) {
    const auto& A = s.A14.A;
    double colmax = A.cwiseAbs().colwise().sum().maxCoeff();
    std::vector<int> ks{10, 20, 40, 80};
    std::vector<double> norms;
    for (int k : ks) norms.push_back(power_norm(A, k));
    bool geometric = norms.back() < 1.0;
    for (std::size_t i = 1; i < norms.size(); ++i) geometric = geometric && norms[i] < norms[i - 1];
    double rate = std::pow(norms[3] / norms[2], 1.0 / 40);
    std::ostringstream os;
    os << "unstable growth " << s.probe << " (eps 0.01), " << s.probe_half << " (eps 0.005); max column norm " << colmax
       << "; |A^k| for k = 10, 20, 40, 80:";
    for (double n : norms) os << " " << n;
    os << "; rate " << rate;
    return {s.probe > 1 && s.probe_half > 1 && std::isfinite(colmax) && geometric && rate < 1, os.str()};
}

Outcome structural_suite(bool run) {
    if (!run) return {false, "not run (--skip-ctest)"};
    std::string cmd = "ctest --test-dir " + std::string(SIEGEL_BUILD_DIR) + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return {rc == 0, rc == 0 ? "ctest suite passed" : "ctest reported failures (exit " + std::to_string(rc) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    bool ctest = true;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--skip-ctest") ctest = false;

    int passed = 0, total = 0;
    auto report = [&](int n, const char* name, const std::function<Outcome()>& fn) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        ++total;
        passed += o.pass;
        std::cout << "criterion " << n << " [" << (o.pass ? "PASS" : "FAIL") << "] " << name << ": " << o.detail << " ("
                  << std::setprecision(3) << seconds_since(t0) << std::setprecision(6) << " s)" << std::endl;
    };

    report(1, "transform oracle equivalence", transforms_vs_quadrature);
    report(2, "closed-form indicator tests", indicator_closed_forms);
    report(3, "Beltrami solver", beltrami_solver);
    report(4, "fixed-point reproduction", fixed_point_reproduction);
    report(5, "self-consistency at the table map", self_consistency);
    report(6, "domain experiment", domain_experiment);

    SpectrumData s;
    std::string spectrum_error;
    try {
        auto f = table_map();
        auto R = frozen_operator(f, {}, false);
        s.A14 = build_matrix(R, f, 14, 0.01);
        auto v = basis_vector(1, f.rho);
        s.probe = unstable_direction_probe(R, f, v, 0.01);
        s.probe_half = unstable_direction_probe(R, f, v, 0.005);
    } catch (const std::exception& e) {
        spectrum_error = e.what();
    }
    auto needs_matrix = [&](Outcome (*fn)(const SpectrumData&)) {
        return [&, fn]() -> Outcome {
            if (!spectrum_error.empty()) throw std::runtime_error(spectrum_error);
            return fn(s);
        };
    };
    report(7, "Table 1 replication", needs_matrix(table_replication));
    report(8, "eigenvalue trend", needs_matrix(eigenvalue_trend));
    report(9, "bound formula", bound_formula);
    report(10, "hyperbolicity probes", needs_matrix(hyperbolicity));
    report(11, "structural invariants suite", [&] { return structural_suite(ctest); });

    std::cout << passed << " of " << total << " criteria passed" << std::endl;
    return passed == total ? 0 : 1;
}
