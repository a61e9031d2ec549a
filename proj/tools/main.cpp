#include <chrono>
#include <iostream>

#include <CLI11.hpp>
#include <fftw3.h>

#include "siegel/siegel.hpp"

using namespace siegel;

namespace {

struct RunConfig {
    RenormConfig renorm;
    std::string boundary = "auto";
    int N = 14;
    double eps = 0.01;
    int k = 80;
    std::vector<int> probes;
};

void apply_json(RunConfig& rc, const json& j) {
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        auto& sc = rc.renorm.solver;
        sc.N = s.value("N", sc.N);
        sc.M = s.value("M", sc.M);
        sc.r_min = s.value("r_min", sc.r_min);
        sc.r_max = s.value("r_max", sc.r_max);
        sc.p = s.value("p", sc.p);
        sc.tol = s.value("tol", sc.tol);
        sc.max_iter = s.value("max_iter", sc.max_iter);
    }
    if (j.contains("renorm")) {
        const auto& r = j["renorm"];
        auto& c = rc.renorm;
        c.contour_radius = r.value("contour_radius", c.contour_radius);
        c.n_contour = r.value("n_contour", c.n_contour);
        c.out_degree = r.value("out_degree", c.out_degree);
        c.crescent.slope = r.value("slope", c.crescent.slope);
        rc.boundary = r.value("boundary", rc.boundary);
    }
    if (j.contains("spectrum")) {
        const auto& s = j["spectrum"];
        rc.N = s.value("N", rc.N);
        rc.eps = s.value("eps", rc.eps);
        rc.k = s.value("k", rc.k);
        rc.probes = s.value("probes", rc.probes);
    }
}

json config_json(const RunConfig& rc) {
    const auto& s = rc.renorm.solver;
    const auto& c = rc.renorm;
    return {{"solver", {{"N", s.N}, {"M", s.M}, {"r_min", s.r_min}, {"r_max", s.r_max}, {"p", s.p}, {"tol", s.tol}, {"max_iter", s.max_iter}}},
            {"renorm",
             {{"contour_radius", c.contour_radius},
              {"n_contour", c.n_contour},
              {"out_degree", c.out_degree},
              {"slope", c.crescent.slope},
              {"boundary", rc.boundary}}},
            {"spectrum", {{"N", rc.N}, {"eps", rc.eps}, {"k", rc.k}, {"probes", rc.probes}}}};
}

void finalize(RunConfig& rc) {
    if (rc.boundary == "auto") {
        rc.renorm.auto_boundary = true;
    } else if (rc.boundary == "parabola" || rc.boundary == "arc") {
        rc.renorm.auto_boundary = false;
        rc.renorm.crescent.boundary = rc.boundary == "arc" ? BoundaryKind::arc : BoundaryKind::parabola;
    } else {
        throw std::invalid_argument("boundary must be auto, parabola or arc");
    }
    validate(solver_grid(rc.renorm.solver));
    if (!(rc.renorm.solver.p > 2.0)) throw std::invalid_argument("p must exceed 2");
    if (!(rc.eps > 0 && rc.eps <= 0.1)) throw std::invalid_argument("eps must lie in (0, 0.1]");
    if (rc.N < 2) throw std::invalid_argument("N must be at least 2");
    if (rc.k < 1) throw std::invalid_argument("k must be positive");
    validate(rc.renorm);
}

json cplx_list(const std::vector<cplx>& v) {
    json a = json::array();
    for (cplx z : v) a.push_back(to_json(z));
    return a;
}

json coeff_summary(const AnalyticMap& f) {
    return {{"c1", to_json(f.coeff(1))}, {"c2", to_json(f.coeff(2))}, {"c3", to_json(f.coeff(3))}, {"c4", to_json(f.coeff(4))}};
}

json renorm_summary(const RenormResult& r) {
    json counts = json::object();
    for (auto [k, n] : r.return_counts) counts[std::to_string(k)] = n;
    json j = {{"boundary", to_string(r.boundary)},
              {"fixed_point", to_json(r.fixed_point)},
              {"K", r.K},
              {"beltrami_iterations", r.beltrami_iterations},
              {"contour_radius", r.contour_radius},
              {"contour_margin", r.contour_margin},
              {"critical_value", to_json(r.critical_value)},
              {"c0_relative", r.c0},
              {"return_counts", counts},
              {"coefficients", coeff_summary(r.map_out)}};
    if (std::isfinite(r.self_distance)) j["self_distance"] = r.self_distance;
    return j;
}

AnalyticMap start_map(const std::string& s) {
    if (s == "quadratic") return quadratic_normalized();
    return read_map(s);
}

std::vector<int> parse_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    return out;
}

json spectrum_report(const LinearizationMatrix& m, const std::vector<int>& trend, int k) {
    auto ev = eigenvalues(m.A);
    std::vector<cplx> evs(ev.data(), ev.data() + ev.size());
    std::sort(evs.begin(), evs.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
    json t = json::array();
    for (int n : trend) {
        if (n < 2 || n > m.N) continue;
        t.push_back({{"N", n}, {"leading", to_json(leading_eigenvalue(truncate(m, n).A))}});
    }
    json norms = json::object();
    for (int p : {1, 10, 20, 40, k}) norms[std::to_string(p)] = power_norm(m.A, p);
    double col_max = m.A.cwiseAbs().colwise().sum().maxCoeff();
    return {{"N", m.N},
            {"eps", m.eps},
            {"eigenvalues", cplx_list(evs)},
            {"leading_eigenvalue", to_json(leading_eigenvalue(m.A))},
            {"spectral_radius", spectral_radius(m.A)},
            {"max_column_norm", col_max},
            {"power_norms", norms},
            {"trend", t}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Renormalization of golden-mean Siegel disk maps"};
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", std::string(algorithm_revision));

    RunConfig rc;
    std::string config_path, manifest_path;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--manifest", manifest_path, "write the run manifest here as well as to stdout");

    // overrides, applied after the config file
    std::optional<int> o_gN, o_gM, o_iter, o_ncont, o_deg;
    std::optional<double> o_p, o_tol, o_rad, o_slope;
    std::optional<std::string> o_boundary;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--grid-N", o_gN, "angular samples (power of two)");
        s->add_option("--grid-M", o_gM, "radial samples");
        s->add_option("--p", o_p, "integrability exponent");
        s->add_option("--tol", o_tol, "Beltrami stopping tolerance");
        s->add_option("--max-iter", o_iter, "Beltrami iteration cap");
        s->add_option("--contour-radius", o_rad, "fixed contour radius (0 = adaptive)");
        s->add_option("--n-contour", o_ncont, "contour samples");
        s->add_option("--out-degree", o_deg, "output degree");
        s->add_option("--slope", o_slope, "boundary tangent slope");
        s->add_option("--boundary", o_boundary, "auto, parabola or arc");
    };

    std::string in, out, start = "quadratic", matrix_path, probes, trend = "4,6,8,10,12,14", basis = "e", dump_dir, report_path;
    int iters = 11, samples = 1000, steps_n = 1;
    std::optional<int> o_N, o_k;
    std::optional<double> o_eps;
    double gamma = 0, delta = 0, C = 0, mu_disk = 0;
    int kb = 80;
    bool project = false;

    auto* ren = app.add_subcommand("renormalize", "apply the operator");
    ren->add_option("--in", in)->required()->check(CLI::ExistingFile);
    ren->add_option("--out", out);
    ren->add_option("--steps", steps_n, "number of applications")->check(CLI::PositiveNumber);
    ren->add_flag("--project-stable", project, "set c_1 to the rotation multiplier after each step");
    ren->add_option("--dump-contours", dump_dir, "directory for crescent and contour CSV files");
    add_common(ren);

    auto* fp = app.add_subcommand("fixed-point", "iterate the projected operator");
    fp->add_option("--start", start, "'quadratic' or a map file");
    fp->add_option("--iters", iters)->check(CLI::NonNegativeNumber);
    fp->add_option("--out", out);
    add_common(fp);

    auto* dom = app.add_subcommand("check-domain", "domain experiment for a map");
    dom->add_option("--in", in)->required()->check(CLI::ExistingFile);
    dom->add_option("--samples", samples)->check(CLI::PositiveNumber);
    dom->add_option("--report", report_path, "write the report JSON here");
    add_common(dom);

    auto* lin = app.add_subcommand("linearize", "finite-difference matrix of the operator");
    lin->add_option("--in", in)->required()->check(CLI::ExistingFile);
    lin->add_option("--N", o_N);
    lin->add_option("--eps", o_eps);
    lin->add_option("--basis", basis, "e or monomial")->check(CLI::IsMember({"e", "monomial"}));
    lin->add_option("--out", out)->required();
    add_common(lin);

    auto* spec = app.add_subcommand("spectrum", "eigenvalues of a stored matrix");
    spec->add_option("--matrix", matrix_path)->required()->check(CLI::ExistingFile);
    spec->add_option("--trend", trend, "leading-block sizes");
    spec->add_option("--k", o_k);

    auto* bnd = app.add_subcommand("bound", "spectral radius bound from constants");
    bnd->add_option("--gamma", gamma)->required();
    bnd->add_option("--delta", delta)->required();
    bnd->add_option("--C", C)->required();
    bnd->add_option("--k", kb)->required();

    auto* tail = app.add_subcommand("tail", "tail constants and the resulting bound");
    tail->add_option("--in", in)->required()->check(CLI::ExistingFile);
    tail->add_option("--matrix", matrix_path, "reuse a stored matrix")->check(CLI::ExistingFile);
    tail->add_option("--N", o_N);
    tail->add_option("--eps", o_eps);
    tail->add_option("--k", o_k);
    tail->add_option("--probes", probes, "probe indices; at least one in 2..N and one beyond N");
    add_common(tail);

    auto* sb = app.add_subcommand("solve-beltrami", "solve the Beltrami equation of a map's gluing");
    auto* sb_in = sb->add_option("--in", in)->check(CLI::ExistingFile);
    sb->add_option("--mu-disk", mu_disk, "use k times the unit disk indicator instead")->excludes(sb_in);
    sb->add_option("--out", out, "CSV of G on the grid");
    add_common(sb);

    auto* dc = app.add_subcommand("dump-crescent", "boundary curves of the fundamental crescent");
    dc->add_option("--in", in)->required()->check(CLI::ExistingFile);
    dc->add_option("--out", out)->required();
    add_common(dc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 1;
    }
    auto* cmd = app.get_subcommands().front();

    try {
        if (!config_path.empty()) apply_json(rc, json::parse(read_file(config_path)));
        auto& sc = rc.renorm.solver;
        if (o_gN) sc.N = *o_gN;
        if (o_gM) sc.M = *o_gM;
        if (o_p) sc.p = *o_p;
        if (o_tol) sc.tol = *o_tol;
        if (o_iter) sc.max_iter = *o_iter;
        if (o_rad) rc.renorm.contour_radius = *o_rad;
        if (o_ncont) rc.renorm.n_contour = *o_ncont;
        if (o_deg) rc.renorm.out_degree = *o_deg;
        if (o_slope) rc.renorm.crescent.slope = *o_slope;
        if (o_boundary) rc.boundary = *o_boundary;
        if (o_N) rc.N = *o_N;
        if (o_eps) rc.eps = *o_eps;
        if (o_k) rc.k = *o_k;
        if (!probes.empty()) rc.probes = parse_list(probes);
        finalize(rc);
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    }

    auto t0 = std::chrono::steady_clock::now();
    json results;
    std::string name = cmd->get_name();
    try {
        if (name == "renormalize") {
            auto cfg = rc.renorm;
            cfg.project = project;
            cfg.self_distance = true;
            AnalyticMap f = read_map(in);
            json per_step = json::array();
            RenormResult r;
            for (int i = 0; i < steps_n; ++i) {
                r = renormalize_once(f, cfg);
                per_step.push_back({{"self_distance", r.self_distance}, {"relative", r.self_distance / norm_weighted(f, cfg.rho_in)}});
                if (!dump_dir.empty()) {
                    CrescentConfig cc = cfg.crescent;
                    cc.boundary = r.boundary;
                    auto cres = FundamentalCrescent::build(f, cc);
                    std::ostringstream os;
                    os.precision(17);
                    os << "z_re,z_im,w_re,w_im,h_re,h_im,return_count\n";
                    for (std::size_t j = 0; j < r.contour.z.size(); ++j)
                        os << r.contour.z[j].real() << "," << r.contour.z[j].imag() << "," << r.contour.w[j].real() << ","
                           << r.contour.w[j].imag() << "," << r.contour.vals[j].real() << "," << r.contour.vals[j].imag() << ","
                           << r.contour.counts[j] << "\n";
                    auto stem = std::filesystem::path(dump_dir) / ("step" + std::to_string(i + 1));
                    write_atomic(stem.string() + "_crescent.csv", contour_csv(cres));
                    write_atomic(stem.string() + "_contour.csv", os.str());
                }
                f = r.map_out;
            }
            results = renorm_summary(r);
            results["steps"] = per_step;
            if (!out.empty()) write_map(out, f);
        } else if (name == "fixed-point") {
            json steps = json::array();
            auto log = [&](int i, const FixedPointStep& s) {
                std::cerr << "step " << i + 1 << ": |f_{i+1} - f_i| = " << s.step_norm << ", c2 = " << s.map.coeff(2) << "\n";
            };
            auto f0 = start_map(start);
            auto res = iterate_fixed_point(f0, iters, rc.renorm, log);
            for (const auto& s : res) steps.push_back({{"step_norm", s.step_norm}, {"boundary", to_string(s.detail.boundary)}});
            AnalyticMap last = res.empty() ? f0 : res.back().map;
            results = {{"steps", steps}, {"coefficients", coeff_summary(last)}};
            if (!out.empty()) write_map(out, last);
        } else if (name == "check-domain") {
            auto rep = check_domain(read_map(in), rc.renorm, samples);
            results = {{"encircles_3", rep.encircles_3},
                       {"containment_2266", rep.containment_2266},
                       {"max_modulus", rep.max_modulus},
                       {"image_min_modulus", rep.image_min_modulus},
                       {"winding", rep.winding},
                       {"iterate_counts", rep.iterate_counts},
                       {"contour_radius", rep.contour_radius},
                       {"samples", rep.samples}};
            if (rep.offending_point) results["offending_point"] = to_json(*rep.offending_point);
            if (!report_path.empty()) write_atomic(report_path, results.dump(2) + "\n");
        } else if (name == "linearize") {
            auto f = read_map(in);
            auto R = frozen_operator(f, rc.renorm, false);
            auto m = build_matrix(R, f, rc.N, rc.eps, SliceProjection::basis, basis == "e" ? ProbeBasis::e : ProbeBasis::monomial);
            m.metadata["config"] = config_json(rc);
            write_atomic(out, matrix_to_json(m).dump(1) + "\n");
            results = spectrum_report(m, parse_list(trend), rc.k);
        } else if (name == "spectrum") {
            auto m = matrix_from_json(json::parse(read_file(matrix_path)));
            results = spectrum_report(m, parse_list(trend), rc.k);
        } else if (name == "bound") {
            results = {{"bound", rsp_bound(gamma, delta, C, kb)}};
        } else if (name == "tail") {
            auto f = read_map(in);
            auto R = frozen_operator(f, rc.renorm, false);
            TailConfig tc;
            tc.N = rc.N;
            tc.eps = rc.eps;
            tc.k = rc.k;
            for (int j : rc.probes) (j > rc.N ? tc.probes_outer : tc.probes_inner).push_back(j);
            if (!rc.probes.empty() && (tc.probes_outer.empty() || tc.probes_inner.empty()))
                throw std::invalid_argument("probes need one index beyond N and one in 2..N");
            LinearizationMatrix m;
            if (!matrix_path.empty()) {
                m = matrix_from_json(json::parse(read_file(matrix_path)));
                if (m.N != rc.N) throw std::invalid_argument("matrix size differs from N");
            } else {
                m = build_matrix(R, f, rc.N, rc.eps);
            }
            std::vector<TailTerms> terms;
            auto b = estimate_tail_constants(R, f, m.A, tc, &terms);
            json tj = json::array();
            for (const auto& t : terms)
                tj.push_back({{"probe", t.probe}, {"lin_leq", t.lin_leq}, {"full_leq", t.full_leq}, {"lin_gt", t.lin_gt}, {"full_gt", t.full_gt}, {"value", t.value}});
            results = {{"gamma", b.gamma}, {"delta", b.delta}, {"C", b.C}, {"C1", b.C1}, {"C2", b.C2}, {"k", b.k}, {"tail_factor", b.tail_factor},
                       {"bound", rsp_bound(b)}, {"terms", tj}};
        } else if (name == "solve-beltrami") {
            const auto& sc = rc.renorm.solver;
            BeltramiSolution sol;
            if (!in.empty()) {
                sol = RenormContext::build(read_map(in), rc.renorm).sol;
            } else {
                auto grid = geometric_grid(1e-4, 1e4, sc.M, sc.N, 1.0);
                Table mu = Table::Zero(grid.M(), grid.N);
                for (int i = 0; i < grid.M(); ++i)
                    if (grid.r[i] < 1.0) mu.row(i).setConstant(mu_disk);
                sol = solve(make_problem(grid, std::move(mu), sc));
            }
            results = {{"K", sol.problem.K},
                       {"iterations", static_cast<int>(sol.history.size())},
                       {"converged", sol.converged},
                       {"last_increment", sol.history_max.empty() ? 0.0 : sol.history_max.back()}};
            if (!out.empty()) {
                const auto& g = sol.problem.grid;
                auto G = sol.grid_values();
                std::ostringstream os;
                os.precision(17);
                os << "r,phi,re,im\n";
                for (int i = 0; i < g.M(); ++i)
                    for (int j = 0; j < g.N; ++j) os << g.r[i] << "," << g.phi(j) << "," << G(i, j).real() << "," << G(i, j).imag() << "\n";
                write_atomic(out, os.str());
            }
        } else if (name == "dump-crescent") {
            auto ctx = RenormContext::build(read_map(in), rc.renorm);
            const auto& c = *ctx.crescent;
            write_atomic(out, contour_csv(c));
            results = {{"boundary", to_string(c.cfg.boundary)},
                       {"fixed_point", to_json(c.a)},
                       {"critical_point", to_json(c.critical)},
                       {"anchor_in", to_json(c.anchor_in)},
                       {"anchor_mid", to_json(c.anchor_mid)},
                       {"K", ctx.sol.problem.K}};
        }
    } catch (const numerical_error& e) {
        json diag = {{"command", name}, {"error", "numerical"}, {"message", e.what()}, {"config", config_json(rc)}};
        std::cerr << diag.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << name << ": " << e.what() << "\n";
        return 1;
    }

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest;
    manifest["command"] = name;
    manifest["argv"] = std::vector<std::string>(argv, argv + argc);
    manifest["config"] = config_json(rc);
    manifest["versions"] = {{"algorithm", std::string(algorithm_revision)},
                            {"fftw", std::string(fftw_version)},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)}};
    manifest["wall_time_s"] = wall;
    manifest["results"] = results;
    if (!out.empty()) manifest["output"] = out;
    std::string text = manifest.dump(2) + "\n";
    std::cout << text;
    try {
        if (!manifest_path.empty()) write_atomic(manifest_path, text);
    } catch (const std::exception& e) {
        std::cerr << "cannot write manifest: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
