#include "routh/constants.hpp"
#include "routh/critical_points.hpp"
#include "routh/errors.hpp"
#include "routh/expansion.hpp"
#include "routh/hamiltonian.hpp"
#include "routh/model.hpp"
#include "routh/reduction.hpp"
#include "routh/serialization.hpp"

#include "CLI11.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace routh;

// Record of one invocation: the command, its inputs, and where the output
// went.  Parameters are kept as pre-formatted strings in insertion order so
// repeated runs serialize identically.
struct RunManifest {
    std::string command;
    std::string model_path = "-";
    std::vector<std::pair<std::string, std::string>> parameters;
    std::string output_path = "-";
};

json manifest_json(const RunManifest& man)
{
    json j;
    j["command"] = man.command;
    j["model_path"] = man.model_path;
    json params = json::object();
    for (const auto& kv : man.parameters)
        params[kv.first] = kv.second;
    j["parameters"] = std::move(params);
    j["output_path"] = man.output_path;
    return j;
}

// CSV outputs carry the manifest as a single leading comment line
// (semicolon-separated so the data columns stay the only commas).
std::string manifest_comment(const RunManifest& man)
{
    std::string s = "# manifest command=" + man.command + ";model_path=" + man.model_path;
    for (const auto& kv : man.parameters)
        s += ";" + kv.first + "=" + kv.second;
    s += ";output_path=" + man.output_path + "\n";
    return s;
}

std::string fmt_int(std::int64_t v) { return std::to_string(v); }

CurvatureModel read_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw validation_error("cannot read model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw validation_error("invalid model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

void write_output(const std::string& path, const std::string& content)
{
    if (path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw validation_error("cannot open output file: " + path);
    out << content;
    if (!out)
        throw validation_error("failed writing output file: " + path);
}

int cmd_constants(int n, const std::string& out_path)
{
    RunManifest man;
    man.command = "constants";
    man.parameters = {{"n", fmt_int(n)}};
    man.output_path = out_path;

    const UniversalConstants quad = compute_constants(n);
    const UniversalConstants closed = closed_form_constants(n);

    json out;
    out["manifest"] = manifest_json(man);
    out["quadrature"] = to_json(quad);
    out["closed_form"] = to_json(closed);
    out["max_rel_diff"] = max_rel_diff(quad, closed);
    write_output(out_path, dump_g17(out) + "\n");
    return 0;
}

int cmd_critical_points(const std::string& model_path, int m, int seeds, std::uint64_t seed,
                        int eig_index, const std::string& out_path)
{
    RunManifest man;
    man.command = "critical-points";
    man.model_path = model_path;
    man.parameters = {{"m", fmt_int(m)},
                      {"seeds", fmt_int(seeds)},
                      {"seed", fmt_int(static_cast<std::int64_t>(seed))},
                      {"eig_index", fmt_int(eig_index)}};
    man.output_path = out_path;

    const CurvatureModel model = read_model(model_path);
    std::string note;
    const std::vector<CriticalPointReport> pts =
        find_critical_points(model, m, seeds, seed, eig_index, note);

    json out;
    out["manifest"] = manifest_json(man);
    out["count"] = static_cast<int>(pts.size());
    json arr = json::array();
    for (const CriticalPointReport& p : pts)
        arr.push_back(to_json(p));
    out["critical_points"] = std::move(arr);
    if (!note.empty())
        out["note"] = note;
    write_output(out_path, dump_g17(out) + "\n");
    return 0;
}

int cmd_configure(const std::string& model_path, int m, double eps, int crit_index, int eig_index,
                  int seeds, std::uint64_t seed, double C, double mu, const std::string& out_path)
{
    RunManifest man;
    man.command = "configure";
    man.model_path = model_path;
    man.parameters = {{"m", fmt_int(m)},          {"eps", csv_cell(eps)},
                      {"crit_index", fmt_int(crit_index)}, {"eig_index", fmt_int(eig_index)},
                      {"seeds", fmt_int(seeds)},  {"seed", fmt_int(static_cast<std::int64_t>(seed))},
                      {"C", csv_cell(C)},         {"mu", csv_cell(mu)}};
    man.output_path = out_path;

    const CurvatureModel model = read_model(model_path);
    const UniversalConstants constants = closed_form_constants(model.n);

    std::string note;
    const std::vector<CriticalPointReport> pts =
        find_critical_points(model, m, seeds, seed, eig_index, note);
    if (pts.empty())
        throw regime_error("no cluster equilibrium available to configure around" +
                           (note.empty() ? std::string() : " (" + note + ")"));
    if (crit_index < 0 || crit_index >= static_cast<int>(pts.size()))
        throw validation_error("crit_index out of range: " + fmt_int(crit_index) + " with " +
                               fmt_int(static_cast<std::int64_t>(pts.size())) +
                               " critical points available");
    const CriticalPointReport& crit = pts[static_cast<std::size_t>(crit_index)];

    const BubbleEnsemble ens = assemble(model, crit, eps, ReducedVariables{}, C, mu);
    const double gamma = solve_gamma(model, constants);
    const double c_l = concentration_scale(model, constants);
    const MEpsReport m_eps = check_M_eps(ens, C, mu, model);

    json out;
    out["manifest"] = manifest_json(man);
    out["gamma"] = gamma;
    out["concentration_scale"] = c_l;
    json linv = json::array();
    for (const Bubble& b : ens.bubbles)
        linv.push_back(1.0 / (b.lambda * eps));
    out["lambda_inv_over_eps"] = std::move(linv);
    out["critical_point"] = to_json(crit);
    out["ensemble"] = to_json(ens);
    out["m_eps"] = to_json(m_eps);
    if (!note.empty())
        out["note"] = note;
    write_output(out_path, dump_g17(out) + "\n");
    return 0;
}

std::vector<double> parse_eps_list(const std::string& arg)
{
    std::vector<double> eps;
    std::size_t pos = 0;
    while (pos <= arg.size()) {
        std::size_t comma = arg.find(',', pos);
        if (comma == std::string::npos)
            comma = arg.size();
        std::string tok = arg.substr(pos, comma - pos);
        // trim spaces
        const std::size_t b = tok.find_first_not_of(" \t");
        const std::size_t e = tok.find_last_not_of(" \t");
        if (b == std::string::npos) {
            if (!(pos == 0 && comma == arg.size())) // lone empty token inside a list
                throw validation_error("empty entry in eps list");
        } else {
            tok = tok.substr(b, e - b + 1);
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                if (used != tok.size())
                    throw std::invalid_argument("trailing characters");
                eps.push_back(v);
            } catch (const std::exception&) {
                throw validation_error("invalid eps value: \"" + tok + "\"");
            }
        }
        if (comma == arg.size())
            break;
        pos = comma + 1;
    }
    if (eps.empty())
        throw validation_error("the eps list must contain at least one value");
    return eps;
}

int cmd_verify_expansion(const std::string& model_path, const std::string& eps_arg,
                         std::uint64_t samples, std::uint64_t seed, int m, int crit_index,
                         int eig_index, int seeds, double target_rel_err, int workers,
                         const std::string& out_path)
{
    RunManifest man;
    man.command = "verify-expansion";
    man.model_path = model_path;
    man.parameters = {{"eps", eps_arg},
                      {"samples", fmt_int(static_cast<std::int64_t>(samples))},
                      {"seed", fmt_int(static_cast<std::int64_t>(seed))},
                      {"m", fmt_int(m)},
                      {"crit_index", fmt_int(crit_index)},
                      {"eig_index", fmt_int(eig_index)},
                      {"seeds", fmt_int(seeds)},
                      {"target_rel_err", csv_cell(target_rel_err)}};
    man.output_path = out_path;

    const std::vector<double> eps_list = parse_eps_list(eps_arg);
    const CurvatureModel model = read_model(model_path);
    const UniversalConstants constants = closed_form_constants(model.n);

    std::string note;
    const std::vector<CriticalPointReport> pts =
        find_critical_points(model, m, seeds, seed, eig_index, note);
    if (pts.empty())
        throw regime_error("no cluster equilibrium available" +
                           (note.empty() ? std::string() : " (" + note + ")"));
    if (crit_index < 0 || crit_index >= static_cast<int>(pts.size()))
        throw validation_error("crit_index out of range");
    const CriticalPointReport& crit = pts[static_cast<std::size_t>(crit_index)];

    IntegratorSpec spec;
    spec.method = IntegratorSpec::Method::importance_mc;
    spec.samples = samples;
    spec.seed = seed;
    spec.workers = workers;
    spec.target_rel_err = target_rel_err;

    const ExpansionVerification ver = verify_expansion(model, constants, crit, eps_list, spec);

    std::string csv = manifest_comment(man);
    csv += "eps,kind,analytic,numeric,stderr,residual,stderr_ok,fitted_order\n";
    int missed = 0;
    // Rows arrive eps-major, then kind, then bubble; pool bubbles so the
    // table has one row per (eps, kind), with vector blocks combined in
    // quadrature.
    std::size_t k = 0;
    while (k < ver.rows.size()) {
        const double eps = ver.rows[k].eps;
        const PairingKind kind = ver.rows[k].kind;
        double a2 = 0.0, n2 = 0.0, s2 = 0.0, r2 = 0.0;
        bool ok = true;
        while (k < ver.rows.size() && ver.rows[k].eps == eps && ver.rows[k].kind == kind) {
            const PairingReport& row = ver.rows[k];
            a2 += row.analytic.squaredNorm();
            n2 += row.numeric.squaredNorm();
            s2 += row.stderr_.squaredNorm();
            r2 += row.abs_err * row.abs_err;
            ok = ok && row.stderr_ok;
            ++k;
        }
        if (!ok)
            ++missed;
        csv += csv_row({csv_cell(eps), pairing_kind_name(kind), csv_cell(std::sqrt(a2)),
                        csv_cell(std::sqrt(n2)), csv_cell(std::sqrt(s2)), csv_cell(std::sqrt(r2)),
                        ok ? "1" : "0", ""});
    }
    for (const ExpansionFit& fit : ver.fits) {
        csv += csv_row({"fit", pairing_kind_name(fit.kind), csv_cell(fit.expected_order),
                        csv_cell(fit.fit.order), csv_cell(fit.fit.ci95), "", "",
                        csv_cell(fit.fit.order) + " ± " + csv_cell(fit.fit.ci95)});
    }
    write_output(out_path, csv);
    if (missed > 0)
        std::cerr << "warning: " << missed
                  << " row(s) missed the standard-error target; see the stderr_ok column\n";
    return 0;
}

struct PlaneSpec {
    Configuration base;
    Eigen::VectorXd dir1; // stacked m(n-1) directions
    Eigen::VectorXd dir2;
};

PlaneSpec auto_plane(const CurvatureModel& model, int m, int eig_index)
{
    if (m != 2)
        throw validation_error(
            "the automatic plane requires m = 2 (closed-form base point); pass --plane FILE");
    int idx = eig_index;
    if (idx < 0) {
        idx = auto_eig_index(model);
        if (idx < 0)
            throw validation_error("no simple positive eigenvalue of hessK1; pass --eig-index");
    }
    const CriticalPointReport crit = closed_form_m2(model, idx);

    const Eigen::MatrixXd H = hess_F(model, crit.cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success)
        throw numerical_error("eigendecomposition of the cluster Hessian failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const int dim = static_cast<int>(ev.size());
    std::vector<int> order(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(ev[a]) < std::abs(ev[b]); });
    int neg = -1, pos = -1;
    for (int i : order) {
        if (ev[i] < 0.0 && neg < 0)
            neg = i;
        if (ev[i] > 0.0 && pos < 0)
            pos = i;
        if (neg >= 0 && pos >= 0)
            break;
    }
    PlaneSpec plane;
    plane.base = crit.cfg;
    if (neg >= 0 && pos >= 0) {
        // Flattest descending direction first, flattest ascending second, so
        // a saddle shows as: F decreases along s, increases along t.
        plane.dir1 = es.eigenvectors().col(neg);
        plane.dir2 = es.eigenvectors().col(pos);
    } else {
        plane.dir1 = es.eigenvectors().col(order[0]);
        plane.dir2 = es.eigenvectors().col(order[1]);
    }
    return plane;
}

PlaneSpec plane_from_file(const CurvatureModel& model, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw validation_error("cannot read plane file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw validation_error("invalid plane file " + path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("base") || !j.contains("dir1") || !j.contains("dir2"))
        throw validation_error("plane file must provide \"base\", \"dir1\", and \"dir2\"");
    PlaneSpec plane;
    plane.base = configuration_from_json(j["base"]);
    validate_configuration(model, plane.base);
    const Configuration d1 = configuration_from_json(j["dir1"]);
    const Configuration d2 = configuration_from_json(j["dir2"]);
    if (d1.size() != plane.base.size() || d2.size() != plane.base.size())
        throw validation_error("plane directions must have as many points as the base");
    for (const Eigen::VectorXd& p : d1)
        if (p.size() != model.dim())
            throw validation_error("plane direction points must lie in R^{n-1}");
    for (const Eigen::VectorXd& p : d2)
        if (p.size() != model.dim())
            throw validation_error("plane direction points must lie in R^{n-1}");
    plane.dir1 = stack(d1);
    plane.dir2 = stack(d2);
    return plane;
}

int cmd_landscape(const std::string& model_path, int m, const std::string& plane_arg,
                  int eig_index, int ns, int nt, double smin, double smax, double tmin,
                  double tmax, double guard, const std::string& out_path)
{
    RunManifest man;
    man.command = "landscape";
    man.model_path = model_path;
    man.parameters = {{"m", fmt_int(m)},       {"plane", plane_arg},
                      {"eig_index", fmt_int(eig_index)},
                      {"ns", fmt_int(ns)},     {"nt", fmt_int(nt)},
                      {"smin", csv_cell(smin)}, {"smax", csv_cell(smax)},
                      {"tmin", csv_cell(tmin)}, {"tmax", csv_cell(tmax)},
                      {"guard", csv_cell(guard)}};
    man.output_path = out_path;

    if (ns < 1 || nt < 1)
        throw validation_error("grid sizes must be at least 1");
    if (!(guard >= 0.0))
        throw validation_error("guard must be non-negative");

    const CurvatureModel model = read_model(model_path);
    const PlaneSpec plane = (plane_arg == "auto") ? auto_plane(model, m, eig_index)
                                                  : plane_from_file(model, plane_arg);
    const int mm = static_cast<int>(plane.base.size());
    const Eigen::VectorXd base = stack(plane.base);

    std::string csv = manifest_comment(man);
    csv += "s,t,F,singular\n";
    int regular_cells = 0;
    for (int is = 0; is < ns; ++is) {
        const double s = (ns == 1) ? smin : smin + (smax - smin) * is / (ns - 1);
        for (int it = 0; it < nt; ++it) {
            const double t = (nt == 1) ? tmin : tmin + (tmax - tmin) * it / (nt - 1);
            const Eigen::VectorXd v = base + s * plane.dir1 + t * plane.dir2;
            const Configuration cfg = unstack(v, mm, model.dim());
            if (mm > 1 && min_separation(cfg) < guard) {
                csv += csv_row({csv_cell(s), csv_cell(t), "", "1"});
                continue;
            }
            const double F = eval_F(model, cfg);
            csv += csv_row({csv_cell(s), csv_cell(t), csv_cell(F), "0"});
            ++regular_cells;
        }
    }
    if (regular_cells == 0)
        throw numerical_error("the requested slice contains only singular configurations");
    write_output(out_path, csv);
    return 0;
}

int guarded(const std::function<int()>& fn)
{
    try {
        return fn();
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const regime_error& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bubble-cluster toolkit: universal constants, cluster equilibria, "
                 "concentration ensembles, and numerical verification of the gradient "
                 "expansions on the half-space"};
    app.require_subcommand(1);

    // constants
    int n = 5;
    std::string const_out = "-";
    CLI::App* sc_constants =
        app.add_subcommand("constants", "Universal constants by quadrature and by closed form");
    sc_constants->add_option("--n", n, "Ambient dimension (n >= 5)")->required();
    sc_constants->add_option("--output,-o", const_out, "Output path ('-' for stdout)");

    // critical-points
    std::string cp_model, cp_out = "-";
    int cp_m = 2, cp_seeds = 64, cp_eig = -1;
    std::uint64_t cp_seed = 0;
    CLI::App* sc_cp = app.add_subcommand(
        "critical-points", "Find cluster equilibria (closed form plus deflated multi-start)");
    sc_cp->add_option("--model", cp_model, "Model JSON file")->required();
    sc_cp->add_option("--m", cp_m, "Number of cluster points (default 2)");
    sc_cp->add_option("--seeds", cp_seeds, "Number of random starts (default 64)");
    sc_cp->add_option("--seed", cp_seed, "RNG seed (default 0)");
    sc_cp->add_option("--eig-index", cp_eig,
                      "Eigenvalue index (ascending) for the closed-form two-point construction; "
                      "-1 selects the largest simple positive eigenvalue");
    sc_cp->add_option("--output,-o", cp_out, "Output path ('-' for stdout)");

    // configure
    std::string cf_model, cf_out = "-";
    int cf_m = 2, cf_crit = 0, cf_eig = -1, cf_seeds = 64;
    std::uint64_t cf_seed = 0;
    double cf_eps = 0.0, cf_C = 10.0, cf_mu = 0.5;
    CLI::App* sc_cf = app.add_subcommand(
        "configure", "Assemble the concentration ensemble at a cluster equilibrium");
    sc_cf->add_option("--model", cf_model, "Model JSON file")->required();
    sc_cf->add_option("--m", cf_m, "Number of bubbles (default 2)");
    sc_cf->add_option("--eps", cf_eps, "Subcritical parameter in (0,1)")->required();
    sc_cf->add_option("--crit-index", cf_crit, "Index into the sorted critical-point list");
    sc_cf->add_option("--eig-index", cf_eig, "Closed-form eigenvalue index; -1 auto");
    sc_cf->add_option("--seeds", cf_seeds, "Number of random starts (default 64)");
    sc_cf->add_option("--seed", cf_seed, "RNG seed (default 0)");
    sc_cf->add_option("--C", cf_C, "Neighborhood rate/separation constant (default 10)");
    sc_cf->add_option("--mu", cf_mu, "Neighborhood center-offset bound (default 0.5)");
    sc_cf->add_option("--output,-o", cf_out, "Output path ('-' for stdout)");

    // verify-expansion
    std::string ve_model, ve_eps, ve_out = "-";
    std::uint64_t ve_samples = 1000000, ve_seed = 0;
    int ve_m = 2, ve_crit = 0, ve_eig = -1, ve_seeds = 64, ve_workers = 0;
    double ve_target = 0.01;
    CLI::App* sc_ve = app.add_subcommand(
        "verify-expansion",
        "Compare analytic gradient pairings with Monte Carlo integrals over an eps series");
    sc_ve->add_option("--model", ve_model, "Model JSON file")->required();
    sc_ve->add_option("--eps", ve_eps, "Comma-separated eps list, e.g. 1e-2,3e-3,1e-3")
        ->required();
    sc_ve->add_option("--samples", ve_samples, "Monte Carlo points per integral (default 1e6)");
    sc_ve->add_option("--seed", ve_seed, "RNG seed (default 0)");
    sc_ve->add_option("--m", ve_m, "Number of bubbles (default 2)");
    sc_ve->add_option("--crit-index", ve_crit, "Index into the sorted critical-point list");
    sc_ve->add_option("--eig-index", ve_eig, "Closed-form eigenvalue index; -1 auto");
    sc_ve->add_option("--seeds", ve_seeds, "Number of random starts (default 64)");
    sc_ve->add_option("--target-rel-err", ve_target,
                      "Standard-error target relative to the leading analytic scale "
                      "(default 0.01; misses are reported per row, never fatal)");
    sc_ve->add_option("--workers", ve_workers,
                      "Worker threads (0: ROUTH_WORKERS or hardware; never affects values)");
    sc_ve->add_option("--output,-o", ve_out, "Output path ('-' for stdout)");

    // landscape
    std::string ls_model, ls_plane = "auto", ls_out = "-";
    int ls_m = 2, ls_eig = -1, ls_ns = 21, ls_nt = 21;
    double ls_smin = -1.0, ls_smax = 1.0, ls_tmin = -1.0, ls_tmax = 1.0, ls_guard = 1e-8;
    CLI::App* sc_ls = app.add_subcommand(
        "landscape", "Sample the cluster function on a 2D affine slice of configuration space");
    sc_ls->add_option("--model", ls_model, "Model JSON file")->required();
    sc_ls->add_option("--m", ls_m, "Number of cluster points (auto plane requires 2)");
    sc_ls->add_option("--plane", ls_plane,
                      "'auto' (slice through the closed-form two-point equilibrium along its "
                      "flattest descending and ascending Hessian directions) or a JSON file "
                      "with base/dir1/dir2 configurations");
    sc_ls->add_option("--eig-index", ls_eig, "Closed-form eigenvalue index; -1 auto");
    sc_ls->add_option("--ns", ls_ns, "Grid points along s (default 21)");
    sc_ls->add_option("--nt", ls_nt, "Grid points along t (default 21)");
    sc_ls->add_option("--smin", ls_smin, "s range start (default -1)");
    sc_ls->add_option("--smax", ls_smax, "s range end (default 1)");
    sc_ls->add_option("--tmin", ls_tmin, "t range start (default -1)");
    sc_ls->add_option("--tmax", ls_tmax, "t range end (default 1)");
    sc_ls->add_option("--guard", ls_guard,
                      "Separation below which a cell is marked singular (default 1e-8)");
    sc_ls->add_option("--output,-o", ls_out, "Output path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (*sc_constants)
        return guarded([&] { return cmd_constants(n, const_out); });
    if (*sc_cp)
        return guarded([&] {
            return cmd_critical_points(cp_model, cp_m, cp_seeds, cp_seed, cp_eig, cp_out);
        });
    if (*sc_cf)
        return guarded([&] {
            return cmd_configure(cf_model, cf_m, cf_eps, cf_crit, cf_eig, cf_seeds, cf_seed, cf_C,
                                 cf_mu, cf_out);
        });
    if (*sc_ve)
        return guarded([&] {
            return cmd_verify_expansion(ve_model, ve_eps, ve_samples, ve_seed, ve_m, ve_crit,
                                        ve_eig, ve_seeds, ve_target, ve_workers, ve_out);
        });
    if (*sc_ls)
        return guarded([&] {
            return cmd_landscape(ls_model, ls_m, ls_plane, ls_eig, ls_ns, ls_nt, ls_smin, ls_smax,
                                 ls_tmin, ls_tmax, ls_guard, ls_out);
        });
    std::cerr << "error: no subcommand selected\n";
    return 2;
}
