#include "routh/constants.hpp"
#include "routh/critical_points.hpp"
#include "routh/errors.hpp"
#include "routh/expansion.hpp"
#include "routh/hamiltonian.hpp"
#include "routh/model.hpp"
#include "routh/reduction.hpp"
#include "routh/serialization.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace routh;

namespace {

json parse_json(const std::string& text, const char* what)
{
    try {
        return json::parse(text);
    } catch (const std::exception& e) {
        throw validation_error(std::string(what) + ": invalid JSON: " + e.what());
    }
}

CurvatureModel parse_model(const std::string& text)
{
    return model_from_json(parse_json(text, "model"));
}

std::string py_constants(int n)
{
    const UniversalConstants quad = compute_constants(n);
    const UniversalConstants closed = closed_form_constants(n);
    json out;
    out["quadrature"] = to_json(quad);
    out["closed_form"] = to_json(closed);
    out["max_rel_diff"] = max_rel_diff(quad, closed);
    return dump_g17(out);
}

std::string py_critical_points(const std::string& model_json, int m, int seeds,
                               std::uint64_t seed, int eig_index)
{
    const CurvatureModel model = parse_model(model_json);
    std::string notes;
    const std::vector<CriticalPointReport> pts =
        find_critical_points(model, m, seeds, seed, eig_index, notes);
    json out;
    out["count"] = static_cast<int>(pts.size());
    json arr = json::array();
    for (const CriticalPointReport& p : pts)
        arr.push_back(to_json(p));
    out["critical_points"] = std::move(arr);
    if (!notes.empty())
        out["note"] = notes;
    return dump_g17(out);
}

std::string py_configure(const std::string& model_json, double eps, int m, int crit_index,
                         int eig_index, int seeds, std::uint64_t seed, double C, double mu)
{
    const CurvatureModel model = parse_model(model_json);
    const UniversalConstants constants = closed_form_constants(model.n);
    std::string notes;
    const std::vector<CriticalPointReport> pts =
        find_critical_points(model, m, seeds, seed, eig_index, notes);
    if (pts.empty())
        throw regime_error("no cluster equilibrium available to configure around" +
                           (notes.empty() ? std::string() : " (" + notes + ")"));
    if (crit_index < 0 || crit_index >= static_cast<int>(pts.size()))
        throw validation_error("crit_index out of range");
    const CriticalPointReport& crit = pts[static_cast<std::size_t>(crit_index)];

    const BubbleEnsemble ens = assemble(model, crit, eps, ReducedVariables{}, C, mu);
    json out;
    out["gamma"] = solve_gamma(model, constants);
    out["concentration_scale"] = concentration_scale(model, constants);
    json linv = json::array();
    for (const Bubble& b : ens.bubbles)
        linv.push_back(1.0 / (b.lambda * eps));
    out["lambda_inv_over_eps"] = std::move(linv);
    out["critical_point"] = to_json(crit);
    out["ensemble"] = to_json(ens);
    out["m_eps"] = to_json(check_M_eps(ens, C, mu, model));
    if (!notes.empty())
        out["note"] = notes;
    return dump_g17(out);
}

double py_eval_hamiltonian(const std::string& model_json, const std::string& configuration_json)
{
    const CurvatureModel model = parse_model(model_json);
    const Configuration cfg =
        configuration_from_json(parse_json(configuration_json, "configuration"));
    return eval_F(model, cfg);
}

json vec_json(const Eigen::VectorXd& v)
{
    json arr = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k)
        arr.push_back(v[k]);
    return arr;
}

std::string py_verify_expansion(const std::string& model_json, const std::vector<double>& eps,
                                std::uint64_t samples, std::uint64_t seed, int m, int crit_index,
                                int eig_index, int seeds, double target_rel_err, int workers)
{
    const CurvatureModel model = parse_model(model_json);
    const UniversalConstants constants = closed_form_constants(model.n);
    std::string notes;
    const std::vector<CriticalPointReport> pts =
        find_critical_points(model, m, seeds, seed, eig_index, notes);
    if (pts.empty())
        throw regime_error("no cluster equilibrium available" +
                           (notes.empty() ? std::string() : " (" + notes + ")"));
    if (crit_index < 0 || crit_index >= static_cast<int>(pts.size()))
        throw validation_error("crit_index out of range");

    IntegratorSpec spec;
    spec.samples = samples;
    spec.seed = seed;
    spec.workers = workers;
    spec.target_rel_err = target_rel_err;
    const ExpansionVerification ver = verify_expansion(
        model, constants, pts[static_cast<std::size_t>(crit_index)], eps, spec);

    json out;
    json rows = json::array();
    for (const PairingReport& r : ver.rows) {
        json row;
        row["eps"] = r.eps;
        row["kind"] = pairing_kind_name(r.kind);
        row["bubble"] = r.bubble;
        row["analytic"] = vec_json(r.analytic);
        row["numeric"] = vec_json(r.numeric);
        row["stderr"] = vec_json(r.stderr_);
        row["abs_err"] = r.abs_err;
        row["rel_err"] = r.rel_err;
        row["leading_scale"] = r.leading_scale;
        row["stderr_ok"] = r.stderr_ok;
        row["npoints"] = r.npoints;
        rows.push_back(std::move(row));
    }
    out["rows"] = std::move(rows);
    json fits = json::array();
    for (const ExpansionFit& f : ver.fits) {
        json fit;
        fit["kind"] = pairing_kind_name(f.kind);
        fit["expected_order"] = f.expected_order;
        fit["order"] = f.fit.order;
        fit["ci95"] = f.fit.ci95;
        fit["intercept"] = f.fit.intercept;
        fit["points"] = f.fit.points;
        fits.push_back(std::move(fit));
    }
    out["fits"] = std::move(fits);
    return dump_g17(out);
}

std::string py_energy_near_point(const std::string& model_json, const std::string& ensemble_json,
                                 double radius, std::uint64_t samples, std::uint64_t seed,
                                 int workers)
{
    const CurvatureModel model = parse_model(model_json);
    const BubbleEnsemble ens = ensemble_from_json(parse_json(ensemble_json, "ensemble"));
    IntegratorSpec spec;
    spec.samples = samples;
    spec.seed = seed;
    spec.workers = workers;
    const EnergyEstimate e = energy_near_point(model, ens, radius, spec);
    json out;
    out["value"] = e.value;
    out["stderr"] = e.stderr_;
    out["npoints"] = e.npoints;
    return dump_g17(out);
}

} // namespace

PYBIND11_MODULE(_routh, mod)
{
    mod.doc() = "Bubble-cluster toolkit: universal constants, cluster equilibria, "
                "concentration ensembles, and verification of the gradient expansions. "
                "All structured arguments and results are JSON strings.";

    // Most-derived exceptions registered last so their translators win.
    py::register_exception<regime_error>(mod, "RegimeError", PyExc_RuntimeError);
    py::register_exception<numerical_error>(mod, "NumericalError", PyExc_RuntimeError);

    mod.def("constants", &py_constants, py::arg("n"),
            "Universal constants by quadrature and closed form, with their largest relative "
            "difference.");
    mod.def("critical_points", &py_critical_points, py::arg("model"), py::arg("m") = 2,
            py::arg("seeds") = 64, py::arg("seed") = 0, py::arg("eig_index") = -1,
            "Cluster equilibria: closed-form two-point construction merged with the deflated "
            "multi-start search.");
    mod.def("configure", &py_configure, py::arg("model"), py::arg("eps"), py::arg("m") = 2,
            py::arg("crit_index") = 0, py::arg("eig_index") = -1, py::arg("seeds") = 64,
            py::arg("seed") = 0, py::arg("C") = 10.0, py::arg("mu") = 0.5,
            "Assemble the concentration ensemble at a cluster equilibrium; includes the "
            "neighborhood margin report.");
    mod.def("eval_hamiltonian", &py_eval_hamiltonian, py::arg("model"), py::arg("configuration"),
            "Value of the cluster function at a configuration (JSON list of points).");
    mod.def("verify_expansion", &py_verify_expansion, py::arg("model"), py::arg("eps"),
            py::arg("samples") = 1000000, py::arg("seed") = 0, py::arg("m") = 2,
            py::arg("crit_index") = 0, py::arg("eig_index") = -1, py::arg("seeds") = 64,
            py::arg("target_rel_err") = 0.0, py::arg("workers") = 0,
            "Analytic-vs-numeric gradient pairings over an eps series, with scaling fits.");
    mod.def("energy_near_point", &py_energy_near_point, py::arg("model"), py::arg("ensemble"),
            py::arg("radius"), py::arg("samples") = 1000000, py::arg("seed") = 0,
            py::arg("workers") = 0,
            "Concentrated energy of the ensemble over a half-ball about the concentration "
            "point.");
    mod.def("convention_report", &convention_report,
            "The chart conventions baked into the analytic pairings, and how they were pinned.");
}
