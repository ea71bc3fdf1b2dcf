#include "routh/serialization.hpp"

#include "routh/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace routh {
namespace {

std::string format_g17(double x)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

json vector_to_json(const Eigen::VectorXd& v)
{
    json arr = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k)
        arr.push_back(v[k]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what)
{
    if (!j.is_array())
        throw validation_error(std::string(what) + ": expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    Eigen::Index k = 0;
    for (const json& e : j) {
        if (!e.is_number())
            throw validation_error(std::string(what) + ": expected an array of numbers");
        v[k++] = e.get<double>();
    }
    return v;
}

const json& req(const json& j, const char* key, const char* what)
{
    auto it = j.find(key);
    if (it == j.end())
        throw validation_error(std::string(what) + ": missing field \"" + key + "\"");
    return *it;
}

double req_number(const json& j, const char* key, const char* what)
{
    const json& v = req(j, key, what);
    if (!v.is_number())
        throw validation_error(std::string(what) + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

int req_int(const json& j, const char* key, const char* what)
{
    const json& v = req(j, key, what);
    if (!v.is_number_integer())
        throw validation_error(std::string(what) + ": field \"" + key + "\" must be an integer");
    return v.get<int>();
}

// Recursive writer with %.17g floating-point cells.  Non-finite values are
// emitted as null, matching the library serializer.
void write_g17(const json& j, std::string& out, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    switch (j.type()) {
    case json::value_t::null:
        out += "null";
        return;
    case json::value_t::boolean:
        out += j.get<bool>() ? "true" : "false";
        return;
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
        out += j.dump();
        return;
    case json::value_t::number_float: {
        const double x = j.get<double>();
        if (!std::isfinite(x)) {
            out += "null";
            return;
        }
        out += format_g17(x);
        return;
    }
    case json::value_t::string:
        out += json(j.get<std::string>()).dump(); // JSON escaping
        return;
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        bool first = true;
        for (const json& e : j) {
            if (!first)
                out += ",\n";
            first = false;
            out += pad_in;
            write_g17(e, out, indent, depth + 1);
        }
        out += "\n" + pad + "]";
        return;
    }
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                out += ",\n";
            first = false;
            out += pad_in + json(it.key()).dump() + ": ";
            write_g17(it.value(), out, indent, depth + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    default:
        throw validation_error("dump_g17: unsupported JSON value type");
    }
}

} // namespace

json to_json(const CurvatureModel& model)
{
    json j;
    j["n"] = model.n;
    j["K_z"] = model.K_z;
    j["dK_dnu"] = model.dK_dnu;
    json h = json::array();
    for (Eigen::Index r = 0; r < model.hessK1.rows(); ++r)
        for (Eigen::Index c = 0; c < model.hessK1.cols(); ++c)
            h.push_back(model.hessK1(r, c));
    j["hessK1"] = std::move(h);
    return j;
}

CurvatureModel model_from_json(const json& j)
{
    if (!j.is_object())
        throw validation_error("model: expected a JSON object");
    const int n = req_int(j, "n", "model");
    if (n < 5)
        throw validation_error("model: dimension must satisfy n >= 5");
    const double K_z = req_number(j, "K_z", "model");
    const double dK_dnu = req_number(j, "dK_dnu", "model");
    const Eigen::VectorXd flat = vector_from_json(req(j, "hessK1", "model"), "model.hessK1");
    const Eigen::Index d = n - 1;
    if (flat.size() != d * d)
        throw validation_error("model: hessK1 must hold (n-1)^2 row-major entries");
    Eigen::MatrixXd H(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c)
            H(r, c) = flat[r * d + c];
    return make_curvature_model(n, K_z, dK_dnu, H);
}

json to_json(const Configuration& cfg)
{
    json arr = json::array();
    for (const Eigen::VectorXd& xi : cfg)
        arr.push_back(vector_to_json(xi));
    return arr;
}

Configuration configuration_from_json(const json& j)
{
    if (!j.is_array())
        throw validation_error("configuration: expected an array of points");
    Configuration cfg;
    cfg.reserve(j.size());
    for (const json& e : j)
        cfg.push_back(vector_from_json(e, "configuration point"));
    return cfg;
}

json to_json(const CriticalPointReport& report)
{
    json j;
    j["configuration"] = to_json(report.cfg);
    j["value"] = report.value;
    j["grad_norm"] = report.grad_norm;
    j["hessian_spectrum"] = report.hessian_spectrum;
    j["morse_index"] = report.morse_index;
    j["nondegenerate"] = report.nondegenerate;
    j["method"] = report.method;
    if (!report.notes.empty())
        j["notes"] = report.notes;
    return j;
}

CriticalPointReport critical_point_from_json(const json& j)
{
    if (!j.is_object())
        throw validation_error("critical point: expected a JSON object");
    CriticalPointReport r;
    r.cfg = configuration_from_json(req(j, "configuration", "critical point"));
    r.value = req_number(j, "value", "critical point");
    r.grad_norm = req_number(j, "grad_norm", "critical point");
    const json& spec = req(j, "hessian_spectrum", "critical point");
    if (!spec.is_array())
        throw validation_error("critical point: hessian_spectrum must be an array");
    for (const json& e : spec) {
        if (!e.is_number())
            throw validation_error("critical point: hessian_spectrum must hold numbers");
        r.hessian_spectrum.push_back(e.get<double>());
    }
    r.morse_index = req_int(j, "morse_index", "critical point");
    const json& nd = req(j, "nondegenerate", "critical point");
    if (!nd.is_boolean())
        throw validation_error("critical point: nondegenerate must be a boolean");
    r.nondegenerate = nd.get<bool>();
    const json& m = req(j, "method", "critical point");
    if (!m.is_string())
        throw validation_error("critical point: method must be a string");
    r.method = m.get<std::string>();
    if (j.contains("notes")) {
        if (!j["notes"].is_string())
            throw validation_error("critical point: notes must be a string");
        r.notes = j["notes"].get<std::string>();
    }
    return r;
}

json to_json(const UniversalConstants& constants)
{
    json j;
    j["n"] = constants.n;
    j["c0"] = constants.c0;
    j["p"] = constants.p;
    j["S_n"] = constants.S_n;
    j["c2"] = constants.c2;
    j["c3"] = constants.c3;
    j["c4"] = constants.c4;
    j["c5"] = constants.c5;
    j["cbar"] = constants.cbar;
    return j;
}

json to_json(const Bubble& b)
{
    json j;
    j["center"] = vector_to_json(b.center);
    j["lambda"] = b.lambda;
    return j;
}

json to_json(const BubbleEnsemble& ens)
{
    json j;
    j["n"] = ens.n;
    j["eps"] = ens.eps;
    j["z"] = vector_to_json(ens.z);
    json bubbles = json::array();
    for (const Bubble& b : ens.bubbles)
        bubbles.push_back(to_json(b));
    j["bubbles"] = std::move(bubbles);
    j["alphas"] = ens.alphas;
    return j;
}

BubbleEnsemble ensemble_from_json(const json& j)
{
    if (!j.is_object())
        throw validation_error("ensemble: expected a JSON object");
    BubbleEnsemble ens;
    ens.n = req_int(j, "n", "ensemble");
    ens.eps = req_number(j, "eps", "ensemble");
    ens.z = vector_from_json(req(j, "z", "ensemble"), "ensemble.z");
    const json& bubbles = req(j, "bubbles", "ensemble");
    if (!bubbles.is_array())
        throw validation_error("ensemble: bubbles must be an array");
    for (const json& e : bubbles) {
        if (!e.is_object())
            throw validation_error("ensemble: each bubble must be an object");
        Bubble b;
        b.center = vector_from_json(req(e, "center", "bubble"), "bubble.center");
        b.lambda = req_number(e, "lambda", "bubble");
        ens.bubbles.push_back(std::move(b));
    }
    const json& alphas = req(j, "alphas", "ensemble");
    if (!alphas.is_array())
        throw validation_error("ensemble: alphas must be an array");
    for (const json& e : alphas) {
        if (!e.is_number())
            throw validation_error("ensemble: alphas must hold numbers");
        ens.alphas.push_back(e.get<double>());
    }
    return ens;
}

json to_json(const MEpsEntry& entry)
{
    json j;
    j["constraint"] = entry.constraint;
    j["i"] = entry.i;
    j["j"] = entry.j;
    j["lhs"] = entry.lhs;
    j["rhs"] = entry.rhs;
    j["margin"] = entry.margin;
    j["satisfied"] = entry.satisfied;
    return j;
}

json to_json(const MEpsReport& report)
{
    json j;
    j["ok"] = report.ok;
    json entries = json::array();
    for (const MEpsEntry& e : report.entries)
        entries.push_back(to_json(e));
    j["entries"] = std::move(entries);
    json violations = json::array();
    for (const MEpsEntry& e : report.violations)
        violations.push_back(to_json(e));
    j["violations"] = std::move(violations);
    return j;
}

std::string dump_g17(const json& j, int indent)
{
    std::string out;
    write_g17(j, out, indent, 0);
    return out;
}

std::string csv_cell(double x)
{
    return format_g17(x);
}

std::string csv_row(const std::vector<std::string>& cells)
{
    std::string out;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k)
            out += ',';
        out += cells[k];
    }
    out += '\n';
    return out;
}

} // namespace routh
