#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwi/estimate.hpp"
#include "gwi/models.hpp"
#include "gwi/series.hpp"

namespace gwi {

using Json = nlohmann::ordered_json;

/// Scientific notation with 10 significant digits (all probability output).
inline std::string sci10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9e", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Model <-> JSON, exact field names fixed here and in the README.
// ---------------------------------------------------------------------------

inline Json model_to_json(const Model& model) {
    Json j;
    if (const auto* m = std::get_if<HeavyModel>(&model)) {
        j["family"] = "heavy";
        j["nu"] = m->nu;
        j["delta"] = m->delta;
        j["c1"] = m->c1;
        j["c2"] = m->c2;
    } else if (const auto* v = std::get_if<VeryHeavyModel>(&model)) {
        j["family"] = "very_heavy";
        j["a"] = v->a;
        j["delta"] = v->delta;
        j["kappa"] = v->kappa;
        j["cc"] = v->cc;
        j["q0"] = v->q0;  // derived, emitted for reference
        j["p"] = v->p;
    } else {
        const auto& t = std::get<TabulatedModel>(model);
        j["family"] = "tabulated";
        j["xi_pmf"] = t.xi_pmf;
        j["eta_pmf"] = t.eta_pmf;
    }
    return j;
}

inline Model model_from_json(const Json& j) {
    std::string family = j.at("family").get<std::string>();
    if (family == "heavy")
        return make_heavy(j.at("nu").get<double>(), j.at("delta").get<double>(),
                          j.at("c1").get<double>(), j.at("c2").get<double>());
    if (family == "very_heavy")
        return make_very_heavy(j.at("a").get<double>(), j.at("delta").get<double>(),
                               j.at("kappa").get<double>(), j.at("cc").get<double>());
    if (family == "tabulated")
        return make_tabulated(j.at("xi_pmf").get<std::vector<double>>(),
                              j.at("eta_pmf").get<std::vector<double>>());
    throw ModelError("unknown model family '" + family + "'");
}

inline Json validation_to_json(const ValidationReport& rep) {
    Json j;
    j["ok"] = rep.ok;
    j["criticality_residual"] = rep.criticality_residual;
    Json checks = Json::array();
    for (const auto& c : rep.checks) {
        Json cj;
        cj["name"] = c.name;
        cj["passed"] = c.passed;
        cj["value"] = c.value;
        if (!c.detail.empty()) cj["detail"] = c.detail;
        if (!c.hard) cj["informational"] = true;
        checks.push_back(cj);
    }
    j["checks"] = checks;
    return j;
}

// ---------------------------------------------------------------------------
// CSV writers.  The timestamp header line is suppressible so byte-identical
// reruns are possible.
// ---------------------------------------------------------------------------

inline void write_csv_header(std::ostream& os, const std::string& command, bool timestamp) {
    if (timestamp) {
        std::time_t t = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof(buf), "%F %T", std::gmtime(&t));
        os << "# gwi " << command << " " << buf << "\n";
    }
}

inline void write_series_csv(std::ostream& os, const PowerSeries& s, const std::string& command,
                             bool timestamp = true) {
    write_csv_header(os, command, timestamp);
    os << "k,mass\n";
    for (std::size_t k = 0; k < s.coeffs.size(); ++k)
        os << k << "," << sci10(s.coeffs[k]) << "\n";
    os << "tail," << sci10(s.tail_mass) << "\n";
}

inline Json series_metadata_json(const PowerSeries& s) {
    Json j;
    j["n_points"] = s.n_points;
    j["radius"] = s.radius;
    j["tail_mass"] = s.tail_mass;
    j["trunc_bound"] = s.trunc_bound;
    j["worst_negative"] = s.worst_negative;
    j["max_imag"] = s.max_imag;
    return j;
}

inline void write_sweep_csv(std::ostream& os, const SweepReport& rep, bool timestamp = true) {
    write_csv_header(os, "validate " + rep.kind, timestamp);
    os << "x,p_hat,ci_lo,ci_hi,prediction,ratio,exact_lo,exact_hi,exact,ratio_exact\n";
    for (const auto& p : rep.points) {
        os << sci10(p.x) << ",";
        if (p.mc) {
            os << sci10(p.mc->p_hat) << "," << sci10(p.mc->ci_lo) << "," << sci10(p.mc->ci_hi);
        } else {
            os << ",,";
        }
        os << "," << sci10(p.prediction) << ",";
        if (p.ratio_mc) os << sci10(*p.ratio_mc);
        os << ",";
        if (p.exact_lo) os << sci10(*p.exact_lo);
        os << ",";
        if (p.exact_hi) os << sci10(*p.exact_hi);
        os << ",";
        if (p.exact) os << sci10(*p.exact);
        os << ",";
        if (p.ratio_exact) os << sci10(*p.ratio_exact);
        os << "\n";
    }
}

inline Json sweep_summary_json(const SweepReport& rep) {
    Json j;
    j["kind"] = rep.kind;
    if (rep.n > 0) j["n"] = rep.n;
    if (rep.kind != "stationary") {
        j["k1"] = rep.k1;
        j["k2"] = rep.k2;
    }
    j["x_lo"] = rep.x_lo;
    j["x_hi"] = rep.x_hi;
    j["grid_points"] = rep.points.size();
    j["reps"] = rep.reps;
    j["seed"] = rep.seed;
    if (rep.sup_err_exact) j["sup_err_exact"] = *rep.sup_err_exact;
    if (rep.sup_err_mc) j["sup_err_mc"] = *rep.sup_err_mc;
    j["abort_fraction"] = rep.abort_fraction;
    if (!rep.notes.empty()) j["notes"] = rep.notes;
    return j;
}

inline void write_prediction_csv(std::ostream& os, std::span<const double> xs,
                                 std::span<const double> preds, const std::string& provenance,
                                 bool timestamp = true) {
    write_csv_header(os, "predict", timestamp);
    os << "x,prediction,constant_provenance\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << sci10(xs[i]) << "," << sci10(preds[i]) << "," << provenance << "\n";
}

/// Writes to `path`, or to stdout when path is empty / "-".
inline void write_text_output(const std::string& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::fputs(body.c_str(), stdout);
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open output file " + path);
    os << body;
}

}  // namespace gwi
