// Python bindings for the numeric core. Structured inputs and outputs travel
// as plain lists and dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>
#include <vector>

#include "perish/backend.hpp"
#include "perish/config.hpp"
#include "perish/curves.hpp"
#include "perish/decay.hpp"
#include "perish/error.hpp"
#include "perish/synth.hpp"
#include "perish/theory.hpp"

namespace py = pybind11;
using namespace perish;

namespace {

std::vector<TimedValue> series(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw DataError("t and y differ in length");
    std::vector<TimedValue> out;
    for (std::size_t i = 0; i < t.size(); ++i) out.push_back({t[i], y[i]});
    return out;
}

DecayOptions options(bool clip, bool intercept) {
    DecayOptions o;
    o.clip_at_one = clip;
    o.intercept = intercept;
    return o;
}

theory::EquivalenceModel model_from(const py::dict& m) {
    const auto kind = m["model"].cast<std::string>();
    if (kind == "pure_exponential") return theory::EquivalenceModel::pure_exponential(m["mu"].cast<double>());
    if (kind == "drift_shift") {
        theory::DriftFunction d{m.contains("d_offset") ? m["d_offset"].cast<double>() : 0.0,
                                m["d_scale"].cast<double>(),
                                m.contains("d_power") ? m["d_power"].cast<double>() : 1.0};
        return theory::EquivalenceModel::drift_shift(m["a"].cast<double>(), m["b"].cast<double>(), d);
    }
    throw DataError("model must be 'pure_exponential' or 'drift_shift'");
}

py::dict curve_dict(const LearningCurveFit& f) {
    py::dict d;
    d["a"] = f.a;
    d["b"] = f.b;
    d["c"] = f.c;
    d["r2_log"] = f.r2_log;
    d["residual_sse"] = f.residual_sse;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "perishability toolkit core";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    // translators run newest first, so the subclass goes last
    const auto& fit = py::register_exception<FitError>(m, "FitError", PyExc_ArithmeticError);
    py::register_exception<SaturationError>(m, "SaturationError", fit.ptr());

    m.def(
        "fit_power_law",
        [](const std::vector<double>& sizes, const std::vector<double>& losses) {
            if (sizes.size() != losses.size()) throw DataError("sizes and losses differ in length");
            std::vector<LearningCurvePoint> pts;
            for (std::size_t i = 0; i < sizes.size(); ++i) pts.push_back({sizes[i], losses[i]});
            return curve_dict(fit_power_law(pts));
        },
        py::arg("sizes"), py::arg("losses"), "Fit loss = a n^-b + c in log space.");

    m.def(
        "invert_curve",
        [](double a, double b, double c, double loss) {
            LearningCurveFit f;
            f.a = a;
            f.b = b;
            f.c = c;
            return invert_curve(f, loss).size;
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("loss"), "Dataset size reaching `loss` on a native curve.");

    m.def(
        "effectiveness",
        [](double a, double b, double c, double native_size, double cross_loss) {
            LearningCurveFit f;
            f.a = a;
            f.b = b;
            f.c = c;
            f.backend_id = "py";
            EvalRecord r;
            r.job.subset_size = static_cast<std::size_t>(native_size);
            r.job.backend_id = "py";
            r.loss = cross_loss;
            return effective_size(r, f).effectiveness;
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("native_size"), py::arg("cross_loss"),
        "Effective size over native size of a model scoring `cross_loss` on a period with the given curve.");

    m.def(
        "fit_decay",
        [](const std::vector<double>& t, const std::vector<double>& y, bool clip, bool intercept) {
            const auto f = fit_exponential_decay(series(t, y), options(clip, intercept));
            py::dict d;
            d["mu"] = f.mu;
            d["std_error"] = f.std_error;
            d["p_value"] = f.p_value;
            d["intercept"] = f.intercept;
            d["half_life"] = f.half_life.text;
            d["n_points"] = f.n_points;
            return d;
        },
        py::arg("t"), py::arg("y"), py::arg("clip") = true, py::arg("intercept") = false);

    m.def("half_life", [](double mu, double cap) { return half_life(mu, cap).text; }, py::arg("mu"),
          py::arg("cap") = 100.0);

    m.def(
        "pairwise",
        [](const std::vector<double>& ti, const std::vector<double>& yi, const std::vector<double>& tj,
           const std::vector<double>& yj, bool clip) {
            const auto f = pairwise_decay_difference(series(ti, yi), series(tj, yj), options(clip, false));
            py::dict d;
            d["beta"] = f.beta;
            d["std_error"] = f.std_error;
            d["p_value"] = f.p_value;
            d["band"] = static_cast<int>(f.band);
            return d;
        },
        py::arg("t_i"), py::arg("y_i"), py::arg("t_j"), py::arg("y_j"), py::arg("clip") = true);

    m.def(
        "functional_form",
        [](const std::vector<double>& t, const std::vector<double>& y, bool clip) {
            return to_string(compare_functional_forms(series(t, y), options(clip, false)).verdict);
        },
        py::arg("t"), py::arg("y"), py::arg("clip") = true);

    m.def(
        "equivalent_size",
        [](const py::dict& model, double n, double age) { return model_from(model).equivalent_size(n, age); },
        py::arg("model"), py::arg("n"), py::arg("age"));

    m.def(
        "greedy_offload",
        [](const py::dict& model, double n, double window, const std::vector<double>& masses) {
            const theory::DatasetComposition comp{n, theory::SamplingDensity::from_masses(window, masses)};
            const auto r = theory::greedy_offload(comp, model_from(model));
            py::list steps;
            for (const auto& s : r.steps) {
                py::dict d;
                d["removed_mass"] = s.removed_mass;
                d["new_t_star"] = s.new_t_star;
                d["new_equivalent_size"] = s.new_equivalent_size;
                d["gain"] = s.gain;
                steps.append(d);
            }
            py::dict d;
            d["steps"] = steps;
            d["final_t_star"] = r.final_t_star;
            d["final_equivalent_size"] = r.final_equivalent_size;
            return d;
        },
        py::arg("model"), py::arg("n"), py::arg("window"), py::arg("masses"));

    m.def("entropy_rate", [](const synth::Matrix& p) { return synth::entropy_rate(p); }, py::arg("transition"));

    m.def(
        "validate_backend_result",
        [](const std::string& job_json, const std::string& result_json,
           const std::vector<std::string>& periods) -> std::pair<bool, std::string> {
            std::vector<PeriodId> expected;
            for (const auto& p : periods) expected.push_back(PeriodId::parse(p));
            const auto job = TrainJob::from_json(nlohmann::json::parse(job_json));
            nlohmann::json result;
            try {
                result = nlohmann::json::parse(result_json);
            } catch (const nlohmann::json::parse_error& e) {
                return {false, std::string("result is not JSON: ") + e.what()};
            }
            const auto o = parse_backend_result(job, result, expected);
            return {o.ok, o.failure};
        },
        py::arg("job"), py::arg("result"), py::arg("test_periods"),
        "Check a backend result JSON against the protocol; returns (ok, reason).");

    m.def("default_config", [] { return PipelineConfig{}.to_json().dump(); });
    m.def("config_hash", [](const std::string& text) { return PipelineConfig::from_json(nlohmann::json::parse(text)).hash(); },
          py::arg("config_json"));
}
