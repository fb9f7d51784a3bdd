#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "plab/decay.hpp"
#include "plab/energy.hpp"
#include "plab/experiment.hpp"
#include "plab/geometry.hpp"
#include "plab/process.hpp"
#include "plab/wave.hpp"

#include <sstream>

namespace py = pybind11;
using namespace plab;

namespace {

std::string membership_name(Membership m) {
    switch (m) {
        case Membership::CertifiedDecay: return "certified-decay";
        case Membership::Refuted: return "refuted";
        case Membership::Inconclusive: return "inconclusive";
    }
    return "?";
}

MembershipProbe probe_from_kwargs(const std::vector<double>& alphas,
                                  const std::vector<double>& t_anchors, double tau_max,
                                  double s_grid_density, double tol, double window) {
    MembershipProbe p;
    if (!alphas.empty()) p.alphas = alphas;
    if (!t_anchors.empty()) p.t_anchors = t_anchors;
    p.tau_max = tau_max;
    p.s_grid_density = s_grid_density;
    p.tol = tol;
    p.window = window;
    return p;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "pullback-lab core: decay-class calculus, point-cloud geometry, and the "
              "dissipative wave benchmark";

    py::register_exception<DecayError>(m, "DecayError");
    py::register_exception<GeometryError>(m, "GeometryError");
    py::register_exception<ProcessError>(m, "ProcessError");
    py::register_exception<ModelError>(m, "ModelError");

    // --- decay functions -----------------------------------------------------
    py::class_<DecayFunction>(m, "DecayFunction")
        .def_static("from_expression",
                    [](const std::string& s) { return DecayFunction::from_expression(s); })
        .def_static("constant", &DecayFunction::constant)
        .def_static("from_table",
                    [](std::vector<double> t, std::vector<double> v, const std::string& d) {
                        return DecayFunction::from_table(std::move(t), std::move(v), d);
                    })
        .def("__call__", [](const DecayFunction& f, double t) { return f(t); })
        .def_property_readonly("description", &DecayFunction::description)
        .def_property_readonly("tabulated", &DecayFunction::is_tabulated);

    m.def(
        "combine",
        [](const DecayFunction& a, const DecayFunction& b, const std::string& op) {
            return combine(a, b, op == "sum" ? CombineOp::Sum : CombineOp::Product);
        },
        py::arg("r1"), py::arg("r2"), py::arg("op"));
    m.def("scale_sqrt", &scale_sqrt, py::arg("r"), py::arg("c"), py::arg("take_sqrt"));
    m.def(
        "membership_check",
        [](const DecayFunction& r, std::vector<double> alphas, std::vector<double> t_anchors,
           double tau_max, double s_grid_density, double tol, double window) {
            const auto verdict = membership_check(
                r, probe_from_kwargs(alphas, t_anchors, tau_max, s_grid_density, tol, window));
            py::dict out;
            out["status"] = membership_name(verdict.status);
            out["overflow"] = verdict.overflow;
            out["summary"] = verdict.summary;
            return out;
        },
        py::arg("r"), py::arg("alphas") = std::vector<double>{},
        py::arg("t_anchors") = std::vector<double>{}, py::arg("tau_max") = 200.0,
        py::arg("s_grid_density") = 2.0, py::arg("tol") = 1e-6, py::arg("window") = 100.0);
    m.def("exp_integral_transform", &exp_integral_transform, py::arg("delta"), py::arg("eta"),
          py::arg("cutoff"), py::arg("quadrature_step"), py::arg("t_lo"), py::arg("t_hi"),
          py::arg("t_step"));
    m.def("window_sup_transform", &window_sup_transform, py::arg("delta"), py::arg("T"),
          py::arg("ell_grid_density"), py::arg("s_lo"), py::arg("s_hi"), py::arg("s_step"));

    // --- point clouds ---------------------------------------------------------
    py::class_<PointCloud>(m, "PointCloud")
        .def(py::init([](std::vector<std::vector<double>> pts, const std::string& label) {
                 PointCloud c;
                 c.points = std::move(pts);
                 c.label = label;
                 c.validate();
                 return c;
             }),
             py::arg("points"), py::arg("label") = "")
        .def_property_readonly("points", [](const PointCloud& c) { return c.points; })
        .def_readwrite("label", &PointCloud::label)
        .def("__len__", [](const PointCloud& c) { return c.size(); });

    m.def("hausdorff_semidist", &hausdorff_semidist);
    m.def("diameter", &diameter);
    m.def("neighborhood_inflate", &neighborhood_inflate, py::arg("cloud"), py::arg("r"),
          py::arg("directions_per_point"));
    m.def("ball_measure_upper", &ball_measure_upper, py::arg("cloud"), py::arg("tol"),
          py::arg("center_cap") = kGreedyCenterCap);
    m.def("ball_measure_exact", &ball_measure_exact, py::arg("cloud"), py::arg("k_max"));
    m.def(
        "kappa_bounds",
        [](const PointCloud& c, double tol, std::size_t cap) {
            const auto kb = kappa_bounds(c, tol, cap);
            return std::make_pair(kb.lower, kb.upper);
        },
        py::arg("cloud"), py::arg("tol") = 1e-9, py::arg("center_cap") = 8);

    // --- rate fitting ----------------------------------------------------------
    py::class_<RateFit>(m, "RateFit")
        .def_readonly("C_hat", &RateFit::C_hat)
        .def_readonly("omega_hat", &RateFit::omega_hat)
        .def_readonly("residual", &RateFit::residual)
        .def_readonly("floored", &RateFit::floored);
    m.def("fit_exponential_rate", &fit_exponential_rate);

    // --- wave model --------------------------------------------------------------
    py::class_<ModelSpec>(m, "ModelSpec")
        .def_static("default_benchmark", &default_benchmark)
        .def_static("load", &ModelSpec::load)
        .def_static("from_json_text", &ModelSpec::from_json_text)
        .def("to_json", &ModelSpec::to_json)
        .def("save", &ModelSpec::save)
        .def_property_readonly("lambda1", &ModelSpec::lambda1)
        .def_property_readonly("h0", &ModelSpec::h0)
        .def_property_readonly("K0", &ModelSpec::K0)
        .def_readonly("n_modes", &ModelSpec::n_modes)
        .def_readonly("dt", &ModelSpec::dt)
        .def_readonly("name", &ModelSpec::name);
    m.def("benchmark_with_H3_violated", &benchmark_with_H3_violated);
    m.def("benchmark_with_H4_violated", &benchmark_with_H4_violated);
    m.def("benchmark_with_H6_violated", &benchmark_with_H6_violated);

    m.def(
        "validate_hypotheses",
        [](const ModelSpec& spec, double mu0, double v_box) {
            const auto rep = validate_hypotheses(spec, mu0, v_box, default_t_probes());
            py::dict out;
            out["ok"] = rep.ok;
            out["h1"] = rep.h1;
            out["h2"] = rep.h2;
            out["h3"] = rep.h3;
            out["h4"] = rep.h4;
            out["h5"] = rep.h5;
            out["h6"] = rep.h6;
            out["M_mu0"] = rep.M_mu0;
            out["L0_scale"] = rep.L0_scale;
            out["lambda1"] = rep.lambda1;
            py::list fails;
            for (const auto& w : rep.failures) {
                py::dict f;
                f["hypothesis"] = w.hypothesis;
                f["t"] = w.t;
                f["v"] = w.v;
                f["value"] = w.value;
                f["note"] = w.note;
                fails.append(f);
            }
            out["failures"] = fails;
            return out;
        },
        py::arg("spec"), py::arg("mu0") = 0.5, py::arg("v_box") = 10.0);

    m.def(
        "compute_constants",
        [](const ModelSpec& spec, double mu0, double e0_scan_box) {
            const auto L = compute_constants(spec, mu0, e0_scan_box);
            py::dict out;
            out["lambda1"] = L.lambda1;
            out["mu0"] = L.mu0;
            out["M"] = L.M;
            out["e0"] = L.e0;
            out["K_star"] = L.K_star;
            out["eps1"] = L.eps1;
            out["beta"] = L.beta;
            out["eps_ctr"] = L.eps_ctr;
            out["T_ctr"] = L.T_ctr;
            out["mu_ctr"] = L.mu_ctr;
            out["r_exp"] = L.r_exp;
            out["L0_scale"] = L.L0_scale;
            out["C0_at_0"] = L.C0(0.0);
            out["d0_at_0"] = L.d0(0.0);
            out["g0_at_0"] = L.g0(0.0);
            out["delta1_at_0"] = L.delta1(0.0);
            out["dump"] = L.dump();
            return out;
        },
        py::arg("spec"), py::arg("mu0") = 0.5, py::arg("e0_scan_box") = 50.0);

    // --- evolution process -------------------------------------------------------
    py::class_<EvolutionProcess>(m, "EvolutionProcess")
        .def_readonly("id", &EvolutionProcess::id)
        .def_readonly("time_grid_step", &EvolutionProcess::time_grid_step)
        .def_readonly("dim", &EvolutionProcess::dim)
        .def("advance", [](const EvolutionProcess& S, double t, double s, const State& x) {
            return S.advance(t, s, x);
        });
    m.def(
        "make_process",
        [](const ModelSpec& spec) { return make_process(spec, spec.dt); }, py::arg("spec"));
    m.def("make_contraction_toy", &make_contraction_toy, py::arg("rate"), py::arg("dim"),
          py::arg("dt"));
    m.def(
        "pullback_image",
        [](const EvolutionProcess& S, double t, double tau, const PointCloud& D) {
            return pullback_image(S, t, tau, D);
        },
        py::arg("process"), py::arg("t"), py::arg("tau"), py::arg("cloud"));

    m.def(
        "simulate_norms",
        [](const ModelSpec& spec, double s, const State& v0, double horizon, int stride) {
            WaveIntegrator I(spec);
            const Trajectory traj =
                integrate_trajectory(I, s, WaveState::from_flat(v0), horizon, stride);
            std::vector<std::pair<double, double>> out;
            out.reserve(traj.states.size());
            for (std::size_t i = 0; i < traj.states.size(); ++i)
                out.emplace_back(traj.times[i], traj.states[i].xnorm());
            return out;
        },
        py::arg("spec"), py::arg("s"), py::arg("v0"), py::arg("horizon"),
        py::arg("stride") = 10);

    m.def(
        "run_experiment",
        [](const std::string& config_path, const std::string& out_dir) {
            const auto outcome = run_experiment(config_path, out_dir);
            return std::make_pair(outcome.exit_code, outcome.message);
        },
        py::arg("config_path"), py::arg("out_dir"));

    m.attr("__version__") = "0.1.0";
}
