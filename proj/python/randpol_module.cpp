#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "randpol/driver.hpp"
#include "randpol/errors.hpp"
#include "randpol/harness/config.hpp"
#include "randpol/harness/experiment.hpp"
#include "randpol/oracles.hpp"
#include "randpol/theory.hpp"

namespace py = pybind11;
using namespace randpol;

namespace {

py::dict diagnostics_dict(const IterationDiagnostics& d) {
    py::dict out;
    out["iteration"] = d.iteration;
    out["critic_objective"] = d.critic_objective;
    out["bellman_residual"] = d.bellman_residual;
    out["improvement_gap"] = d.improvement_gap;
    out["perf_error_sup"] = d.perf_error_sup;
    out["policy_objective"] = d.policy_objective;
    return out;
}

py::dict bounds_dict(const theory::SampleBounds& b) {
    py::dict out;
    out["j_q0"] = b.j_q0;
    out["j_pi0"] = b.j_pi0;
    out["m0"] = b.m0;
    out["n_q0"] = b.n_q0;
    out["n_pi0"] = b.n_pi0;
    return out;
}

// keyword arguments onto a RandpolConfig; unknown names are an error
RandpolConfig make_config(const py::kwargs& kw) {
    RandpolConfig cfg;
    for (const auto& [k, v] : kw) {
        const auto key = k.cast<std::string>();
        if (key == "n_q") cfg.n_q = v.cast<int>();
        else if (key == "n_pi") cfg.n_pi = v.cast<int>();
        else if (key == "m") cfg.m = v.cast<int>();
        else if (key == "j_q") cfg.j_q = v.cast<int>();
        else if (key == "j_pi") cfg.j_pi = v.cast<int>();
        else if (key == "k") cfg.k_iterations = v.cast<int>();
        else if (key == "c_bound") cfg.c_bound = v.cast<double>();
        else if (key == "c_prime") cfg.c_prime = v.cast<double>();
        else if (key == "bandwidth_q") cfg.bandwidth_q = v.cast<double>();
        else if (key == "bandwidth_pi") cfg.bandwidth_pi = v.cast<double>();
        else if (key == "features") {
            const auto s = v.cast<std::string>();
            require(s == "resample" || s == "fixed", "features must be resample or fixed");
            cfg.features = s == "fixed" ? FeatureMode::fixed : FeatureMode::resample;
        } else if (key == "initial_q") {
            const auto s = v.cast<std::string>();
            require(s == "zero" || s == "random", "initial_q must be zero or random");
            cfg.initial_q = s == "random" ? InitialQ::random : InitialQ::zero;
        } else if (key == "heldout") cfg.heldout = v.cast<int>();
        else if (key == "eval") cfg.evaluation.enabled = v.cast<bool>();
        else if (key == "eval_grid") cfg.evaluation.grid_points = v.cast<int>();
        else if (key == "eval_horizon") cfg.evaluation.horizon = v.cast<int>();
        else if (key == "eval_episodes") cfg.evaluation.episodes = v.cast<int>();
        else if (key == "gap_grid") cfg.evaluation.gap_grid = v.cast<int>();
        else if (key == "seed") cfg.seed = v.cast<std::uint64_t>();
        else if (key == "threads") cfg.threads = v.cast<int>();
        else throw InvalidArgument("unknown option: " + key);
    }
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_randpol, m) {
    m.doc() = "Randomized-feature policy iteration for continuous MDPs";

    // std::invalid_argument already maps to ValueError
    py::register_exception<Unsupported>(m, "Unsupported");
    py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);
    py::register_exception<oracles::RiccatiDivergence>(m, "RiccatiDivergence", PyExc_RuntimeError);
    py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);

    // features
    py::class_<FeatureSet>(m, "FeatureSet")
        .def_property_readonly("size", &FeatureSet::size)
        .def_property_readonly("input_dim", &FeatureSet::input_dim)
        .def_property_readonly("frequencies", &FeatureSet::frequencies)
        .def_property_readonly("phases", &FeatureSet::phases)
        .def("eval", &FeatureSet::eval, py::arg("z"))
        .def("eval_batch", &FeatureSet::eval_batch, py::arg("inputs"))
        .def("gradient", &FeatureSet::gradient, py::arg("z"));
    m.def(
        "sample_features",
        [](double bandwidth, int input_dim, std::size_t count, std::uint64_t seed) {
            Rng rng(seed);
            return sample_feature_params(FeatureDistribution{bandwidth, input_dim}, count, rng);
        },
        py::arg("bandwidth"), py::arg("input_dim"), py::arg("count"), py::arg("seed"));
    m.def("median_heuristic_bandwidth", &median_heuristic_bandwidth, py::arg("dim"));

    // environments
    py::class_<EnvModel>(m, "Env")
        .def_readonly("name", &EnvModel::name)
        .def_readonly("gamma", &EnvModel::gamma)
        .def_readonly("r_max", &EnvModel::r_max)
        .def_property_readonly("q_max", &EnvModel::q_max)
        .def_property_readonly("state_dim", &EnvModel::state_dim)
        .def_property_readonly("action_dim", &EnvModel::action_dim)
        .def_property_readonly("state_bounds", [](const EnvModel& e) { return py::make_tuple(e.state_box.lower, e.state_box.upper); })
        .def_property_readonly("action_bounds", [](const EnvModel& e) { return py::make_tuple(e.action_box.lower, e.action_box.upper); })
        .def("reward", [](const EnvModel& e, const Vec& x, const Vec& u) { return e.reward(x, u); }, py::arg("state"), py::arg("action"))
        .def(
            "sample_next",
            [](const EnvModel& e, const Vec& x, const Vec& u, std::uint64_t seed) {
                Rng rng(seed);
                return e.sample_next(x, u, rng);
            },
            py::arg("state"), py::arg("action"), py::arg("seed"))
        .def("optimal_value", [](const EnvModel& e, const Vec& x) -> std::optional<double> {
            if (!e.optimal_value) return std::nullopt;
            return e.optimal_value(x);
        }, py::arg("state"));
    m.def("synthetic_1d", &synthetic_1d, py::arg("gamma") = 0.7, py::arg("u_max") = 1.0);
    m.def(
        "linear_quadratic",
        [](double dt, double gamma, bool clip) {
            LqOptions o;
            o.clip = clip;
            return linear_quadratic(dt, gamma, o);
        },
        py::arg("dt") = 0.1, py::arg("gamma") = 0.9, py::arg("clip") = true);

    // critic and actor
    py::class_<QFunction>(m, "QFunction")
        .def("value", &QFunction::value, py::arg("state"), py::arg("action"))
        .def("grad_action", &QFunction::grad_action, py::arg("state"), py::arg("action"))
        .def_property_readonly("weights", &QFunction::weights)
        .def_property_readonly("c_bound", &QFunction::c_bound)
        .def_property_readonly("features", &QFunction::features);
    py::class_<PolicyFunction>(m, "Policy")
        .def("__call__", &PolicyFunction::action, py::arg("state"))
        .def("raw", &PolicyFunction::raw, py::arg("state"))
        .def_property_readonly("weights", &PolicyFunction::coordinate_weights)
        .def_property_readonly("c_prime", &PolicyFunction::c_prime);
    m.def(
        "solve_box_least_squares",
        [](const Mat& phi, const Vec& y, double bound) {
            const BoxLsResult r = solve_box_least_squares(phi, y, bound);
            return py::make_tuple(r.weights, r.objective, r.iterations);
        },
        py::arg("phi"), py::arg("y"), py::arg("bound"),
        "min (1/N)||phi a - y||^2 over |a_j| <= bound; returns (weights, objective, iterations)");

    // driver
    py::class_<RunResult>(m, "RunResult")
        .def_property_readonly("q", [](const RunResult& r) { return r.final.q; })
        .def_property_readonly("policy", [](const RunResult& r) { return r.final.policy; })
        .def_property_readonly("initial_policy", [](const RunResult& r) { return r.initial.policy; })
        .def_property_readonly("diagnostics", [](const RunResult& r) {
            py::list out;
            for (const auto& d : r.diagnostics) out.append(diagnostics_dict(d));
            return out;
        });
    m.def(
        "run",
        [](const EnvModel& env, const py::kwargs& kw) {
            const RandpolConfig cfg = make_config(kw);
            py::gil_scoped_release release;
            return run(env, cfg);
        },
        py::arg("env"),
        "Run RANDPOL. Options: n_q n_pi m j_q j_pi k c_bound c_prime bandwidth_q bandwidth_pi features "
        "initial_q heldout eval eval_grid eval_horizon eval_episodes gap_grid seed threads");
    m.def(
        "performance_error",
        [](const EnvModel& env, const PolicyFunction& p, int grid_points, int horizon, int episodes,
           std::uint64_t seed) {
            EvaluationSpec spec;
            spec.grid_points = grid_points;
            spec.horizon = horizon;
            spec.episodes = episodes;
            return performance_error(env, p, spec, Rng(seed));
        },
        py::arg("env"), py::arg("policy"), py::arg("grid_points") = 101, py::arg("horizon") = 0,
        py::arg("episodes") = 200, py::arg("seed") = 0);

    // theory
    auto th = m.def_submodule("theory");
    py::class_<theory::TheoryInputs>(th, "Inputs")
        .def(py::init<>())
        .def_readwrite("epsilon", &theory::TheoryInputs::epsilon)
        .def_readwrite("delta", &theory::TheoryInputs::delta)
        .def_readwrite("gamma", &theory::TheoryInputs::gamma)
        .def_readwrite("q_max", &theory::TheoryInputs::q_max)
        .def_readwrite("c_mu", &theory::TheoryInputs::c_mu)
        .def_readwrite("c_bound", &theory::TheoryInputs::c_bound)
        .def_readwrite("c_prime", &theory::TheoryInputs::c_prime)
        .def_readwrite("l_u", &theory::TheoryInputs::l_u)
        .def_readwrite("j_q", &theory::TheoryInputs::j_q)
        .def_readwrite("j_pi", &theory::TheoryInputs::j_pi)
        .def_readwrite("n_for_m", &theory::TheoryInputs::n_for_m)
        .def_readwrite("q_good", &theory::TheoryInputs::q_good);
    th.def("k_star", &theory::k_star, py::arg("epsilon"), py::arg("c_mu"), py::arg("q_max"), py::arg("gamma"));
    th.def("sample_bounds", [](const theory::TheoryInputs& in) { return bounds_dict(theory::sample_bounds(in)); });
    th.def("delta_prime", &theory::delta_prime, py::arg("delta"), py::arg("k_star"));
    th.def("min_iterations", &theory::min_iterations, py::arg("delta"), py::arg("q_good"), py::arg("k_star"));
    th.def("stationary", [](double q, int k) { return theory::chain_stationary(q, k).probabilities; },
           py::arg("q_good"), py::arg("k_star"));
    th.def("mixing_time_bound", &theory::mixing_time_bound, py::arg("delta_prime"), py::arg("q_good"),
           py::arg("k_star"));
    th.def("exact_mixing_time", &theory::exact_mixing_time, py::arg("delta_prime"), py::arg("q_good"),
           py::arg("k_star"), py::arg("max_steps") = 100000);
    th.def("error_propagation_bound", &theory::error_propagation_bound, py::arg("epsilon"), py::arg("k"),
           py::arg("gamma"), py::arg("c_mu"), py::arg("q_max"));
    th.def("report_csv", [](const theory::TheoryInputs& in) { return harness::theory_csv(theory::theory_report(in)); });

    // oracles
    auto orc = m.def_submodule("oracles");
    orc.def(
        "synthetic_value_iteration",
        [](int n_x, int n_u, double gamma, double tol) {
            const auto mdp = oracles::discretize_synthetic(n_x, n_u, gamma);
            const auto r = oracles::exact_value_iteration(mdp, tol);
            return py::make_tuple(mdp.states, mdp.actions, r.q, r.v);
        },
        py::arg("n_x") = 101, py::arg("n_u") = 101, py::arg("gamma") = 0.7, py::arg("tol") = 1e-10,
        "returns (states, actions, q table, v)");
    orc.def(
        "riccati",
        [](double dt, double gamma) {
            const auto s = oracles::riccati_oracle(double_integrator_spec(dt), gamma);
            return py::make_tuple(s.p, s.gain);
        },
        py::arg("dt") = 0.1, py::arg("gamma") = 0.9, "double integrator: returns (P, gain)");

    // harness
    m.def(
        "run_experiment",
        [](const std::string& config_text, const std::filesystem::path& out_dir) {
            harness::ExperimentConfig cfg = harness::parse_config(config_text);
            cfg.out_dir = out_dir;
            harness::ExperimentOutcome out;
            {
                py::gil_scoped_release release;
                out = harness::run_experiment(cfg);
            }
            return out.ok();
        },
        py::arg("config_text"), py::arg("out_dir"), "Runs a key = value configuration; True if every seed succeeded");
    m.def("resolved_config", [](const std::string& text) { return harness::resolved_config_text(harness::parse_config(text)); },
          py::arg("config_text"));
    m.attr("__version__") = harness::code_version();
}
