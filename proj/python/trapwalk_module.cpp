// Python bindings for the trapwalk core. Result structs are exposed
// read-only; anything that consumes randomness takes an explicit seed so
// python sessions replay exactly like the CLI.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trapwalk/env.hpp"
#include "trapwalk/errors.hpp"
#include "trapwalk/limit.hpp"
#include "trapwalk/periodic.hpp"
#include "trapwalk/rng.hpp"
#include "trapwalk/stats.hpp"
#include "trapwalk/survival.hpp"

namespace py = pybind11;
using namespace trapwalk;

PYBIND11_MODULE(trapwalk, m) {
    m.doc() = "Survival of a 1-d random walk among heavy-tailed soft traps: "
              "exact survival DP, crossing costs, periodic patterns and the "
              "Poisson limit law";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<GuaranteeError>(m, "GuaranteeError", PyExc_RuntimeError);

    // -- gap laws and environments -----------------------------------------
    py::enum_<LawKind>(m, "LawKind")
        .value("DiscretePareto", LawKind::DiscretePareto)
        .value("Zeta", LawKind::Zeta);

    py::class_<GapLaw>(m, "GapLaw")
        .def_readonly("gamma", &GapLaw::gamma)
        .def_readonly("kind", &GapLaw::kind)
        .def_readonly("c_tau", &GapLaw::c_tau)
        .def("limit_tail_constant", &GapLaw::limit_tail_constant)
        .def("__repr__", [](const GapLaw& law) {
            return std::string("GapLaw(") + law_kind_name(law.kind) +
                   ", gamma=" + std::to_string(law.gamma) + ")";
        });

    m.def("discrete_pareto_law", &discrete_pareto_law, py::arg("gamma"),
          "Gap law with P(T >= k) = k**(-gamma) exactly");
    m.def("zeta_gap_law", &zeta_gap_law, py::arg("gamma"),
          "Gap law with P(T = k) proportional to k**(-(1+gamma))");
    m.def("mean_log_gap", &mean_log_gap, py::arg("law"),
          "E[log T] under the gap law, to 1e-10 absolute");

    py::class_<Environment>(m, "Environment")
        .def_readonly("law", &Environment::law)
        .def_readonly("seed", &Environment::seed)
        .def_readonly("gaps", &Environment::gaps)
        .def_readonly("positions", &Environment::positions)
        .def("__len__", [](const Environment& env) { return env.gaps.size(); })
        .def("__repr__", [](const Environment& env) {
            return "Environment(" + std::to_string(env.gaps.size()) + " gaps)";
        });

    m.def("sample_environment", &sample_environment, py::arg("law"),
          py::arg("gap_count"), py::arg("seed"));
    m.def("environment_from_gaps", &environment_from_gaps, py::arg("law"),
          py::arg("gaps"), py::arg("seed") = 0);
    m.def("env_to_json", &env_to_json, py::arg("env"));
    m.def("env_from_json", &env_from_json, py::arg("text"));

    py::class_<RecordSequence>(m, "RecordSequence")
        .def_readonly("record_indexes", &RecordSequence::record_indexes)
        .def_readonly("record_gaps", &RecordSequence::record_gaps)
        .def_readonly("record_positions", &RecordSequence::record_positions);
    m.def("compute_records", &compute_records, py::arg("env"),
          "Strict running-maximum records of the gap sequence");

    py::class_<PointMeasure>(m, "PointMeasure")
        .def_readonly("points", &PointMeasure::points);
    m.def("rescaled_point_measure",
          py::overload_cast<const Environment&, double>(&rescaled_point_measure),
          py::arg("env"), py::arg("scale_n"));
    m.def("rescaled_point_measure",
          py::overload_cast<const Environment&, double, double, double>(
              &rescaled_point_measure),
          py::arg("env"), py::arg("scale_n"), py::arg("x_max"), py::arg("y_min"));

    m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("stream"),
          py::arg("index"), "Stable sub-seed for (master, stream, index)");

    // -- survival dynamic program and crossing costs ------------------------
    py::class_<SurvivalResult>(m, "SurvivalResult")
        .def_readonly("log_z", &SurvivalResult::log_z)
        .def_readonly("free_energy", &SurvivalResult::free_energy)
        .def_readonly("scale_n", &SurvivalResult::scale_n)
        .def_readonly("log_error_bound", &SurvivalResult::log_error_bound);

    m.def(
        "log_survival_probability",
        [](const Environment& env, double beta, std::uint64_t n, double drop_threshold,
           std::size_t right_trap_cap) {
            SurvivalParams params;
            params.beta = beta;
            params.n = n;
            params.drop_threshold = drop_threshold;
            params.right_trap_cap = right_trap_cap;
            return log_survival_probability(env, params);
        },
        py::arg("env"), py::arg("beta"), py::arg("n"), py::arg("drop_threshold") = 0.0,
        py::arg("right_trap_cap") = 0,
        "log of the quenched survival weight after n steps, exact when "
        "drop_threshold == 0 and right_trap_cap == 0");

    py::class_<CrossingResult>(m, "CrossingResult")
        .def_readonly("log_p", &CrossingResult::log_p)
        .def_readonly("per_trap_cost", &CrossingResult::per_trap_cost);
    m.def("crossing_probability", &crossing_probability, py::arg("env"), py::arg("i"),
          py::arg("j"), py::arg("beta"),
          "log P(walk crosses from trap i to trap j before returning, surviving)");
    m.def("log_hit_before_zero", &log_hit_before_zero, py::arg("env"), py::arg("x0"),
          py::arg("x_target"), py::arg("beta"));
    m.def("lambda_sequence", &lambda_sequence, py::arg("law"), py::arg("beta"),
          py::arg("ell_max"), py::arg("seed"));
    m.def("log_confined_survival_probability", &log_confined_survival_probability,
          py::arg("t"), py::arg("n"), py::arg("x0") = 1);
    m.def("small_ball_rate", &small_ball_rate, py::arg("t"),
          "-log cos(pi/t), the confinement decay rate in a gap of width t");

    py::class_<FkgResult>(m, "FkgResult")
        .def_readonly("cdf_killed", &FkgResult::cdf_killed)
        .def_readonly("cdf_free", &FkgResult::cdf_free)
        .def_readonly("log_denominator_killed", &FkgResult::log_denominator_killed)
        .def_readonly("log_denominator_free", &FkgResult::log_denominator_free);
    m.def("fkg_compare", &fkg_compare, py::arg("env"), py::arg("x"), py::arg("n"),
          py::arg("beta"),
          "Conditional arrival-time CDFs at x with and without killing");

    // -- periodic patterns ---------------------------------------------------
    py::class_<PeriodicSpec>(m, "PeriodicSpec")
        .def_readonly("gaps", &PeriodicSpec::gaps)
        .def_readonly("period", &PeriodicSpec::period)
        .def_readonly("t_max", &PeriodicSpec::t_max);
    m.def("make_periodic_spec", &make_periodic_spec, py::arg("gaps"));

    py::class_<PhiResult>(m, "PhiResult")
        .def_readonly("phi", &PhiResult::phi)
        .def_readonly("bracket_lo", &PhiResult::bracket_lo)
        .def_readonly("bracket_hi", &PhiResult::bracket_hi)
        .def_readonly("perron_residual", &PhiResult::perron_residual);
    m.def("phi_homogeneous", &phi_homogeneous, py::arg("t"), py::arg("beta"),
          "Decay rate among equally spaced traps (gap t >= 2)");
    m.def(
        "phi_periodic",
        [](const std::vector<std::uint64_t>& gaps, double beta) {
            return phi_periodic(make_periodic_spec(gaps), beta);
        },
        py::arg("gaps"), py::arg("beta"),
        "Decay rate for a periodic trap pattern given by its gap list");
    m.def(
        "periodic_decay_rate",
        [](const std::vector<std::uint64_t>& gaps, double beta, std::uint64_t n) {
            return periodic_decay_rate(make_periodic_spec(gaps), beta, n);
        },
        py::arg("gaps"), py::arg("beta"), py::arg("n"),
        "Direct decay-rate estimate from the survival DP on the residue ring");
    m.def("delta_of_phi", &delta_of_phi, py::arg("phi"));

    // -- limit law -----------------------------------------------------------
    py::class_<LimitParams>(m, "LimitParams")
        .def(py::init([](double lambda, double gamma, double c_tau) {
                 return LimitParams{lambda, gamma, c_tau};
             }),
             py::arg("lambda_"), py::arg("gamma"), py::arg("c_tau"))
        .def_readonly("lambda_", &LimitParams::lambda)
        .def_readonly("gamma", &LimitParams::gamma)
        .def_readonly("c_tau", &LimitParams::c_tau);

    py::class_<LimitSample>(m, "LimitSample")
        .def_readonly("f_value", &LimitSample::f_value)
        .def_readonly("x_star", &LimitSample::x_star)
        .def_readonly("y_star", &LimitSample::y_star)
        .def_readonly("points_examined", &LimitSample::points_examined)
        .def_readonly("tie_count", &LimitSample::tie_count);

    m.def("psi_value", &psi_value, py::arg("params"), py::arg("x"), py::arg("y"),
          "lambda*x + pi^2/(2 y^2), the cost of settling at point (x, y)");
    m.def("limit_tail_cdf", &limit_tail_cdf, py::arg("params"), py::arg("u"),
          "P(F > u) in closed form");
    m.def("limit_quantile", &limit_quantile, py::arg("params"), py::arg("q"));
    m.def("sample_limit_F", &sample_limit_F, py::arg("params"), py::arg("seed"),
          "One draw of F by structural revelation of the Poisson process");
    m.def(
        "sample_limit_F_inverse",
        [](const LimitParams& params, std::uint64_t seed, std::size_t count) {
            std::mt19937_64 rng = make_rng(seed, "limit", 0);
            std::vector<double> out(count);
            for (auto& v : out) v = sample_limit_F_inverse(params, rng);
            return out;
        },
        py::arg("params"), py::arg("seed"), py::arg("count") = 1,
        "Inverse-transform draws from the same law, for cross-validation");
    m.def("infimum_over_measure", &infimum_over_measure, py::arg("params"),
          py::arg("measure"));

    // -- statistics and experiments -------------------------------------------
    py::class_<KsResult>(m, "KsResult")
        .def_readonly("statistic", &KsResult::statistic)
        .def_readonly("dkw_band", &KsResult::dkw_band)
        .def_readonly("sample_size", &KsResult::sample_size);
    m.def("ks_distance", &ks_distance, py::arg("sorted_sample"), py::arg("cdf"),
          py::arg("alpha") = 0.01);

    py::class_<KsTwoSampleResult>(m, "KsTwoSampleResult")
        .def_readonly("statistic", &KsTwoSampleResult::statistic)
        .def_readonly("critical_value", &KsTwoSampleResult::critical_value)
        .def_readonly("reject", &KsTwoSampleResult::reject);
    m.def("ks_two_sample", &ks_two_sample, py::arg("first"), py::arg("second"),
          py::arg("alpha") = 0.01);

    py::class_<LambdaEstimate>(m, "LambdaEstimate")
        .def_readonly("value", &LambdaEstimate::value)
        .def_readonly("spread", &LambdaEstimate::spread)
        .def_readonly("std_error", &LambdaEstimate::std_error)
        .def_readonly("ell", &LambdaEstimate::ell)
        .def_readonly("per_env", &LambdaEstimate::per_env);
    m.def("estimate_lambda", &estimate_lambda, py::arg("law"), py::arg("beta"),
          py::arg("ell"), py::arg("env_count"), py::arg("seed"),
          "Per-trap crossing cost averaged over independent environments");

    py::class_<GapScore>(m, "GapScore")
        .def_readonly("ell", &GapScore::ell)
        .def_readonly("score", &GapScore::score)
        .def_readonly("is_argmin", &GapScore::is_argmin);
    m.def(
        "gap_score_profile",
        [](const Environment& env, double beta, std::int64_t n) {
            return gap_score_profile(env, beta, n);
        },
        py::arg("env"), py::arg("beta"), py::arg("n"),
        "Cross-then-sit score of every record gap; the minimum nearly "
        "upper-bounds the finite-volume free energy");

    py::class_<RecordTailRow>(m, "RecordTailRow")
        .def_readonly("b", &RecordTailRow::b)
        .def_readonly("threshold", &RecordTailRow::threshold)
        .def_readonly("exceed_count", &RecordTailRow::exceed_count)
        .def_readonly("frequency", &RecordTailRow::frequency)
        .def_readonly("bound", &RecordTailRow::bound);
    py::class_<RecordRatioRow>(m, "RecordRatioRow")
        .def_readonly("u", &RecordRatioRow::u)
        .def_readonly("exceed_count", &RecordRatioRow::exceed_count)
        .def_readonly("pair_count", &RecordRatioRow::pair_count)
        .def_readonly("frequency", &RecordRatioRow::frequency);
    py::class_<RecordsReport>(m, "RecordsReport")
        .def_readonly("law", &RecordsReport::law)
        .def_readonly("n", &RecordsReport::n)
        .def_readonly("replicates", &RecordsReport::replicates)
        .def_readonly("seed", &RecordsReport::seed)
        .def_readonly("count_histogram", &RecordsReport::count_histogram)
        .def_readonly("mean_count", &RecordsReport::mean_count)
        .def_readonly("harmonic_sum", &RecordsReport::harmonic_sum)
        .def_readonly("tail_rows", &RecordsReport::tail_rows)
        .def_readonly("ratio_rows", &RecordsReport::ratio_rows);
    m.def("records_statistics", &records_statistics, py::arg("law"), py::arg("n"),
          py::arg("replicates"), py::arg("seed"), py::arg("jobs") = 1);
    m.def("records_report_to_json", &records_report_to_json, py::arg("report"));
    m.def("records_report_to_csv", &records_report_to_csv, py::arg("report"));

    py::enum_<LambdaSource>(m, "LambdaSource")
        .value("estimated", LambdaSource::estimated)
        .value("provided", LambdaSource::provided);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &ExperimentConfig::gamma)
        .def_readwrite("beta", &ExperimentConfig::beta)
        .def_readwrite("law_kind", &ExperimentConfig::law_kind)
        .def_readwrite("n_grid", &ExperimentConfig::n_grid)
        .def_readwrite("env_count", &ExperimentConfig::env_count)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("lambda_source", &ExperimentConfig::lambda_source)
        .def_readwrite("lambda_value", &ExperimentConfig::lambda_value)
        .def_readwrite("lambda_ell", &ExperimentConfig::lambda_ell)
        .def_readwrite("lambda_env_count", &ExperimentConfig::lambda_env_count)
        .def_readwrite("jobs", &ExperimentConfig::jobs);

    py::class_<ConvergenceRow>(m, "ConvergenceRow")
        .def_readonly("n", &ConvergenceRow::n)
        .def_readonly("scale_n", &ConvergenceRow::scale_n)
        .def_readonly("free_energies", &ConvergenceRow::free_energies)
        .def_readonly("trap_caps", &ConvergenceRow::trap_caps)
        .def_readonly("ks_statistic", &ConvergenceRow::ks_statistic)
        .def_readonly("dkw_band", &ConvergenceRow::dkw_band)
        .def_readonly("median", &ConvergenceRow::median)
        .def_readonly("mean", &ConvergenceRow::mean)
        .def_readonly("failures", &ConvergenceRow::failures);
    py::class_<ConvergenceReport>(m, "ConvergenceReport")
        .def_readonly("config", &ConvergenceReport::config)
        .def_readonly("limit_params", &ConvergenceReport::limit_params)
        .def_readonly("lambda_spread", &ConvergenceReport::lambda_spread)
        .def_readonly("lambda_std_error", &ConvergenceReport::lambda_std_error)
        .def_readonly("rows", &ConvergenceReport::rows)
        .def_readonly("total_failures", &ConvergenceReport::total_failures)
        .def_readonly("content_hash", &ConvergenceReport::content_hash);
    m.def("convergence_experiment", &convergence_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>(),
          "Full experiment: exact DP free energies per horizon against the "
          "closed-form limit CDF");
    m.def("convergence_report_to_json", &convergence_report_to_json, py::arg("report"));
    m.def("convergence_report_to_csv", &convergence_report_to_csv, py::arg("report"));
}
