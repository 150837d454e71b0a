#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "barankin/bounds.hpp"
#include "barankin/doa.hpp"
#include "barankin/errors.hpp"
#include "barankin/estimators.hpp"
#include "barankin/experiment.hpp"
#include "barankin/linalg.hpp"
#include "barankin/parallel.hpp"
#include "barankin/simulation.hpp"
#include "barankin/verification.hpp"

namespace py = pybind11;
using namespace barankin;

namespace {

py::dict bound_result(const BoundResult& r) {
    py::dict d;
    d["value"] = r.value;
    d["argmax"] = r.argmax;
    d["argmax_params"] = r.argmax_params;
    d["valid_count"] = r.valid_count;
    d["saturated_count"] = r.saturated_count;
    d["candidate_count"] = r.candidate_log.size();
    return d;
}

py::dict point_bound(const PointBound& b) {
    py::dict d;
    d["value"] = b.value;
    d["valid"] = b.valid;
    d["saturated"] = b.saturated;
    d["condition"] = b.condition;
    return d;
}

py::dict trial_stats(const TrialStatistics& s) {
    py::dict d;
    d["trials"] = s.trials;
    d["failed"] = s.failed;
    d["wmse"] = s.wmse;
    d["wmse_se"] = s.wmse_se;
    d["bias"] = s.bias;
    d["bias_se"] = s.bias_se;
    d["c_bias"] = s.c_bias;
    d["c_bias_se"] = s.c_bias_se;
    d["bias_norm"] = s.bias_norm;
    d["bias_norm_se"] = s.bias_norm_se;
    d["c_bias_norm"] = s.c_bias_norm;
    d["c_bias_norm_se"] = s.c_bias_norm_se;
    return d;
}

DoaGrid make_grid(int n, std::optional<double> local, std::vector<double> h_phi, double h_alpha) {
    DoaGrid g = standard_grid(n, local);
    g.h_phi = std::move(h_phi);
    g.h_alpha = {h_alpha};
    return g;
}

GaussianMeanModel linear_model(const Matrix& h, double sigma2) {
    GaussianMeanModel g;
    g.obs_dim = static_cast<int>(h.rows());
    g.noise_variance = sigma2;
    g.real_valued = true;
    g.mean_map = [h](const Vector& th) -> CVector { return (h * th).cast<Complex>(); };
    return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Constrained Barankin-type bounds and the DOA/constant-modulus study";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidOffset>(m, "InvalidOffset", PyExc_ValueError);
    py::register_exception<InvalidConstraint>(m, "InvalidConstraint", PyExc_ValueError);
    py::register_exception<AllCandidatesInvalid>(m, "AllCandidatesInvalid", PyExc_ArithmeticError);
    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

    m.def("pseudo_inverse", &pseudo_inverse, py::arg("a"), py::arg("rel_tol") = 0.0);
    m.def("kronecker", &kronecker);
    m.def("vec", &vec);
    m.def("vec_permutation", &vec_permutation);
    m.def("set_worker_count", &set_worker_count, "0 restores the default");

    py::class_<DoaScenario>(m, "DoaScenario")
        .def(py::init([](int q, double zeta, double sigma2, double alpha, double phase, double angle) {
                 DoaScenario s;
                 s.q_sensors = q;
                 s.zeta = zeta;
                 s.noise_variance = sigma2;
                 s.amplitude = alpha;
                 s.phase = phase;
                 s.doa_angle = angle;
                 s.validate();
                 return s;
             }),
             py::arg("q_sensors") = 4, py::arg("zeta") = 0.5, py::arg("sigma2") = 0.5,
             py::arg("alpha") = 1.0, py::arg("phase") = M_PI / 4, py::arg("doa_angle") = 0.0)
        .def_readwrite("q_sensors", &DoaScenario::q_sensors)
        .def_readwrite("zeta", &DoaScenario::zeta)
        .def_readwrite("sigma2", &DoaScenario::noise_variance)
        .def_readwrite("alpha", &DoaScenario::amplitude)
        .def_readwrite("phase", &DoaScenario::phase)
        .def_readwrite("doa_angle", &DoaScenario::doa_angle)
        .def_property_readonly("theta", &DoaScenario::theta)
        .def_property_readonly("snr", &DoaScenario::snr)
        .def("with_snr_db", [](const DoaScenario& s, double db) { return with_snr_db(s, db); });

    m.def("steering_vector", &steering_vector);
    m.def("noiseless_mean", &noiseless_mean);

    auto offsets = [](double h_nu, double h_phi, double h_alpha) { return DoaTestOffsets{h_nu, h_phi, h_alpha}; };
    m.def(
        "b_log_matrix",
        [=](const DoaScenario& s, double h_nu, double h_phi, double h_alpha) {
            return b_entries_closed_form(s, offsets(h_nu, h_phi, h_alpha)).log_matrix();
        },
        py::arg("scenario"), py::arg("h_nu"), py::arg("h_phi"), py::arg("h_alpha") = 1e-5);
    m.def(
        "b_log_matrix_gaussian",
        [=](const DoaScenario& s, double h_nu, double h_phi, double h_alpha) {
            return b_matrix_gaussian(doa_model(s), make_doa_test_points(s, offsets(h_nu, h_phi, h_alpha)))
                .log_entries();
        },
        py::arg("scenario"), py::arg("h_nu"), py::arg("h_phi"), py::arg("h_alpha") = 1e-5);

    for (const char* kind : {"closed_form", "generic"}) {
        const bool cf = std::string(kind) == "closed_form";
        m.def(
            (std::string("lu_cbtb_candidate_") + kind).c_str(),
            [=](const DoaScenario& s, double h_nu, double h_phi, double h_alpha) {
                const auto o = offsets(h_nu, h_phi, h_alpha);
                return point_bound(cf ? lu_cbtb_candidate(s, o) : lu_cbtb_generic(s, o));
            },
            py::arg("scenario"), py::arg("h_nu"), py::arg("h_phi"), py::arg("h_alpha") = 1e-5);
        m.def(
            (std::string("cbtb_candidate_") + kind).c_str(),
            [=](const DoaScenario& s, double h_nu, double h_phi, double h_alpha) {
                const auto o = offsets(h_nu, h_phi, h_alpha);
                return point_bound(cf ? cbtb_candidate(s, o) : cbtb_generic(s, o));
            },
            py::arg("scenario"), py::arg("h_nu"), py::arg("h_phi"), py::arg("h_alpha") = 1e-5);
    }

    const std::vector<double> default_phi{-M_PI, -M_PI / 2, M_PI / 2};
    m.def(
        "lu_cbtb",
        [](const DoaScenario& s, int n, std::optional<double> local, std::vector<double> h_phi, double h_alpha) {
            return bound_result(lu_cbtb_closed_form(s, make_grid(n, local, std::move(h_phi), h_alpha)));
        },
        py::arg("scenario"), py::arg("h_nu_grid_size") = 64, py::arg("h_nu_local") = 1e-5,
        py::arg("h_phi_set") = default_phi, py::arg("h_alpha") = 1e-5);
    m.def(
        "cbtb",
        [](const DoaScenario& s, int n, std::optional<double> local, std::vector<double> h_phi, double h_alpha) {
            return bound_result(cbtb_closed_form(s, make_grid(n, local, std::move(h_phi), h_alpha)));
        },
        py::arg("scenario"), py::arg("h_nu_grid_size") = 64, py::arg("h_nu_local") = 1e-5,
        py::arg("h_phi_set") = default_phi, py::arg("h_alpha") = 1e-5);

    m.def(
        "linear_bounds",
        [](const Matrix& a, const Matrix& h, double sigma2, const Matrix& w, const Vector& theta,
           const std::vector<Vector>& points) {
            const ConstraintSpec spec = make_linear_constraint(a);
            const TestPointSet pts{theta, points};
            const MomentMatrixB b = b_matrix_gaussian(linear_model(h, sigma2), pts);
            return py::make_tuple(lu_cbtb_for_points(pts, w, spec, b).value, cbtb_for_points(pts, w, b).value);
        },
        py::arg("a"), py::arg("h"), py::arg("sigma2"), py::arg("w"), py::arg("theta"), py::arg("points"),
        "(LU-CBTB, CBTB) for y = H theta + real noise under A theta = 0");
    m.def(
        "linear_complement",
        [](const Matrix& a) { return make_linear_constraint(a).complement(Vector::Zero(a.cols())); });

    m.def(
        "circle_lu_ccrb",
        [](double sigma2, double angle) {
            const ConstraintSpec spec = make_planar_circle_constraint(1.0);
            Vector th(2);
            th << std::cos(angle), std::sin(angle);
            const Matrix eye = Matrix::Identity(2, 2);
            return py::make_tuple(ccrb(th, spec, eye, eye / sigma2), lu_ccrb(th, spec, eye, eye / sigma2));
        },
        py::arg("sigma2"), py::arg("angle") = M_PI / 2, "(CCRB, LU-CCRB) for the unit circle with W = I");

    m.def(
        "cml_estimate",
        [](const DoaScenario& s, const CVector& x, int grid) {
            const CmlEstimate e = CmlEstimator(s, grid).estimate(x);
            py::dict d;
            d["nu_angle"] = e.nu_angle;
            d["phi_hat"] = e.phi_hat;
            d["alpha_hat"] = e.alpha_hat;
            d["objective"] = e.objective;
            return d;
        },
        py::arg("scenario"), py::arg("x"), py::arg("angle_grid_size") = 4096);
    m.def(
        "run_cml_trials",
        [](const DoaScenario& s, std::size_t trials, std::uint64_t seed, int grid) {
            py::gil_scoped_release release;
            const TrialStatistics st = run_trials(s, make_cml_estimator(s, grid), trials, seed);
            py::gil_scoped_acquire acquire;
            return trial_stats(st);
        },
        py::arg("scenario"), py::arg("trials"), py::arg("seed") = 1, py::arg("angle_grid_size") = 4096);

    m.def("cmd_bounds", [](const std::string& json) { return cmd_bounds(parse_config(json)); });
    m.def("cmd_simulate", [](const std::string& json) {
        const ExperimentConfig c = parse_config(json);
        py::gil_scoped_release release;
        return cmd_simulate(c);
    });
    m.def(
        "verify",
        [](std::vector<std::string> checks, std::uint64_t seed, double mc_scale, double gb_perturbation) {
            VerifyOptions o;
            o.checks = std::move(checks);
            o.seed = seed;
            o.mc_scale = mc_scale;
            o.gb_perturbation = gb_perturbation;
            py::gil_scoped_release release;
            const VerifyReport r = run_verification(o);
            py::gil_scoped_acquire acquire;
            return py::make_tuple(r.passed(), r.text());
        },
        py::arg("checks") = std::vector<std::string>{}, py::arg("seed") = 1, py::arg("mc_scale") = 1.0,
        py::arg("gb_perturbation") = 0.0, "(passed, report text)");
    m.def("check_names", &check_names);
}
