#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mphd/bo.hpp"
#include "mphd/cli.hpp"
#include "mphd/error.hpp"
#include "mphd/gp.hpp"
#include "mphd/io.hpp"
#include "mphd/priors.hpp"

namespace py = pybind11;
using namespace mphd;

namespace {

std::vector<SubDataset> to_subdatasets(const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& blocks) {
    std::vector<SubDataset> out;
    out.reserve(blocks.size());
    for (const auto& [x, y] : blocks) out.push_back(SubDataset{x, y});
    return out;
}

}  // namespace

PYBIND11_MODULE(_mphd, m) {
    m.doc() = "Hierarchical-prior GP Bayesian optimization core";

    // Leaked so no Python object is released after interpreter shutdown.
    static auto* error_type = new py::exception<Error>(m, "MphdError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::handle(error_type->ptr())(std::string(to_string(e.code())) + ": " + e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type->ptr(), exc.ptr());
        }
    });

    py::enum_<Smoothness>(m, "Smoothness").value("NU32", Smoothness::kNu32).value("NU52", Smoothness::kNu52);

    py::class_<GpParams>(m, "GpParams")
        .def(py::init([](double mean, Eigen::VectorXd ls, double signal, double noise) {
                 GpParams p{mean, std::move(ls), signal, noise};
                 p.validate();
                 return p;
             }),
             py::arg("constant_mean"), py::arg("length_scales"), py::arg("signal_variance"), py::arg("noise_variance"))
        .def_readwrite("constant_mean", &GpParams::constant_mean)
        .def_readwrite("length_scales", &GpParams::length_scales)
        .def_readwrite("signal_variance", &GpParams::signal_variance)
        .def_readwrite("noise_variance", &GpParams::noise_variance)
        .def("to_unconstrained", [](const GpParams& p) { return to_unconstrained(p); })
        .def_static("from_unconstrained", &from_unconstrained);

    m.def("matern_correlation", &matern_correlation, py::arg("r"), py::arg("nu"));
    m.def("gram_matrix", &gram_matrix, py::arg("inputs"), py::arg("params"), py::arg("nu"), py::arg("jitter") = 0.0);

    // Sub-datasets cross the boundary as a list of (inputs, outputs) pairs.
    m.def(
        "gp_nll",
        [](const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& blocks, const GpParams& p, Smoothness nu) {
            return gp_nll(to_subdatasets(blocks), p, nu);
        },
        py::arg("subdatasets"), py::arg("params"), py::arg("nu"));
    m.def(
        "gp_nll_grad",
        [](const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& blocks, const GpParams& p, Smoothness nu) {
            const NllWithGradient r = gp_nll_grad(to_subdatasets(blocks), p, nu);
            return py::make_tuple(r.value, r.gradient);
        },
        py::arg("subdatasets"), py::arg("params"), py::arg("nu"));
    m.def(
        "gp_posterior",
        [](const GpParams& p, Smoothness nu, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
           const Eigen::MatrixXd& query) {
            const PosteriorSummary s = gp_posterior(p, nu, SubDataset{x, y}, query);
            return py::make_tuple(s.mean, s.variance);
        },
        py::arg("params"), py::arg("nu"), py::arg("inputs"), py::arg("outputs"), py::arg("query"));

    py::class_<Gamma>(m, "Gamma")
        .def(py::init([](double a, double b) {
                 Gamma g{a, b};
                 validate(PriorFamily{g});
                 return g;
             }),
             py::arg("shape"), py::arg("rate"))
        .def_readonly("shape", &Gamma::shape)
        .def_readonly("rate", &Gamma::rate)
        .def("log_pdf", [](const Gamma& g, double x) { return log_pdf(PriorFamily{g}, x); })
        .def("__repr__", [](const Gamma& g) { return describe(PriorFamily{g}); });
    py::class_<Normal>(m, "Normal")
        .def_readonly("mean", &Normal::mean)
        .def_readonly("stddev", &Normal::stddev)
        .def("__repr__", [](const Normal& n) { return describe(PriorFamily{n}); });

    m.def("gamma_mle", [](const std::vector<double>& xs) { return gamma_mle(xs); }, py::arg("samples"));
    m.def("normal_mle", [](const std::vector<double>& xs) { return normal_mle(xs); }, py::arg("samples"));
    m.def("gamma_kl", &gamma_kl, py::arg("p"), py::arg("q"));

    m.def(
        "acquisition_value",
        [](const std::string& kind, double mu, double sigma, double y_best, double zeta, double beta) {
            AcquisitionSpec spec;
            spec.kind = acquisition_kind_from_string(kind);
            spec.zeta = zeta;
            spec.beta = beta;
            spec.validate();
            return acquisition_value(spec, mu, sigma, y_best);
        },
        py::arg("kind"), py::arg("mu"), py::arg("sigma"), py::arg("y_best"), py::arg("zeta") = 0.1,
        py::arg("beta") = 3.0);

    m.def("content_hash", [](const std::string& bytes) { return content_hash(bytes); }, py::arg("data"));

    // Runs the command-line front end in-process; returns (exit code, stdout, stderr).
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> argv{"mphd"};
            argv.insert(argv.end(), args.begin(), args.end());
            std::ostringstream out;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(argv, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
