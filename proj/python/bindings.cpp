#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evolvid/aero.hpp"
#include "evolvid/flight_data.hpp"
#include "evolvid/metrics.hpp"
#include "evolvid/snapshot.hpp"
#include "evolvid/train.hpp"

namespace py = pybind11;
using namespace evolvid;

namespace {

double predict_one(const Network& net, const Eigen::VectorXd& x) {
    return forward(x, net).y_out[0];
}

Eigen::VectorXd predict_many(const Network& net, const Eigen::MatrixXd& x) {
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index n = 0; n < x.rows(); ++n) y[n] = predict_one(net, x.row(n));
    return y;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Evolving type-2 quantum fuzzy identification of aerodynamic coefficients";

    m.def(
        "eval_qmf",
        [](double x, double mean, double gamma, const std::vector<double>& jumps) {
            QuantumMFParams p;
            p.mean = mean;
            p.gamma = gamma;
            p.upper_jumps = jumps;
            p.lower_jumps = jumps;
            return eval_qmf(x, p, MFSide::Upper);
        },
        py::arg("x"), py::arg("mean"), py::arg("gamma"), py::arg("jumps"),
        "Quantum membership function value");

    m.def("tic", &tic, py::arg("measured"), py::arg("predicted"),
          "Theil's inequality coefficient");

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("rho", &TrainConfig::rho)
        .def_readwrite("delta1", &TrainConfig::delta1)
        .def_readwrite("n_s", &TrainConfig::n_s)
        .def_readwrite("gamma", &TrainConfig::gamma)
        .def_readwrite("eta", &TrainConfig::eta)
        .def_readwrite("sigma0", &TrainConfig::sigma0)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<Network>(m, "Network")
        .def_property_readonly("rule_count",
                               [](const Network& n) { return n.rules.size(); })
        .def_property_readonly("input_dim", [](const Network& n) { return n.input_dim; })
        .def_property_readonly("type1", [](const Network& n) { return n.type1; })
        .def_property_readonly("q", &Network::q)
        .def("predict", &predict_one, py::arg("x"))
        .def("predict_many", &predict_many, py::arg("x"))
        .def(
            "save",
            [](const Network& n, const std::string& path, const std::string& coeff) {
                save_network(n, coeff_from_name(coeff), path);
            },
            py::arg("path"), py::arg("coeff"));

    m.def(
        "train_online",
        [](const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
           const TrainConfig& cfg, bool type1) {
            TrainResult r = train_online(inputs, targets, cfg, type1);
            return r.network;
        },
        py::arg("inputs"), py::arg("targets"), py::arg("config") = TrainConfig{},
        py::arg("type1") = false, "Online evolving training over a sample stream");

    m.def("reduce_to_type1", &reduce_to_type1, py::arg("network"));

    m.def(
        "load_network",
        [](const std::string& path) {
            auto [net, kind] = load_network(path);
            return py::make_tuple(std::move(net), std::string(coeff_name(kind)));
        },
        py::arg("path"));

    m.def(
        "synthesize_csv",
        [](const std::string& path, int n, double noise, std::uint64_t seed) {
            save_flight_csv(synthesize(table_v_ols_params(), ManeuverConfig{}, n, noise, seed),
                            path);
        },
        py::arg("path"), py::arg("n") = 2128, py::arg("noise") = 0.0, py::arg("seed") = 0,
        "Write a synthetic flight dataset generated from the built-in linear models");

    m.def(
        "load_flight_csv",
        [](const std::string& path) {
            const Dataset d = load_flight_csv(path);
            Eigen::VectorXd t(d.size());
            Eigen::MatrixXd inputs(d.size(), 8);
            Eigen::MatrixXd targets(d.size(), 6);
            for (std::size_t k = 0; k < d.size(); ++k) {
                t[k] = d[k].t;
                for (int i = 0; i < 8; ++i) inputs(k, i) = d[k].input(i);
                for (int c = 0; c < 6; ++c)
                    targets(k, c) = d[k].has_targets ? d[k].target(c) : 0.0;
            }
            return py::make_tuple(t, inputs, targets);
        },
        py::arg("path"), "Returns (t, inputs Nx8, targets Nx6) in schema order");

    m.def("input_names", [] {
        return std::vector<std::string>(kInputNames.begin(), kInputNames.end());
    });

    m.def(
        "coeff_regressors",
        [](const std::string& coeff) { return coeff_regressors(coeff_from_name(coeff)); },
        py::arg("coeff"), "Schema input indices used by a coefficient model");

    m.def(
        "ols_fit_csv",
        [](const std::string& path, const std::string& coeff) {
            const AeroParams p = ols_fit(load_flight_csv(path), coeff_from_name(coeff));
            return py::make_tuple(p.bias, p.slopes);
        },
        py::arg("path"), py::arg("coeff"), "Returns (bias, slopes) in regressor order");
}
