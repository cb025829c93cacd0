#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qconv/ansatz.hpp"
#include "qconv/error.hpp"
#include "qconv/experiment.hpp"
#include "qconv/grad.hpp"
#include "qconv/metrics.hpp"
#include "qconv/noise.hpp"
#include "qconv/simcore.hpp"

namespace py = pybind11;
using namespace qconv;

PYBIND11_MODULE(_qconv, m) {
    m.doc() = "Statevector simulation, quantum convolution ansaetze and training pipelines";

    py::register_exception<Error>(m, "QconvError", PyExc_ValueError);

    py::enum_<AnsatzKind>(m, "AnsatzKind")
        .value("HQconv", AnsatzKind::HQconv)
        .value("FQconv", AnsatzKind::FQconv);

    py::class_<CircuitSpec>(m, "Circuit")
        .def_property_readonly("num_qubits", &CircuitSpec::num_qubits)
        .def_property_readonly("num_params", &CircuitSpec::num_params)
        .def_property_readonly("num_data_angles", &CircuitSpec::num_data_angles)
        .def_property_readonly("observable", &CircuitSpec::observable_subset)
        .def("dump", &CircuitSpec::dump)
        .def("__repr__", [](const CircuitSpec &c) {
            return "<Circuit qubits=" + std::to_string(c.num_qubits()) +
                   " params=" + std::to_string(c.num_params()) + ">";
        });

    m.def(
        "build_ansatz",
        [](const std::string &kind, std::size_t rows, std::size_t cols, std::size_t channels, std::size_t stride,
           std::vector<std::size_t> observable) {
            return build_ansatz({parse_ansatz_kind(kind), {rows, cols, channels}, stride, std::move(observable)});
        },
        py::arg("kind"), py::arg("rows"), py::arg("cols"), py::arg("channels"), py::arg("stride"),
        py::arg("observable") = std::vector<std::size_t>{});

    m.def(
        "encode_window",
        [](const std::vector<double> &pixels, std::size_t rows, std::size_t cols, std::size_t channels) {
            return encode_window(pixels, {rows, cols, channels});
        },
        py::arg("pixels"), py::arg("rows"), py::arg("cols"), py::arg("channels"));

    m.def(
        "expectation",
        [](const CircuitSpec &c, const std::vector<double> &params, const std::vector<double> &data) {
            return circuit_expectation(c, params, data);
        },
        py::arg("circuit"), py::arg("params"), py::arg("data"));

    m.def(
        "noisy_expectation",
        [](const CircuitSpec &c, const std::vector<double> &params, const std::vector<double> &data, double level,
           std::size_t trajectories, std::uint64_t seed) {
            return noisy_expectation(c, params, data, NoiseConfig{level, trajectories, seed});
        },
        py::arg("circuit"), py::arg("params"), py::arg("data"), py::arg("level"), py::arg("trajectories") = 8,
        py::arg("seed") = 0);

    m.def(
        "shift_rule_gradient",
        [](const CircuitSpec &c, const std::vector<double> &params, const std::vector<double> &data) {
            return shift_rule_gradient(c, params, std::span<const double>(data));
        },
        py::arg("circuit"), py::arg("params"), py::arg("data"));

    m.def(
        "finite_difference_gradient",
        [](const CircuitSpec &c, const std::vector<double> &params, const std::vector<double> &data, double h) {
            return finite_difference_gradient(c, params, data, h);
        },
        py::arg("circuit"), py::arg("params"), py::arg("data"), py::arg("h") = 1e-4);

    m.def(
        "savgol_baseline",
        [](const std::vector<double> &curve, std::size_t window, std::size_t polyorder) {
            return savgol_baseline(curve, window, polyorder);
        },
        py::arg("curve"), py::arg("window") = kDefaultSmoothingWindow, py::arg("polyorder") = kDefaultSmoothingOrder);

    m.def(
        "smoothness_stats",
        [](const std::vector<double> &curve, std::size_t window, std::size_t polyorder) {
            const auto s = smoothness_stats(curve, window, polyorder);
            return py::make_tuple(s.avg_l1, s.std_dev);
        },
        py::arg("curve"), py::arg("window") = kDefaultSmoothingWindow, py::arg("polyorder") = kDefaultSmoothingOrder,
        "Returns (avg_l1, std_dev) of the gap to the Savitzky-Golay baseline.");

    m.def(
        "confusion_matrix",
        [](const std::vector<std::size_t> &pred, const std::vector<std::size_t> &truth, std::size_t classes) {
            const auto cm = confusion_matrix(pred, truth, classes);
            std::vector<std::vector<std::size_t>> rows(classes, std::vector<std::size_t>(classes));
            for (std::size_t i = 0; i < classes; ++i) {
                for (std::size_t j = 0; j < classes; ++j) {
                    rows[i][j] = cm.at(i, j);
                }
            }
            return rows;
        },
        py::arg("predictions"), py::arg("labels"), py::arg("classes") = 10,
        "Rows are true classes, columns predictions.");

    m.def(
        "load_experiment_config_json",
        [](const std::filesystem::path &path) { return resolved_config_json(load_experiment_config(path)); },
        py::arg("path"), "Loads and validates a config file; returns the resolved JSON text.");

    m.def(
        "train_from_config",
        [](const std::filesystem::path &path) {
            const auto config = load_experiment_config(path);
            TrainOutputs out;
            {
                py::gil_scoped_release release;
                out = run_train(config);
            }
            py::list epochs;
            for (const auto &e : out.record.epochs) {
                py::dict d;
                d["epoch"] = e.epoch;
                d["train_loss"] = e.train_loss;
                d["train_accuracy"] = e.train_accuracy;
                d["eval_accuracy"] = e.eval_accuracy ? py::cast(*e.eval_accuracy) : py::none();
                d["wall_time_s"] = e.wall_time_s;
                epochs.append(d);
            }
            return epochs;
        },
        py::arg("path"), "Runs the train pipeline; returns one dict per epoch.");
}
