#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "idapbc/checkpoint.hpp"
#include "idapbc/cli.hpp"
#include "idapbc/config.hpp"
#include "idapbc/controller.hpp"
#include "idapbc/integrate.hpp"
#include "idapbc/numerics.hpp"
#include "idapbc/optimize.hpp"

namespace py = pybind11;
using namespace idapbc;

namespace {

Mat mat_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("matrix must be nonempty");
    Mat m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::invalid_argument("matrix rows must have equal length");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::vector<double>> rows_from_mat(const Mat& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    return rows;
}

py::dict trajectory_dict(const Trajectory& traj) {
    py::dict d;
    d["times"] = traj.times;
    std::vector<std::vector<double>> states(traj.states.begin(), traj.states.end());
    d["states"] = states;
    std::vector<double> inputs;
    inputs.reserve(traj.inputs.size());
    for (const Vec& u : traj.inputs) inputs.push_back(u.empty() ? 0.0 : u[0]);
    d["inputs"] = inputs;
    return d;
}

struct ModelWithConfig {
    LoadedModel loaded;
    RunConfig rc;
};

ModelWithConfig load_pair(const std::string& model_json, const std::string& config_yaml) {
    return {model_from_json(model_json), parse_config(config_yaml)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sparse IDA-PBC controller synthesis (C++ core)";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<CheckpointError>(m, "CheckpointError");
    py::register_exception<DivergenceError>(m, "DivergenceError");

    m.def(
        "eigenvalues",
        [](const std::vector<std::vector<double>>& rows) { return eigenvalues(mat_from_rows(rows)); },
        py::arg("matrix"), "Eigenvalues of a small dense matrix (n <= 4).");

    m.def(
        "matrix_exponential",
        [](const std::vector<std::vector<double>>& rows, double t) {
            return rows_from_mat(matrix_exponential(mat_from_rows(rows), t));
        },
        py::arg("matrix"), py::arg("t") = 1.0, "exp(A t) for a small dense matrix.");

    m.def(
        "validate_config",
        [](const std::string& config_yaml) {
            const RunConfig rc = parse_config(config_yaml);
            py::dict d;
            d["task"] = std::string(task_kind_name(rc.train.task));
            d["epochs"] = rc.train.epochs;
            d["seed"] = rc.train.seed;
            d["horizon"] = rc.train.horizon;
            d["steps"] = rc.train.steps;
            d["library_terms"] = rc.train.library.size();
            d["output_dir"] = rc.output_dir;
            return d;
        },
        py::arg("config_yaml"), "Parses a YAML run configuration and returns its key facts.");

    m.def(
        "train_yaml",
        [](const std::string& config_yaml, const std::string& out_dir) {
            RunConfig rc = parse_config(config_yaml);
            if (!out_dir.empty()) rc.output_dir = out_dir;
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(rc.train, rc.output_dir);
            }
            int active = 0;
            for (const auto& entry : r.final_model.entries) active += active_term_count(entry);
            py::dict d;
            d["initial_loss"] = r.history.front().total;
            d["final_loss"] = r.history.back().total;
            d["best_loss"] = r.best_loss;
            d["best_epoch"] = r.best_epoch;
            d["active_terms"] = active;
            d["model_json"] = model_to_json(r.final_model, rc.train, rc.train.epochs - 1,
                                            r.history.back().total);
            return d;
        },
        py::arg("config_yaml"), py::arg("out_dir") = std::string(),
        "Runs the training loop; writes checkpoints when out_dir is set.");

    m.def(
        "simulate_model",
        [](const std::string& model_json, const std::string& config_yaml, int periods) {
            if (periods < 1) throw std::invalid_argument("periods must be at least 1");
            const auto [loaded, rc] = load_pair(model_json, config_yaml);
            const TrainConfig& t = rc.train;
            const Trajectory traj =
                simulate(loaded.model, t, t.horizon * periods, t.steps * periods);
            return trajectory_dict(traj);
        },
        py::arg("model_json"), py::arg("config_yaml"), py::arg("periods") = 1,
        "Closed-loop rollout of a trained model over N periods.");

    m.def(
        "analyze_model",
        [](const std::string& model_json, const std::string& config_yaml) {
            const auto [loaded, rc] = load_pair(model_json, config_yaml);
            const TrainConfig& t = rc.train;
            const PlantSystem plant = electromech_plant(t.plant);
            const GateSet gates = deterministic_gates(loaded.model);
            const Vec x0{t.q0, t.p0, loaded.model.initial_charge};
            const MonodromyResult mr = monodromy(
                [&](double, const Vec& x) { return closed_loop_drift(plant, loaded.model, x, gates); },
                x0, t.horizon, t.steps);
            bool near_periodic = false, unstable = false;
            for (const ComplexScalar& z : mr.multipliers) {
                if (std::abs(z - ComplexScalar(1.0, 0.0)) <= 0.01) near_periodic = true;
                if (std::abs(z) > 1.01) unstable = true;
            }
            py::dict d;
            d["monodromy"] = rows_from_mat(mr.monodromy);
            d["multipliers"] = mr.multipliers;
            d["near_periodic"] = near_periodic;
            d["unstable"] = unstable;
            return d;
        },
        py::arg("model_json"), py::arg("config_yaml"),
        "Monodromy matrix and Floquet multipliers of the learned closed loop.");

    m.def(
        "export_model",
        [](const std::string& model_json) {
            const LoadedModel loaded = model_from_json(model_json);
            const std::vector<std::string> names{"q", "p", "Q"};
            py::dict expr;
            int total = 0;
            for (int i = 0; i < kNumDesiredEntries; ++i) {
                const auto entry = static_cast<DesiredEntry>(i);
                expr[desired_entry_name(entry)] =
                    export_expression(loaded.model.entry(entry), names);
                total += active_term_count(loaded.model.entry(entry));
            }
            py::dict d;
            d["expressions"] = expr;
            d["initial_charge"] = loaded.model.initial_charge;
            d["active_terms"] = total;
            d["term_budget"] = kNumDesiredEntries * loaded.model.library().size();
            return d;
        },
        py::arg("model_json"), "Closed-form expressions and active-term counts of a model.");

    m.def(
        "check_matching",
        [](const std::string& model_json, const std::string& config_yaml) {
            const auto [loaded, rc] = load_pair(model_json, config_yaml);
            const TrainConfig& t = rc.train;
            const PlantSystem plant = electromech_plant(t.plant);
            const GateSet gates = deterministic_gates(loaded.model);
            const Vec x0{t.q0, t.p0, loaded.model.initial_charge};
            const Trajectory traj = integrate(
                [&](double, const Vec& x) { return closed_loop_drift(plant, loaded.model, x, gates); },
                x0, t.horizon, t.steps);
            double mean_sq = 0.0, max_sq = 0.0;
            for (const Vec& x : traj.states) {
                const double sq = norm2_squared(residual_eta(plant, loaded.model, x, gates));
                mean_sq += sq;
                max_sq = std::max(max_sq, sq);
            }
            mean_sq /= static_cast<double>(traj.states.size());
            py::dict d;
            d["mean_eta_sq"] = mean_sq;
            d["max_eta_sq"] = max_sq;
            return d;
        },
        py::arg("model_json"), py::arg("config_yaml"),
        "Mean and max matching residual over one closed-loop period.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a CLI command; returns (exit_code, stdout, stderr).");
}
