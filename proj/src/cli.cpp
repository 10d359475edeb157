#include "idapbc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "idapbc/checkpoint.hpp"
#include "idapbc/config.hpp"
#include "idapbc/controller.hpp"
#include "idapbc/integrate.hpp"
#include "idapbc/numerics.hpp"
#include "idapbc/optimize.hpp"

namespace idapbc {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kStateNames{"q", "p", "Q"};

std::string fixed4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string complex4(const ComplexScalar& z) {
    if (std::abs(z.imag()) < 1e-12) return fixed4(z.real());
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.4f%+.4fi", z.real(), z.imag());
    return buf;
}

void warn_airgap(const Trajectory& traj, std::ostream& err) {
    if (const auto t = first_airgap_violation(traj))
        err << "warning: airgap q <= 0 from t = " << *t << " (model leaves the physical region)\n";
}

struct CliOptions {
    std::string config_path;
    std::string model_path;
    std::string out_dir;
    int periods = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

RunConfig load_run_config(const CliOptions& opt) {
    RunConfig rc = load_config(opt.config_path);
    if (opt.seed_given) rc.train.seed = opt.seed;
    if (!opt.out_dir.empty()) rc.output_dir = opt.out_dir;
    return rc;
}

/// Closed-loop drift of a loaded model under the configured plant.
struct ClosedLoop {
    PlantSystem plant;
    const DesiredSystem& ds;
    GateSet gates;

    explicit ClosedLoop(const DesiredSystem& model, const TrainConfig& cfg)
        : plant(electromech_plant(cfg.plant)), ds(model), gates(deterministic_gates(model)) {}

    Vec drift(const Vec& x) const { return closed_loop_drift(plant, ds, x, gates); }
    Vec input(const Vec& x) const { return feedback(plant, ds, x, gates); }
    Vec eta(const Vec& x) const { return residual_eta(plant, ds, x, gates); }
};

int cmd_train(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    const RunConfig rc = load_run_config(opt);
    if (rc.output_dir.empty())
        throw ConfigError("no output directory: pass --out or set output_dir in the config");

    const TrainResult res = train(rc.train, rc.output_dir);

    int active = 0;
    for (const auto& m : res.final_model.entries) active += active_term_count(m);
    const int budget = kNumDesiredEntries * static_cast<int>(rc.train.library.size());

    out << "task: " << task_kind_name(rc.train.task) << "\n";
    out << "epochs: " << rc.train.epochs << "\n";
    out << "initial loss: " << res.history.front().total << "\n";
    out << "final loss: " << res.history.back().total << "\n";
    out << "best loss: " << res.best_loss << " at epoch " << res.best_epoch << "\n";
    out << "active terms: " << active << " / " << budget << "\n";
    out << "outputs: " << rc.output_dir << "\n";

    const Trajectory traj = simulate(res.final_model, rc.train, rc.train.horizon, rc.train.steps);
    warn_airgap(traj, err);
    return 0;
}

int cmd_simulate(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    const RunConfig rc = load_run_config(opt);
    const LoadedModel lm = load_model(opt.model_path);
    if (opt.periods < 1) throw ConfigError("--periods must be at least 1");
    const TrainConfig& t = rc.train;

    const ClosedLoop loop(lm.model, t);
    const Vec x0{t.q0, t.p0, lm.model.initial_charge};
    const int steps = t.steps * opt.periods;

    Trajectory traj;
    try {
        traj = integrate([&](double, const Vec& x) { return loop.drift(x); }, x0,
                         t.horizon * opt.periods, steps,
                         [&](double, const Vec& x) { return loop.input(x); });
    } catch (const DivergenceError& e) {
        const double h = t.horizon / t.steps;
        err << "error: closed loop diverged; last valid time t = "
            << (e.step() > 0 ? (e.step() - 1) * h : 0.0) << "\n";
        return 2;
    }

    const fs::path dir = rc.output_dir.empty() ? fs::path(".") : fs::path(rc.output_dir);
    fs::create_directories(dir);
    std::ofstream csv(dir / "trajectory.csv");
    write_trajectory_csv(csv, traj);

    for (int p = 0; p < opt.periods; ++p) {
        double acc = 0.0;
        for (int k = p * t.steps; k <= (p + 1) * t.steps; ++k)
            acc += norm2_squared(loop.eta(traj.states[k]));
        out << "period " << (p + 1) << ": mean |eta|^2 = " << acc / (t.steps + 1) << "\n";
    }
    out << "wrote " << (dir / "trajectory.csv").string() << "\n";
    warn_airgap(traj, err);
    return 0;
}

int cmd_analyze(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    const RunConfig rc = load_run_config(opt);
    const LoadedModel lm = load_model(opt.model_path);
    const TrainConfig& t = rc.train;
    const double tol = 0.01;

    const ClosedLoop loop(lm.model, t);
    const Vec x0{t.q0, t.p0, lm.model.initial_charge};

    MonodromyResult mr;
    try {
        mr = monodromy([&](double, const Vec& x) { return loop.drift(x); }, x0, t.horizon, t.steps);
    } catch (const DivergenceError& e) {
        err << "error: closed loop diverged at step " << e.step() << "\n";
        return 2;
    }

    out << "monodromy matrix over one period T = " << t.horizon << ":\n";
    for (std::size_t i = 0; i < mr.monodromy.rows(); ++i) {
        out << " ";
        for (std::size_t j = 0; j < mr.monodromy.cols(); ++j)
            out << " " << fixed4(mr.monodromy(i, j));
        out << "\n";
    }
    out << "multipliers (descending modulus):\n";
    for (const ComplexScalar& z : mr.multipliers)
        out << "  " << complex4(z) << "  (modulus " << fixed4(std::abs(z)) << ")\n";

    bool near_periodic = false;
    bool unstable = false;
    for (const ComplexScalar& z : mr.multipliers) {
        if (std::abs(z - ComplexScalar(1.0, 0.0)) <= tol) near_periodic = true;
        if (std::abs(z) > 1.0 + tol) unstable = true;
    }
    if (near_periodic) out << "verdict: near-periodic (a multiplier lies within " << tol << " of 1)\n";
    if (unstable) out << "verdict: unstable directions present (a modulus exceeds " << 1.0 + tol << ")\n";
    if (!near_periodic && !unstable) out << "verdict: no near-unit multipliers; orbit contracts\n";
    return 0;
}

int cmd_export(const CliOptions& opt, std::ostream& out, std::ostream&) {
    const LoadedModel lm = load_model(opt.model_path);
    out << controller_report(lm.model, kStateNames);
    int total = 0;
    out << "active terms:";
    for (int m = 0; m < kNumDesiredEntries; ++m) {
        const int n = active_term_count(lm.model.entries[m]);
        total += n;
        out << " " << desired_entry_name(static_cast<DesiredEntry>(m)) << "=" << n;
    }
    out << "  total=" << total << "/"
        << kNumDesiredEntries * lm.model.library().size() << "\n";
    return 0;
}

int cmd_check_matching(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    const RunConfig rc = load_run_config(opt);
    const LoadedModel lm = load_model(opt.model_path);
    const TrainConfig& t = rc.train;

    const ClosedLoop loop(lm.model, t);
    const Vec x0{t.q0, t.p0, lm.model.initial_charge};

    Trajectory traj;
    try {
        traj = integrate([&](double, const Vec& x) { return loop.drift(x); }, x0, t.horizon,
                         t.steps);
    } catch (const DivergenceError& e) {
        err << "error: closed loop diverged at step " << e.step() << "\n";
        return 2;
    }

    double mean_sq = 0.0, max_sq = 0.0;
    Vec comp_mean(3, 0.0), comp_max(3, 0.0);
    for (const Vec& x : traj.states) {
        const Vec eta = loop.eta(x);
        const double sq = norm2_squared(eta);
        mean_sq += sq;
        max_sq = std::max(max_sq, sq);
        for (int i = 0; i < 3; ++i) {
            comp_mean[i] += std::abs(eta[i]);
            comp_max[i] = std::max(comp_max[i], std::abs(eta[i]));
        }
    }
    const double n = static_cast<double>(traj.states.size());
    mean_sq /= n;

    out << "matching residual over one period T = " << t.horizon << ":\n";
    out << "  mean |eta|^2 = " << mean_sq << "\n";
    out << "  max  |eta|^2 = " << max_sq << "\n";
    out << "per-component |eta_i| (mean, max):\n";
    for (int i = 0; i < 3; ++i)
        out << "  " << kStateNames[i] << ": " << comp_mean[i] / n << ", " << comp_max[i] << "\n";
    warn_airgap(traj, err);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse IDA-PBC controller synthesis for the electromechanical plant"};
    app.require_subcommand(1);

    CliOptions opt;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_path, "YAML run configuration")->required();
    };
    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--model", opt.model_path, "model checkpoint file")->required();
    };
    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("--out", opt.out_dir, "output directory (overrides config output_dir)");
    };
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", opt.seed, "seed override")->each([&](const std::string&) {
            opt.seed_given = true;
        });
    };

    CLI::App* train_cmd = app.add_subcommand("train", "train a controller from a config");
    add_config(train_cmd);
    add_out(train_cmd);
    add_seed(train_cmd);

    CLI::App* sim_cmd = app.add_subcommand("simulate", "roll out a trained controller");
    add_model(sim_cmd);
    add_config(sim_cmd);
    add_out(sim_cmd);
    sim_cmd->add_option("--periods", opt.periods, "number of periods to integrate");

    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "monodromy matrix and orbit-stability verdict");
    add_model(analyze_cmd);
    add_config(analyze_cmd);

    CLI::App* export_cmd = app.add_subcommand("export", "print the learned closed-form expressions");
    add_model(export_cmd);

    CLI::App* check_cmd =
        app.add_subcommand("check-matching", "matching-residual report over one period");
    add_model(check_cmd);
    add_config(check_cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(opt, out, err);
        if (sim_cmd->parsed()) return cmd_simulate(opt, out, err);
        if (analyze_cmd->parsed()) return cmd_analyze(opt, out, err);
        if (export_cmd->parsed()) return cmd_export(opt, out, err);
        if (check_cmd->parsed()) return cmd_check_matching(opt, out, err);
        err << "error: no command\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const CheckpointError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const SingularMatrixError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace idapbc
