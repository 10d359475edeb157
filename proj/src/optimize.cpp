#include "idapbc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "idapbc/autodiff.hpp"
#include "idapbc/checkpoint.hpp"
#include "idapbc/integrate.hpp"

namespace idapbc {

const char* task_kind_name(TaskKind task) {
    switch (task) {
        case TaskKind::Regulation: return "regulation";
        case TaskKind::Oscillation: return "oscillation";
    }
    throw std::invalid_argument("unknown task kind");
}

const char* lr_schedule_name(LrSchedule schedule) {
    switch (schedule) {
        case LrSchedule::Constant: return "constant";
        case LrSchedule::Cosine: return "cosine";
    }
    throw std::invalid_argument("unknown learning-rate schedule");
}

double scheduled_learning_rate(double base, LrSchedule schedule, int epoch, int epochs) {
    if (schedule == LrSchedule::Constant) return base;
    const double frac = epochs > 1 ? static_cast<double>(epoch) / (epochs - 1) : 0.0;
    return base * 0.5 * (1.0 + std::cos(frac * 3.14159265358979323846));
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw std::invalid_argument("adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw std::invalid_argument("adam eps must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (steps < 2 || steps % 2 != 0)
        throw std::invalid_argument("steps must be even and at least 2");
    if (library.n_vars != 3)
        throw std::invalid_argument("the training pipeline needs a 3-variable library");
    if (library.size() == 0) throw std::invalid_argument("library is empty");
    plant.validate();
    regulation.validate();
    oscillation.validate();
    total.validate();
    if (!std::isfinite(q0) || !std::isfinite(p0) || !std::isfinite(charge0))
        throw std::invalid_argument("initial state must be finite");
    if (!(init_xi_scale >= 0.0) || !std::isfinite(init_log_alpha))
        throw std::invalid_argument("bad initialization settings");
}

ParameterVector ParameterVector::pack(const DesiredSystem& ds) {
    ds.validate();
    const std::size_t d = ds.library().size();
    ParameterVector pv;
    pv.values.reserve(kNumDesiredEntries * 2 * d + 1);
    for (const SparseLinearModel& m : ds.entries) {
        pv.values.insert(pv.values.end(), m.xi.begin(), m.xi.end());
        pv.values.insert(pv.values.end(), m.log_alpha.begin(), m.log_alpha.end());
    }
    pv.values.push_back(ds.initial_charge);
    return pv;
}

void ParameterVector::unpack_into(DesiredSystem& ds) const {
    const std::size_t d = ds.library().size();
    if (values.size() != static_cast<std::size_t>(expected_size(ds.library())))
        throw std::invalid_argument("parameter vector length does not match the library");
    for (int m = 0; m < kNumDesiredEntries; ++m) {
        const double* base = values.data() + static_cast<std::size_t>(m) * 2 * d;
        ds.entries[m].xi.assign(base, base + d);
        ds.entries[m].log_alpha.assign(base + d, base + 2 * d);
    }
    ds.initial_charge = values.back();
}

GateNoise GateNoise::draw(const CounterRng& rng, std::uint64_t epoch, int terms) {
    GateNoise noise;
    for (int m = 0; m < kNumDesiredEntries; ++m) {
        noise.u[m].resize(terms);
        for (int j = 0; j < terms; ++j)
            noise.u[m][j] = rng.uniform(m, epoch * static_cast<std::uint64_t>(terms) + j);
    }
    return noise;
}

namespace {

constexpr double kDivergenceBound = 1e6;
constexpr double kDivergencePenalty = 1e6;

bool is_hard_zero(double x) { return x == 0.0; }
bool is_hard_zero(const Rev& x) { return x.i < 0 && x.v == 0.0; }

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

/// Evaluates the full objective for one gate sample. Returns the total as T
/// and fills the double-valued breakdown. The closed loop uses the algebraic
/// identity g g^+ = diag(0,0,1) of the single-input plant, so the residual is
/// confined to the first two coordinates and the third follows the desired
/// drift exactly.
template <class T>
T run_pipeline(const std::vector<T>& theta, const TrainConfig& cfg, const GateNoise& noise,
               LossBreakdown& bd) {
    const PolynomialLibrary& lib = cfg.library;
    const int d = static_cast<int>(lib.size());
    const HardConcreteConstants hc{};
    const ElectromechParams& par = cfg.plant;

    bd = LossBreakdown{};
    bd.signature.gate_clamp.assign(static_cast<std::size_t>(kNumDesiredEntries) * d, 1);

    std::array<std::vector<T>, kNumDesiredEntries> w;
    T sparse = T(0.0);
    for (int m = 0; m < kNumDesiredEntries; ++m) {
        w[m].resize(d);
        const T* xi = theta.data() + static_cast<std::size_t>(m) * 2 * d;
        const T* la = xi + d;
        for (int j = 0; j < d; ++j) {
            const T gate = noise.empty() ? hard_concrete_deterministic(la[j], hc)
                                         : hard_concrete_sample(la[j], noise.u[m][j], hc);
            const double gv = value_of(gate);
            bd.signature.gate_clamp[static_cast<std::size_t>(m) * d + j] =
                gv <= 0.0 ? 0 : (gv >= 1.0 ? 2 : 1);
            w[m][j] = gate * xi[j];
            sparse = sparse + l0_term(la[j], hc);
        }
    }

    const T q0_charge = cfg.learns_initial_charge() ? theta.back() : T(cfg.charge0);
    std::array<T, 3> x{T(cfg.q0), T(cfg.p0), q0_charge};

    const int steps = cfg.steps;
    const double h = cfg.horizon / steps;

    std::vector<T> feat(d), jac(static_cast<std::size_t>(d) * 3);
    auto dot = [&](const std::vector<T>& coeff) {
        T acc = T(0.0);
        for (int j = 0; j < d; ++j)
            if (!is_hard_zero(coeff[j])) acc = acc + coeff[j] * feat[j];
        return acc;
    };

    struct Eval {
        std::array<T, 3> closed;
        T u;
        T eta_sq;
    };
    auto eval_at = [&](const std::array<T, 3>& xx) {
        features_into(lib, xx.data(), feat.data());
        feature_jacobian_into(lib, xx.data(), jac.data());
        const T a = dot(w[0]);
        const T b = dot(w[1]);
        const T c = dot(w[2]);
        const T dd = dot(w[3]);
        const T e = dot(w[4]);
        const T f = dot(w[5]);
        std::array<T, 3> gh;
        for (int i = 0; i < 3; ++i) {
            T acc = T(0.0);
            for (int j = 0; j < d; ++j)
                if (!is_hard_zero(w[6][j])) acc = acc + w[6][j] * jac[static_cast<std::size_t>(j) * 3 + i];
            gh[i] = acc;
        }
        const std::array<T, 3> fp = electromech_drift(par, xx);
        const T fd1 = a * gh[1] + b * gh[2] - dd * gh[0];
        const T fd2 = c * gh[2] - a * gh[0] - e * gh[1];
        const T fd3 = T(0.0) - b * gh[0] - c * gh[1] - f * gh[2];
        Eval ev;
        ev.closed = {fp[0], fp[1], fd3};
        ev.u = (fd3 - fp[2]) * par.resistance;
        const T e1 = fd1 - fp[0];
        const T e2 = fd2 - fp[1];
        ev.eta_sq = e1 * e1 + e2 * e2;
        return ev;
    };

    std::vector<std::array<T, 3>> xs;
    std::vector<T> us;
    xs.reserve(steps + 1);
    us.reserve(steps + 1);
    T mc_acc = T(0.0);

    auto state_ok = [](const std::array<T, 3>& xx) {
        for (const T& v : xx) {
            const double s = value_of(v);
            if (!std::isfinite(s) || std::abs(s) > kDivergenceBound) return false;
        }
        return true;
    };

    for (int k = 0; k <= steps; ++k) {
        if (!state_ok(x)) {
            bd.diverged = true;
            break;
        }
        bd.steps_survived = k;
        const Eval ev = eval_at(x);
        xs.push_back(x);
        us.push_back(ev.u);
        mc_acc = mc_acc + ev.eta_sq;
        if (k == steps) break;
        const std::array<T, 3>& k1 = ev.closed;
        std::array<T, 3> x2, x3, x4;
        for (int i = 0; i < 3; ++i) x2[i] = x[i] + (0.5 * h) * k1[i];
        const std::array<T, 3> k2 = eval_at(x2).closed;
        for (int i = 0; i < 3; ++i) x3[i] = x[i] + (0.5 * h) * k2[i];
        const std::array<T, 3> k3 = eval_at(x3).closed;
        for (int i = 0; i < 3; ++i) x4[i] = x[i] + h * k3[i];
        const std::array<T, 3> k4 = eval_at(x4).closed;
        for (int i = 0; i < 3; ++i)
            x[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    if (bd.diverged) {
        const double penalty = kDivergencePenalty + (steps - bd.steps_survived);
        bd.total = penalty;
        return T(penalty);
    }

    const T mc = mc_acc / static_cast<double>(steps + 1);

    T task;
    if (cfg.task == TaskKind::Regulation) {
        task = detail::regulation_cost_t(xs, us, h, cfg.regulation);
    } else {
        OscillationWeights ow = cfg.oscillation;
        ow.period = cfg.horizon;
        const auto terms = detail::oscillation_cost_t(xs, us, h, q0_charge, ow);
        task = detail::oscillation_total(terms, ow);
        bd.j_mid = value_of(terms.j_mid);
        bd.j_eigen = ow.gamma1 * value_of(terms.j_eigen);
        bd.j_eff = ow.gamma2 * value_of(terms.j_eff);
        bd.j_period = ow.gamma3 * value_of(terms.j_period);
        bd.signature.argmax_q = terms.argmax_q;
        bd.signature.argmax_p = terms.argmax_p;
        bd.signature.sign_q =
            sign_of(value_of(xs[terms.argmax_q][0]) - value_of(xs[steps - terms.argmax_q][0]));
        bd.signature.sign_p =
            sign_of(value_of(xs[terms.argmax_p][1]) - value_of(xs[steps - terms.argmax_p][1]));
        bd.signature.sign_period = sign_of(value_of(q0_charge) - value_of(xs[steps][2]));
    }

    const T total = task + cfg.total.lambda_mc * mc + cfg.total.gamma_sparse * sparse;
    bd.task = value_of(task);
    bd.mc = value_of(mc);
    bd.sparse = value_of(sparse);
    bd.total = value_of(total);
    return total;
}

void check_params(const ParameterVector& params, const TrainConfig& cfg) {
    if (params.values.size() != static_cast<std::size_t>(ParameterVector::expected_size(cfg.library)))
        throw std::invalid_argument("parameter vector length does not match the config library");
    for (double v : params.values)
        if (!std::isfinite(v)) throw std::invalid_argument("parameter vector must be finite");
}

void check_noise(const GateNoise& noise, const TrainConfig& cfg) {
    if (noise.empty()) return;
    for (const Vec& u : noise.u)
        if (u.size() != cfg.library.size())
            throw std::invalid_argument("gate noise length does not match the library");
}

}  // namespace

LossBreakdown loss_of(const ParameterVector& params, const TrainConfig& cfg,
                      const GateNoise& noise) {
    cfg.validate();
    check_params(params, cfg);
    check_noise(noise, cfg);
    LossBreakdown bd;
    run_pipeline<double>(params.values, cfg, noise, bd);
    return bd;
}

LossBreakdown gradient(const ParameterVector& params, const TrainConfig& cfg,
                       const GateNoise& noise, ParameterVector& grad_out) {
    cfg.validate();
    check_params(params, cfg);
    check_noise(noise, cfg);

    static thread_local Tape tape;
    tape.clear();
    ad::TapeScope scope(tape);

    std::vector<Rev> theta;
    theta.reserve(params.values.size());
    for (double v : params.values) theta.push_back(ad::leaf(v));

    LossBreakdown bd;
    const Rev total = run_pipeline<Rev>(theta, cfg, noise, bd);

    grad_out.values.assign(params.values.size(), 0.0);
    if (!bd.diverged && total.i >= 0) {
        const std::vector<double> adj = tape.adjoints(total.i);
        for (std::size_t k = 0; k < theta.size(); ++k) grad_out.values[k] = adj[theta[k].i];
    }
    return bd;
}

void adam_step(AdamState& state, Vec& params, const Vec& grad, const TrainConfig& cfg) {
    if (state.m.size() != params.size() || state.v.size() != params.size() ||
        grad.size() != params.size())
        throw std::invalid_argument("adam buffers must match the parameter length");
    state.t += 1;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

ParameterVector initial_parameters(const TrainConfig& cfg) {
    cfg.validate();
    const int d = static_cast<int>(cfg.library.size());
    ParameterVector pv;
    pv.values.assign(ParameterVector::expected_size(cfg.library), 0.0);
    const CounterRng rng(cfg.seed);
    // Stream 1000+m draws the xi initialization so gate-noise streams 0..6
    // stay untouched.
    for (int m = 0; m < kNumDesiredEntries; ++m) {
        for (int j = 0; j < d; ++j) {
            pv.values[static_cast<std::size_t>(m) * 2 * d + j] =
                rng.uniform_range(1000 + m, j, -cfg.init_xi_scale, cfg.init_xi_scale);
            pv.values[static_cast<std::size_t>(m) * 2 * d + d + j] = cfg.init_log_alpha;
        }
    }
    pv.values.back() = cfg.charge0;
    return pv;
}

Trajectory simulate(const DesiredSystem& ds, const TrainConfig& cfg, double horizon, int steps) {
    ds.validate();
    const PlantSystem plant = electromech_plant(cfg.plant);
    const GateSet gates = deterministic_gates(ds);
    const Vec x0{cfg.q0, cfg.p0, ds.initial_charge};
    const DriftFn drift = [&](double, const Vec& x) { return closed_loop_drift(plant, ds, x, gates); };
    const InputFn input = [&](double, const Vec& x) { return feedback(plant, ds, x, gates); };
    return integrate(drift, x0, horizon, steps, input);
}

TrainResult train(const TrainConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const CounterRng rng(cfg.seed);
    ParameterVector params = initial_parameters(cfg);
    AdamState adam = AdamState::make(params.values.size());
    ParameterVector grad;

    TrainResult result;
    result.history.reserve(cfg.epochs);
    Vec best_values = params.values;
    double best = std::numeric_limits<double>::infinity();
    int best_epoch = 0;

    const int d = static_cast<int>(cfg.library.size());
    TrainConfig step_cfg = cfg;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const GateNoise noise = GateNoise::draw(rng, epoch, d);
        const LossBreakdown bd = gradient(params, cfg, noise, grad);
        result.history.push_back(bd.record(epoch));
        if (bd.total < best) {
            best = bd.total;
            best_values = params.values;
            best_epoch = epoch;
        }
        step_cfg.learning_rate =
            scheduled_learning_rate(cfg.learning_rate, cfg.lr_schedule, epoch, cfg.epochs);
        adam_step(adam, params.values, grad.values, step_cfg);
    }

    result.final_model = DesiredSystem::make(cfg.library);
    params.unpack_into(result.final_model);
    result.best_model = DesiredSystem::make(cfg.library);
    ParameterVector{best_values}.unpack_into(result.best_model);
    result.best_loss = best;
    result.best_epoch = best_epoch;

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        save_model(fs::path(out_dir) / "model_final.json", result.final_model, cfg, cfg.epochs - 1,
                   result.history.back().total);
        save_model(fs::path(out_dir) / "model_best.json", result.best_model, cfg, best_epoch,
                   best);
        std::ofstream hist(fs::path(out_dir) / "loss_history.csv");
        write_loss_history_csv(hist, result.history);
        const Trajectory traj = simulate(result.final_model, cfg, cfg.horizon, cfg.steps);
        std::ofstream tf(fs::path(out_dir) / "trajectory_final.csv");
        write_trajectory_csv(tf, traj);
    }
    return result;
}

}  // namespace idapbc
