#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idapbc/controller.hpp"
#include "idapbc/dictionary.hpp"
#include "idapbc/losses.hpp"
#include "idapbc/mat.hpp"
#include "idapbc/plant.hpp"
#include "idapbc/rng.hpp"

namespace idapbc {

enum class TaskKind { Regulation, Oscillation };

const char* task_kind_name(TaskKind task);

/// Constant keeps the configured rate for every epoch; Cosine anneals it to
/// zero over the run, which damps the late-epoch noise from gate resampling.
enum class LrSchedule { Constant, Cosine };

const char* lr_schedule_name(LrSchedule schedule);

/// Effective learning rate at `epoch` of `epochs` under `schedule`.
double scheduled_learning_rate(double base, LrSchedule schedule, int epoch, int epochs);

struct TrainConfig {
    int epochs = 5000;
    double learning_rate = 1e-3;
    LrSchedule lr_schedule = LrSchedule::Constant;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    double horizon = 1.0;  ///< rollout length T; also the oscillation period
    int steps = 200;       ///< even RK4 step count
    TaskKind task = TaskKind::Regulation;
    RegulationWeights regulation;
    OscillationWeights oscillation;
    TotalLossWeights total;
    ElectromechParams plant;
    PolynomialLibrary library = PolynomialLibrary::make(3, 4);
    double q0 = 0.5;       ///< fixed initial airgap
    double p0 = 0.0;       ///< fixed initial momentum
    double charge0 = 0.0;  ///< Q(0): initial guess when learnable, fixed value otherwise
    bool learn_charge_for_regulation = false;
    double init_log_alpha = 2.0;
    double init_xi_scale = 0.1;  ///< xi drawn from U[-scale, scale]

    /// Q(0) is learnable for the oscillation task, and for regulation only
    /// when opted in.
    bool learns_initial_charge() const {
        return task == TaskKind::Oscillation || learn_charge_for_regulation;
    }

    void validate() const;
};

/// Flat parameter layout: for each desired-system entry in order
/// (a, beta, c, d, e, f, Hd) the xi block then the log_alpha block, then Q(0).
struct ParameterVector {
    Vec values;

    static int expected_size(const PolynomialLibrary& library) {
        return kNumDesiredEntries * 2 * static_cast<int>(library.size()) + 1;
    }
    static ParameterVector pack(const DesiredSystem& ds);
    void unpack_into(DesiredSystem& ds) const;
};

/// One uniform-(0,1) draw per (entry, term) for gate sampling; empty means
/// deterministic gates.
struct GateNoise {
    std::array<Vec, kNumDesiredEntries> u;

    bool empty() const { return u[0].empty(); }
    static GateNoise none() { return GateNoise{}; }
    static GateNoise draw(const CounterRng& rng, std::uint64_t epoch, int terms);
};

/// Nonsmoothness bookkeeping for one loss evaluation. Two evaluations with
/// equal signatures lie on the same smooth branch of the loss, which is what
/// finite-difference gradient checks require.
struct DiscontinuitySignature {
    int argmax_q = -1;
    int argmax_p = -1;
    int sign_q = 0;
    int sign_p = 0;
    int sign_period = 0;
    std::vector<std::uint8_t> gate_clamp;  ///< per gate: 0 low, 1 interior, 2 high

    bool operator==(const DiscontinuitySignature&) const = default;
};

struct LossBreakdown {
    double total = 0.0, task = 0.0, mc = 0.0, sparse = 0.0;
    double j_mid = 0.0, j_eigen = 0.0, j_eff = 0.0, j_period = 0.0;
    bool diverged = false;
    int steps_survived = 0;
    DiscontinuitySignature signature;

    LossRecord record(int epoch) const {
        return {epoch, total, task, mc, sparse, j_mid, j_eigen, j_eff, j_period};
    }
};

/// Full pipeline: parameters -> sampled gates -> closed-loop rollout -> loss.
/// A divergent rollout yields a large finite penalty (1e6 plus the number of
/// missing steps) with zero gradient.
LossBreakdown loss_of(const ParameterVector& params, const TrainConfig& cfg,
                      const GateNoise& noise);

/// Gradient of loss_of by reverse accumulation through the unrolled RK4 steps.
LossBreakdown gradient(const ParameterVector& params, const TrainConfig& cfg,
                       const GateNoise& noise, ParameterVector& grad_out);

struct AdamState {
    Vec m, v;
    long long t = 0;

    static AdamState make(std::size_t n) { return {Vec(n, 0.0), Vec(n, 0.0), 0}; }
};

/// Standard bias-corrected update; `params` is modified in place.
void adam_step(AdamState& state, Vec& params, const Vec& grad, const TrainConfig& cfg);

struct TrainResult {
    DesiredSystem final_model;
    DesiredSystem best_model;
    double best_loss = 0.0;
    int best_epoch = 0;
    std::vector<LossRecord> history;
};

/// Runs the training loop. When out_dir is nonempty, writes model_final.json,
/// model_best.json, loss_history.csv, and trajectory_final.csv into it.
TrainResult train(const TrainConfig& cfg, const std::string& out_dir = "");

/// Deterministic parameter initialization: xi from U[-init_xi_scale,
/// init_xi_scale], log_alpha at init_log_alpha, Q(0) at charge0.
ParameterVector initial_parameters(const TrainConfig& cfg);

/// Closed-loop rollout of a trained model with deterministic gates, inputs
/// recorded.
Trajectory simulate(const DesiredSystem& ds, const TrainConfig& cfg, double horizon, int steps);

}  // namespace idapbc
