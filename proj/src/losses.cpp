#include "idapbc/losses.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace idapbc {

namespace {

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(name) + " must be nonnegative");
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
}

std::vector<std::array<double, 3>> packed_states(const Trajectory& trajectory) {
    std::vector<std::array<double, 3>> xs;
    xs.reserve(trajectory.states.size());
    for (const Vec& x : trajectory.states) {
        if (x.size() != 3) throw std::invalid_argument("task costs need a 3-dimensional state");
        xs.push_back({x[0], x[1], x[2]});
    }
    return xs;
}

std::vector<double> packed_inputs(const Trajectory& trajectory) {
    std::vector<double> us;
    us.reserve(trajectory.inputs.size());
    for (const Vec& u : trajectory.inputs) {
        if (u.size() != 1) throw std::invalid_argument("task costs need a scalar input");
        us.push_back(u[0]);
    }
    return us;
}

}  // namespace

void RegulationWeights::validate() const {
    require_finite(q_star, "q_star");
    require_nonnegative(gamma1, "gamma1");
    require_nonnegative(alpha3, "alpha3");
}

void OscillationWeights::validate() const {
    require_finite(q_star, "q_star");
    if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
    const std::pair<double, const char*> checks[] = {
        {alpha1, "alpha1"}, {alpha2, "alpha2"},   {alpha3, "alpha3"},
        {alpha4, "alpha4"}, {lambda1, "lambda1"}, {lambda2, "lambda2"},
        {gamma1, "gamma1"}, {gamma2, "gamma2"},   {gamma3, "gamma3"}};
    for (auto [v, name] : checks) require_nonnegative(v, name);
}

void TotalLossWeights::validate() const {
    require_nonnegative(lambda_mc, "lambda_mc");
    require_nonnegative(gamma_sparse, "gamma_sparse");
}

double regulation_cost(const Trajectory& trajectory, const RegulationWeights& w) {
    w.validate();
    trajectory.validate();
    return detail::regulation_cost_t(packed_states(trajectory), packed_inputs(trajectory),
                                     trajectory.step_size(), w);
}

OscillationBreakdown oscillation_cost(const Trajectory& trajectory, const OscillationWeights& w) {
    w.validate();
    trajectory.validate();
    if (std::abs(trajectory.horizon() - w.period) > 1e-9 * std::max(1.0, w.period))
        throw std::invalid_argument("trajectory horizon must equal the oscillation period");
    const auto xs = packed_states(trajectory);
    const auto terms = detail::oscillation_cost_t(xs, packed_inputs(trajectory),
                                                  trajectory.step_size(), xs.front()[2], w);
    OscillationBreakdown out;
    out.j_mid = terms.j_mid;
    out.j_eigen = w.gamma1 * terms.j_eigen;
    out.j_eff = w.gamma2 * terms.j_eff;
    out.j_period = w.gamma3 * terms.j_period;
    out.total = out.j_mid + out.j_eigen + out.j_eff + out.j_period;
    out.argmax_q = terms.argmax_q;
    out.argmax_p = terms.argmax_p;
    return out;
}

double total_loss(double task_cost, double matching_cost, double sparsity_cost,
                  const TotalLossWeights& w) {
    w.validate();
    require_finite(task_cost, "task cost");
    require_finite(matching_cost, "matching cost");
    require_finite(sparsity_cost, "sparsity cost");
    return task_cost + w.lambda_mc * matching_cost + w.gamma_sparse * sparsity_cost;
}

void write_loss_history_csv(std::ostream& out, const std::vector<LossRecord>& history) {
    out << "epoch,total,task,mc,sparse,J_mid,J_eigen,J_eff,J_period\n";
    char buf[32];
    auto field = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    };
    for (const LossRecord& r : history) {
        out << r.epoch;
        field(r.total);
        field(r.task);
        field(r.mc);
        field(r.sparse);
        field(r.j_mid);
        field(r.j_eigen);
        field(r.j_eff);
        field(r.j_period);
        out << '\n';
    }
}

std::string loss_history_csv(const std::vector<LossRecord>& history) {
    std::ostringstream out;
    write_loss_history_csv(out, history);
    return out.str();
}

}  // namespace idapbc
