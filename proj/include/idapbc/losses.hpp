#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "idapbc/scalar.hpp"
#include "idapbc/trajectory.hpp"

namespace idapbc {

struct RegulationWeights {
    double q_star = 0.2;  ///< target airgap
    double gamma1 = 1.0;  ///< effort weight
    double alpha3 = 1.0;  ///< effort scale
    void validate() const;
};

struct OscillationWeights {
    double q_star = 0.2;  ///< midpoint target
    double period = 1.0;  ///< T
    double alpha1 = 1.0, alpha2 = 1.0, alpha3 = 1.0, alpha4 = 1.0;
    double lambda1 = 1.0, lambda2 = 1.0;
    double gamma1 = 1.0, gamma2 = 1.0, gamma3 = 1.0;
    void validate() const;
};

struct TotalLossWeights {
    double lambda_mc = 10.0;     ///< matching weight
    double gamma_sparse = 1e-3;  ///< sparsity weight
    void validate() const;
};

/// Weighted contributions to the oscillation task cost; total is their exact
/// sum. argmax_q / argmax_p are the grid indices attaining the two max terms
/// (ties broken by earliest index).
struct OscillationBreakdown {
    double j_mid = 0.0;
    double j_eigen = 0.0;
    double j_eff = 0.0;
    double j_period = 0.0;
    double total = 0.0;
    int argmax_q = 0;
    int argmax_p = 0;
};

namespace detail {

/// Trapezoid rule over a uniform grid with spacing h.
template <class T>
T trapezoid(const std::vector<T>& v, double h) {
    T acc = T(0.5) * (v.front() + v.back());
    for (std::size_t k = 1; k + 1 < v.size(); ++k) acc = acc + v[k];
    return T(h) * acc;
}

/// Tracking-plus-effort cost; empty `us` means u = 0.
template <class T>
T regulation_cost_t(const std::vector<std::array<T, 3>>& xs, const std::vector<T>& us, double h,
                    const RegulationWeights& w) {
    std::vector<T> track(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const T dq = xs[k][0] - T(w.q_star);
        track[k] = dq * dq;
    }
    T cost = trapezoid(track, h);
    if (!us.empty()) {
        std::vector<T> effort(us.size());
        for (std::size_t k = 0; k < us.size(); ++k) effort[k] = us[k] * us[k];
        cost = cost + T(w.gamma1 * w.alpha3) * trapezoid(effort, h);
    }
    return cost;
}

template <class T>
struct OscillationTerms {
    T j_mid, j_eigen, j_eff, j_period;
    int argmax_q = 0;
    int argmax_p = 0;
};

/// Grid index attaining max |xs[k][coord] - xs[mirror][coord]| over the first
/// half of the grid; earliest index on ties.
template <class T>
int mirror_argmax(const std::vector<std::array<T, 3>>& xs, int coord) {
    const int steps = static_cast<int>(xs.size()) - 1;
    int best = 0;
    double best_val = -1.0;
    for (int k = 0; k <= steps / 2; ++k) {
        const double v = std::abs(value_of(xs[k][coord]) - value_of(xs[steps - k][coord]));
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    return best;
}

/// Periodicity-shaping cost terms; xs spans exactly [0, T] with an even number
/// of steps. q0_charge is Q(0) as a differentiable scalar (it can be a
/// learnable parameter rather than xs[0][2]).
template <class T>
OscillationTerms<T> oscillation_cost_t(const std::vector<std::array<T, 3>>& xs,
                                       const std::vector<T>& us, double h, const T& q0_charge,
                                       const OscillationWeights& w) {
    const int steps = static_cast<int>(xs.size()) - 1;
    const int mid = steps / 2;
    OscillationTerms<T> out;

    const T dq_mid = xs[mid][0] - T(w.q_star);
    out.j_mid = T(0.5 * w.alpha1) * dq_mid * dq_mid;

    out.argmax_q = mirror_argmax(xs, 0);
    out.argmax_p = mirror_argmax(xs, 1);
    const T sym_q = tabs(xs[out.argmax_q][0] - xs[steps - out.argmax_q][0]);
    const T sym_p = tabs(xs[out.argmax_p][1] - xs[steps - out.argmax_p][1]);
    const T p_mid = xs[mid][1];
    out.j_eigen = T(w.lambda1) * (sym_q + T(w.alpha2) * sym_p) + T(0.5 * w.lambda2) * p_mid * p_mid;

    if (us.empty()) {
        out.j_eff = T(0.0);
    } else {
        std::vector<T> effort(us.size());
        for (std::size_t k = 0; k < us.size(); ++k) effort[k] = us[k] * us[k];
        out.j_eff = T(w.alpha3) * trapezoid(effort, h);
    }

    out.j_period = T(w.alpha4) * tabs(q0_charge - xs[steps][2]);
    return out;
}

template <class T>
T oscillation_total(const OscillationTerms<T>& terms, const OscillationWeights& w) {
    return terms.j_mid + T(w.gamma1) * terms.j_eigen + T(w.gamma2) * terms.j_eff +
           T(w.gamma3) * terms.j_period;
}

}  // namespace detail

double regulation_cost(const Trajectory& trajectory, const RegulationWeights& w);
OscillationBreakdown oscillation_cost(const Trajectory& trajectory, const OscillationWeights& w);

/// task + lambda_mc * mc + gamma_sparse * sparse.
double total_loss(double task_cost, double matching_cost, double sparsity_cost,
                  const TotalLossWeights& w);

struct LossRecord {
    int epoch = 0;
    double total = 0.0, task = 0.0, mc = 0.0, sparse = 0.0;
    double j_mid = 0.0, j_eigen = 0.0, j_eff = 0.0, j_period = 0.0;
};

/// "epoch,total,task,mc,sparse,J_mid,J_eigen,J_eff,J_period" with %.17g fields.
void write_loss_history_csv(std::ostream& out, const std::vector<LossRecord>& history);
std::string loss_history_csv(const std::vector<LossRecord>& history);

}  // namespace idapbc
