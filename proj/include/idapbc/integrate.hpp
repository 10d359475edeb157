#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "idapbc/mat.hpp"
#include "idapbc/trajectory.hpp"

namespace idapbc {

/// Thrown when a state stops being finite during integration; carries the
/// index of the first bad step.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

using DriftFn = std::function<Vec(double, const Vec&)>;
using InputFn = std::function<Vec(double, const Vec&)>;

/// Classical fixed-step RK4 over [0, horizon] with an even number of steps.
/// Records the state at every grid point; if `input` is given, records it too.
Trajectory integrate(const DriftFn& drift, const Vec& x0, double horizon, int steps,
                     const InputFn& input = nullptr);

using JacobianFn = std::function<Mat(double, const Vec&)>;

/// Central finite-difference Jacobian of a drift, step 1e-6 * (1 + |x_i|)
/// per coordinate.
Mat drift_jacobian(const DriftFn& drift, double t, const Vec& x);

struct StmResult {
    Trajectory trajectory;
    Mat stm;  ///< state-transition matrix at the final time
};

/// Integrates the state together with the variational equation
/// dPhi/dt = Df(t, x) Phi from Phi(0) = I, one RK4 grid for both.
/// Uses `jacobian` when given, otherwise the finite-difference Jacobian.
StmResult integrate_variational(const DriftFn& drift, const Vec& x0, double horizon, int steps,
                                const JacobianFn& jacobian = nullptr);

struct MonodromyResult {
    Mat monodromy;
    std::vector<ComplexScalar> multipliers;  ///< sorted by descending modulus
    Trajectory trajectory;
};

/// Monodromy matrix of the period-`horizon` flow from x0 and its
/// characteristic multipliers.
MonodromyResult monodromy(const DriftFn& drift, const Vec& x0, double horizon, int steps,
                          const JacobianFn& jacobian = nullptr);

/// Writes "t,q,p,Q,u" rows with %.17g fields. Requires a 3-state trajectory
/// with recorded scalar inputs.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
std::string trajectory_csv(const Trajectory& trajectory);

}  // namespace idapbc
