#include "idapbc/integrate.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "idapbc/numerics.hpp"

namespace idapbc {

namespace {

void check_grid(double horizon, int steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (steps <= 0 || steps % 2 != 0)
        throw std::invalid_argument("step count must be positive and even");
}

Vec rk4_step(const DriftFn& drift, double t, const Vec& x, double h) {
    const Vec k1 = drift(t, x);
    const Vec k2 = drift(t + 0.5 * h, x + (0.5 * h) * k1);
    const Vec k3 = drift(t + 0.5 * h, x + (0.5 * h) * k2);
    const Vec k4 = drift(t + h, x + h * k3);
    Vec next = x;
    for (std::size_t i = 0; i < x.size(); ++i)
        next[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return next;
}

}  // namespace

Trajectory integrate(const DriftFn& drift, const Vec& x0, double horizon, int steps,
                     const InputFn& input) {
    check_grid(horizon, steps);
    const double h = horizon / steps;
    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    if (input) traj.inputs.reserve(steps + 1);

    Vec x = x0;
    for (int k = 0; k <= steps; ++k) {
        const double t = h * k;
        if (!is_finite(x)) throw DivergenceError("state diverged at step " + std::to_string(k), k);
        traj.times.push_back(t);
        traj.states.push_back(x);
        if (input) traj.inputs.push_back(input(t, x));
        if (k < steps) x = rk4_step(drift, t, x, h);
    }
    return traj;
}

Mat drift_jacobian(const DriftFn& drift, double t, const Vec& x) {
    const int n = static_cast<int>(x.size());
    Mat jac(n, n);
    Vec xp = x, xm = x;
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const Vec fp = drift(t, xp);
        const Vec fm = drift(t, xm);
        for (int i = 0; i < n; ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

StmResult integrate_variational(const DriftFn& drift, const Vec& x0, double horizon, int steps,
                                const JacobianFn& jacobian) {
    check_grid(horizon, steps);
    const int n = static_cast<int>(x0.size());
    const JacobianFn jac =
        jacobian ? jacobian
                 : JacobianFn([&drift](double t, const Vec& x) { return drift_jacobian(drift, t, x); });

    // Augmented state [x; vec(Phi)] integrated by one RK4.
    auto augmented = [&](double t, const Vec& z) {
        Vec x(z.begin(), z.begin() + n);
        Mat phi(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) phi(i, j) = z[n + i * n + j];
        const Vec fx = drift(t, x);
        const Mat dphi = jac(t, x) * phi;
        Vec dz(n + n * n);
        std::copy(fx.begin(), fx.end(), dz.begin());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dz[n + i * n + j] = dphi(i, j);
        return dz;
    };

    Vec z0(n + n * n, 0.0);
    std::copy(x0.begin(), x0.end(), z0.begin());
    for (int i = 0; i < n; ++i) z0[n + i * n + i] = 1.0;

    const Trajectory aug = integrate(augmented, z0, horizon, steps);

    StmResult result;
    result.trajectory.times = aug.times;
    result.trajectory.states.reserve(aug.states.size());
    for (const Vec& z : aug.states) result.trajectory.states.emplace_back(z.begin(), z.begin() + n);
    const Vec& zf = aug.states.back();
    result.stm = Mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) result.stm(i, j) = zf[n + i * n + j];
    return result;
}

MonodromyResult monodromy(const DriftFn& drift, const Vec& x0, double horizon, int steps,
                          const JacobianFn& jacobian) {
    StmResult stm = integrate_variational(drift, x0, horizon, steps, jacobian);
    MonodromyResult result;
    result.monodromy = stm.stm;
    result.trajectory = std::move(stm.trajectory);
    result.multipliers = eigenvalues(result.monodromy);
    std::stable_sort(result.multipliers.begin(), result.multipliers.end(),
                     [](const ComplexScalar& a, const ComplexScalar& b) {
                         return std::abs(a) > std::abs(b);
                     });
    return result;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    trajectory.validate();
    if (trajectory.states.empty() || trajectory.states[0].size() != 3)
        throw std::invalid_argument("trajectory csv needs a 3-dimensional state");
    if (trajectory.inputs.size() != trajectory.states.size())
        throw std::invalid_argument("trajectory csv needs one input per grid point");
    out << "t,q,p,Q,u\n";
    char buf[32];
    auto field = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
        field(trajectory.times[k]);
        for (double v : trajectory.states[k]) {
            out << ',';
            field(v);
        }
        if (trajectory.inputs[k].size() != 1)
            throw std::invalid_argument("trajectory csv needs a scalar input");
        out << ',';
        field(trajectory.inputs[k][0]);
        out << '\n';
    }
}

std::string trajectory_csv(const Trajectory& trajectory) {
    std::ostringstream out;
    write_trajectory_csv(out, trajectory);
    return out.str();
}

}  // namespace idapbc
