#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>

#include "idapbc/mat.hpp"
#include "idapbc/trajectory.hpp"

namespace idapbc {

/// Control-affine port-Hamiltonian plant xdot = (J - R) dH + g u.
///
/// The structure matrices are optional: a plant may be given directly by its
/// drift. When they are present, drift == (J - R) dH is a library invariant.
struct PlantSystem {
    int state_dim = 0;
    int input_dim = 0;
    std::function<Vec(const Vec&)> drift;
    std::function<Mat(const Vec&)> input_matrix;
    std::function<double(const Vec&)> hamiltonian;
    std::function<Vec(const Vec&)> hamiltonian_gradient;
    std::function<Mat(const Vec&)> interconnection;  // J(x), may be empty
    std::function<Mat(const Vec&)> dissipation;      // R(x), may be empty

    bool has_structure() const { return static_cast<bool>(interconnection) && static_cast<bool>(dissipation); }
};

/// Voltage-controlled capacitor with a spring-mounted moving plate.
/// State (q, p, Q): airgap, plate momentum, capacitor charge.
struct ElectromechParams {
    double mass = 1.0;
    double stiffness = 1.0;
    double damping = 1.0;
    double resistance = 1.0;
    double area_permittivity = 1.0;  // plate area times gap permittivity
    double rest_length = 1.0;        // spring rest length q0

    void validate() const {
        if (mass <= 0.0 || stiffness <= 0.0 || damping <= 0.0 || resistance <= 0.0 ||
            area_permittivity <= 0.0 || rest_length <= 0.0) {
            throw std::invalid_argument("ElectromechParams: all parameters must be positive");
        }
    }
};

/// H(q,p,Q) = k(q - q0)^2 / 2 + p^2 / (2m) + q Q^2 / (2 A eps).
template <class T>
T electromech_hamiltonian(const ElectromechParams& par, const std::array<T, 3>& x) {
    const T& q = x[0];
    const T& p = x[1];
    const T& charge = x[2];
    const T dq = q - par.rest_length;
    return 0.5 * par.stiffness * dq * dq + p * p / (2.0 * par.mass) +
           q * charge * charge / (2.0 * par.area_permittivity);
}

template <class T>
std::array<T, 3> electromech_gradient(const ElectromechParams& par, const std::array<T, 3>& x) {
    const T& q = x[0];
    const T& p = x[1];
    const T& charge = x[2];
    return {par.stiffness * (q - par.rest_length) + charge * charge / (2.0 * par.area_permittivity),
            p / par.mass,
            q * charge / par.area_permittivity};
}

/// Unforced drift (J - R) dH of the electromechanical plant.
template <class T>
std::array<T, 3> electromech_drift(const ElectromechParams& par, const std::array<T, 3>& x) {
    const std::array<T, 3> grad = electromech_gradient(par, x);
    return {grad[1],
            -grad[0] - par.damping * grad[1],
            -grad[2] / par.resistance};
}

/// Assemble the electromechanical plant as a PlantSystem (n = 3, m = 1).
PlantSystem electromech_plant(const ElectromechParams& params = {});

/// Worst violation of the power balance Hdot <= y^T u along a trajectory.
///
/// Hdot is evaluated through the chain rule at each grid point with
/// xdot = drift + g u and y = g^T dH; a passive rollout keeps the returned
/// value at numerical-noise level.
double passivity_residual(const PlantSystem& plant, const Trajectory& trajectory);

/// First time at which the airgap coordinate q leaves the physical region
/// q > 0, if any. The dynamics stay well defined there, so crossings are
/// reported as warnings rather than errors.
std::optional<double> first_airgap_violation(const Trajectory& trajectory);

}  // namespace idapbc
