#include "idapbc/plant.hpp"

#include <cmath>

namespace idapbc {

PlantSystem electromech_plant(const ElectromechParams& params) {
    params.validate();
    PlantSystem plant;
    plant.state_dim = 3;
    plant.input_dim = 1;

    auto as_array = [](const Vec& x) -> std::array<double, 3> {
        if (x.size() != 3) {
            throw std::invalid_argument("electromech plant: state must have 3 entries");
        }
        return {x[0], x[1], x[2]};
    };

    plant.hamiltonian = [params, as_array](const Vec& x) {
        return electromech_hamiltonian(params, as_array(x));
    };
    plant.hamiltonian_gradient = [params, as_array](const Vec& x) {
        const auto g = electromech_gradient(params, as_array(x));
        return Vec{g[0], g[1], g[2]};
    };
    plant.drift = [params, as_array](const Vec& x) {
        const auto f = electromech_drift(params, as_array(x));
        return Vec{f[0], f[1], f[2]};
    };
    plant.input_matrix = [params](const Vec&) {
        Mat g(3, 1);
        g(2, 0) = 1.0 / params.resistance;
        return g;
    };
    plant.interconnection = [](const Vec&) {
        return Mat{{0.0, 1.0, 0.0}, {-1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    };
    plant.dissipation = [params](const Vec&) {
        Mat r(3, 3);
        r(1, 1) = params.damping;
        r(2, 2) = 1.0 / params.resistance;
        return r;
    };
    return plant;
}

double passivity_residual(const PlantSystem& plant, const Trajectory& trajectory) {
    trajectory.validate();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const Vec& x = trajectory.states[i];
        const Vec& u = trajectory.inputs[i];
        if (static_cast<int>(x.size()) != plant.state_dim ||
            static_cast<int>(u.size()) != plant.input_dim) {
            throw std::invalid_argument("passivity_residual: trajectory/plant dimension mismatch");
        }
        const Vec grad = plant.hamiltonian_gradient(x);
        const Mat g = plant.input_matrix(x);
        Vec xdot = plant.drift(x);
        const Vec gu = g * u;
        for (std::size_t k = 0; k < xdot.size(); ++k) {
            xdot[k] += gu[k];
        }
        const double h_dot = dot(grad, xdot);
        const Vec y = g.transpose() * grad;
        worst = std::max(worst, h_dot - dot(y, u));
    }
    return worst;
}

std::optional<double> first_airgap_violation(const Trajectory& trajectory) {
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        if (!trajectory.states[i].empty() && trajectory.states[i][0] <= 0.0) {
            return trajectory.times[i];
        }
    }
    return std::nullopt;
}

}  // namespace idapbc
