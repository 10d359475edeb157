#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>

#include "idapbc/integrate.hpp"
#include "idapbc/plant.hpp"
#include "test_util.hpp"

using namespace idapbc;
using testutil::close;

namespace {

std::array<double, 3> random_state(std::mt19937& rng, double span = 2.0) {
    std::uniform_real_distribution<double> dist(-span, span);
    return {dist(rng), dist(rng), dist(rng)};
}

}  // namespace

TEST_CASE("electromech parameters must be positive") {
    ElectromechParams par;
    CHECK_NOTHROW(par.validate());
    par.mass = 0.0;
    CHECK_THROWS_AS(par.validate(), std::invalid_argument);
    par.mass = 1.0;
    par.resistance = -2.0;
    CHECK_THROWS_AS(par.validate(), std::invalid_argument);
}

TEST_CASE("electromech Hamiltonian at hand-evaluated points") {
    const ElectromechParams par;
    CHECK(electromech_hamiltonian<double>(par, {1.0, 0.0, 0.0}) == 0.0);

    ElectromechParams stiff;
    stiff.stiffness = 2.0;
    CHECK(electromech_hamiltonian<double>(stiff, {2.0, 0.0, 0.0}) == 1.0);

    // 0.5 (0.2-1)^2 + 0.2 * 0.3835^2 / 2
    const double h = electromech_hamiltonian<double>(par, {0.2, 0.0, 0.3835});
    CHECK(close(h, 0.334707225, 1e-9, 0.0));
}

TEST_CASE("electromech gradient at hand-evaluated points") {
    const ElectromechParams par;
    const auto at_rest = electromech_gradient<double>(par, {1.0, 0.0, 0.0});
    CHECK(at_rest[0] == 0.0);
    CHECK(at_rest[1] == 0.0);
    CHECK(at_rest[2] == 0.0);

    const auto momentum_only = electromech_gradient<double>(par, {1.0, 1.0, 0.0});
    CHECK(momentum_only[0] == 0.0);
    CHECK(momentum_only[1] == 1.0);
    CHECK(momentum_only[2] == 0.0);
}

TEST_CASE("electromech gradient matches finite differences of the energy") {
    std::mt19937 rng(11);
    ElectromechParams par;
    par.mass = 1.3;
    par.stiffness = 0.7;
    par.area_permittivity = 2.1;
    par.rest_length = 0.8;
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_state(rng);
        const auto grad = electromech_gradient(par, x);
        for (int i = 0; i < 3; ++i) {
            const double h = 1e-6 * (1.0 + std::abs(x[i]));
            auto xp = x;
            auto xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd =
                (electromech_hamiltonian(par, xp) - electromech_hamiltonian(par, xm)) / (2.0 * h);
            CHECK(close(grad[i], fd, 1e-6, 1e-5));
        }
    }
}

TEST_CASE("electromech drift at hand-evaluated points") {
    const ElectromechParams par;
    const auto at_rest = electromech_drift<double>(par, {1.0, 0.0, 0.0});
    CHECK(at_rest[0] == 0.0);
    CHECK(at_rest[1] == 0.0);
    CHECK(at_rest[2] == 0.0);

    // qdot = dH/dp = 1, pdot = -dH/dq - b dH/dp = -1, Qdot = 0.
    const auto kick = electromech_drift<double>(par, {1.0, 1.0, 0.0});
    CHECK(kick[0] == 1.0);
    CHECK(kick[1] == -1.0);
    CHECK(kick[2] == 0.0);
}

TEST_CASE("plant assembly exposes structure matrices and g") {
    ElectromechParams par;
    par.resistance = 2.0;
    const PlantSystem plant = electromech_plant(par);
    REQUIRE(plant.state_dim == 3);
    REQUIRE(plant.input_dim == 1);
    REQUIRE(plant.has_structure());

    const Vec x{0.4, -0.2, 0.9};
    const Mat g = plant.input_matrix(x);
    REQUIRE(g.rows() == 3);
    REQUIRE(g.cols() == 1);
    CHECK(g(0, 0) == 0.0);
    CHECK(g(1, 0) == 0.0);
    CHECK(g(2, 0) == 0.5);

    const Mat j = plant.interconnection(x);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(j(r, c) == -j(c, r));
    const Mat r = plant.dissipation(x);
    CHECK(r(0, 0) == 0.0);
    CHECK(r(1, 1) == par.damping);
    CHECK(r(2, 2) == 0.5);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            if (a != b) CHECK(r(a, b) == 0.0);
}

TEST_CASE("drift equals (J - R) dH at random states") {
    std::mt19937 rng(23);
    ElectromechParams par;
    par.mass = 0.9;
    par.damping = 1.4;
    par.resistance = 3.0;
    par.area_permittivity = 0.6;
    const PlantSystem plant = electromech_plant(par);
    for (int trial = 0; trial < 100; ++trial) {
        const auto xs = random_state(rng);
        const Vec x{xs[0], xs[1], xs[2]};
        const Vec f = plant.drift(x);
        const Mat jr = plant.interconnection(x) - plant.dissipation(x);
        const Vec via_structure = jr * plant.hamiltonian_gradient(x);
        for (int i = 0; i < 3; ++i) CHECK(close(f[i], via_structure[i], 1e-10, 0.0));
    }
}

TEST_CASE("unforced rollout dissipates energy") {
    const ElectromechParams par;
    const PlantSystem plant = electromech_plant(par);
    const DriftFn drift = [&](double, const Vec& x) { return plant.drift(x); };
    const double horizon = 2.0;
    const int steps = 2000;  // h = 1e-3
    const Trajectory traj = integrate(drift, Vec{0.5, 0.3, 0.4}, horizon, steps);
    double prev = plant.hamiltonian(traj.states.front());
    const double slack = 1e-6 * (horizon / steps);
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        const double h_now = plant.hamiltonian(traj.states[k]);
        CHECK(h_now <= prev + slack);
        prev = h_now;
    }
}

TEST_CASE("passivity residual stays at noise level without input") {
    const ElectromechParams par;
    const PlantSystem plant = electromech_plant(par);
    const DriftFn drift = [&](double, const Vec& x) { return plant.drift(x); };
    const InputFn zero_input = [&](double, const Vec&) { return Vec{0.0}; };

    Trajectory rest = integrate(drift, Vec{1.0, 0.0, 0.0}, 1.0, 10, zero_input);
    CHECK(close(passivity_residual(plant, rest), 0.0, 1e-12, 0.0));

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (int trial = 0; trial < 5; ++trial) {
        const Vec x0{1.0 + dist(rng), dist(rng), dist(rng)};
        const Trajectory traj = integrate(drift, x0, 1.0, 200, zero_input);
        CHECK(passivity_residual(plant, traj) <= 1e-8);
    }
}

TEST_CASE("passivity residual validates trajectory shape") {
    const PlantSystem plant = electromech_plant();
    Trajectory bad;
    bad.times = {0.0, 0.5, 1.0};
    bad.states = {Vec{1.0, 0.0}, Vec{1.0, 0.0}, Vec{1.0, 0.0}};
    bad.inputs = {Vec{0.0}, Vec{0.0}, Vec{0.0}};
    CHECK_THROWS_AS(passivity_residual(plant, bad), std::invalid_argument);
}

TEST_CASE("airgap violations are detected with their first time") {
    Trajectory traj;
    traj.times = {0.0, 0.1, 0.2};
    traj.states = {Vec{0.5, 0.0, 0.0}, Vec{0.2, 0.0, 0.0}, Vec{0.1, 0.0, 0.0}};
    CHECK_FALSE(first_airgap_violation(traj).has_value());

    traj.states[1] = Vec{-0.01, 0.0, 0.0};
    const auto hit = first_airgap_violation(traj);
    REQUIRE(hit.has_value());
    CHECK(*hit == 0.1);
}
