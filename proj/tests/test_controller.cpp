#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>

#include "idapbc/controller.hpp"
#include "idapbc/integrate.hpp"
#include "idapbc/numerics.hpp"
#include "idapbc/plant.hpp"
#include "test_util.hpp"

using namespace idapbc;
using testutil::close;

namespace {

// Gate exactly one term open with the given coefficient.
void open_term(SparseLinearModel& model, std::size_t term, double coeff) {
    model.xi[term] = coeff;
    model.log_alpha[term] = 1e6;
}

void close_all(SparseLinearModel& model) {
    for (auto& la : model.log_alpha) la = -1e6;
}

DesiredSystem random_desired(std::mt19937& rng, int degree = 3) {
    DesiredSystem ds = DesiredSystem::make(PolynomialLibrary::make(3, degree));
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_real_distribution<double> gate(-3.0, 3.0);
    for (auto& m : ds.entries) {
        for (std::size_t j = 0; j < m.library.size(); ++j) {
            m.xi[j] = coeff(rng);
            m.log_alpha[j] = gate(rng);
        }
    }
    ds.initial_charge = coeff(rng);
    return ds;
}

Vec random_state(std::mt19937& rng, double span = 1.5) {
    std::uniform_real_distribution<double> dist(-span, span);
    return {dist(rng), dist(rng), dist(rng)};
}

// Desired system whose drift replicates the unit-parameter plant exactly:
// J_d, R_d copy the plant structure and Hd copies the plant energy
// 0.5 q^2 - q + 0.5 + 0.5 p^2 + 0.5 q Q^2 (term indices in graded-lex order).
DesiredSystem plant_mimic() {
    DesiredSystem ds = DesiredSystem::make(PolynomialLibrary::make(3, 3));
    for (auto& m : ds.entries) close_all(m);
    open_term(ds.entry(DesiredEntry::A), 0, 1.0);
    open_term(ds.entry(DesiredEntry::E), 0, 1.0);
    open_term(ds.entry(DesiredEntry::F), 0, 1.0);
    auto& hd = ds.entry(DesiredEntry::Hd);
    open_term(hd, 0, 0.5);    // 1
    open_term(hd, 1, -1.0);   // q
    open_term(hd, 4, 0.5);    // q^2
    open_term(hd, 7, 0.5);    // p^2
    open_term(hd, 15, 0.5);   // q Q^2
    return ds;
}

}  // namespace

TEST_CASE("desired system entries must share one library") {
    DesiredSystem ds = DesiredSystem::make(PolynomialLibrary::make(3, 2));
    CHECK_NOTHROW(ds.validate());
    ds.entry(DesiredEntry::C) = SparseLinearModel(PolynomialLibrary::make(3, 3));
    CHECK_THROWS_AS(ds.validate(), std::invalid_argument);

    DesiredSystem nan_charge = DesiredSystem::make(PolynomialLibrary::make(3, 2));
    nan_charge.initial_charge = std::nan("");
    CHECK_THROWS_AS(nan_charge.validate(), std::invalid_argument);
}

TEST_CASE("interconnection is exactly skew, dissipation exactly diagonal") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const DesiredSystem ds = random_desired(rng);
        const GateSet gates = deterministic_gates(ds);
        const Vec x = random_state(rng);
        const Mat jd = assemble_jd(ds, x, gates);
        const Mat rd = assemble_rd(ds, x, gates);
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                CHECK(jd(r, c) == -jd(c, r));
                if (r != c) CHECK(rd(r, c) == 0.0);
            }
        }
    }
}

TEST_CASE("fixture interconnection entries evaluate as written") {
    // a = -0.3035, beta = -4.8265 p, c = 0.1458 Q^4.
    DesiredSystem ds = DesiredSystem::make(PolynomialLibrary::make(3, 4));
    for (auto& m : ds.entries) close_all(m);
    open_term(ds.entry(DesiredEntry::A), 0, -0.3035);
    open_term(ds.entry(DesiredEntry::Beta), 2, -4.8265);
    open_term(ds.entry(DesiredEntry::C), 34, 0.1458);
    const GateSet gates = deterministic_gates(ds);

    const Vec x{0.7, -0.4, 1.2};
    const Mat jd = assemble_jd(ds, x, gates);
    CHECK(close(jd(0, 1), -0.3035, 1e-12, 0.0));
    CHECK(close(jd(0, 2), -4.8265 * -0.4, 1e-12, 0.0));
    CHECK(close(jd(1, 2), 0.1458 * std::pow(1.2, 4), 1e-12, 1e-12));
    CHECK(jd(0, 0) == 0.0);
    CHECK(jd(1, 1) == 0.0);
    CHECK(jd(2, 2) == 0.0);

    DesiredSystem damped = DesiredSystem::make(PolynomialLibrary::make(3, 2));
    for (auto& m : damped.entries) close_all(m);
    open_term(damped.entry(DesiredEntry::E), 0, 1.6327);
    const GateSet dg = deterministic_gates(damped);
    std::mt19937 rng(47);
    for (int trial = 0; trial < 5; ++trial)
        CHECK(close(assemble_rd(damped, random_state(rng), dg)(1, 1), 1.6327, 1e-12, 0.0));
}

TEST_CASE("desired drift composes the assembled pieces") {
    std::mt19937 rng(59);

    DesiredSystem flat = DesiredSystem::make(PolynomialLibrary::make(3, 2));
    for (auto& m : flat.entries) close_all(m);
    open_term(flat.entry(DesiredEntry::Hd), 0, 4.2);  // constant energy
    open_term(flat.entry(DesiredEntry::A), 0, 1.0);
    const GateSet flat_gates = deterministic_gates(flat);
    const Vec still = desired_drift(flat, random_state(rng), flat_gates);
    for (double v : still) CHECK(v == 0.0);

    // J_d = 0, R_d = I, Hd = |x|^2 / 2 -> gradient flow -x.
    DesiredSystem grad_flow = DesiredSystem::make(PolynomialLibrary::make(3, 2));
    for (auto& m : grad_flow.entries) close_all(m);
    open_term(grad_flow.entry(DesiredEntry::D), 0, 1.0);
    open_term(grad_flow.entry(DesiredEntry::E), 0, 1.0);
    open_term(grad_flow.entry(DesiredEntry::F), 0, 1.0);
    open_term(grad_flow.entry(DesiredEntry::Hd), 4, 0.5);
    open_term(grad_flow.entry(DesiredEntry::Hd), 7, 0.5);
    open_term(grad_flow.entry(DesiredEntry::Hd), 9, 0.5);
    const GateSet gf_gates = deterministic_gates(grad_flow);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec x = random_state(rng);
        const Vec fd = desired_drift(grad_flow, x, gf_gates);
        for (int i = 0; i < 3; ++i) CHECK(close(fd[i], -x[i], 1e-13, 1e-13));
    }

    for (int trial = 0; trial < 50; ++trial) {
        const DesiredSystem ds = random_desired(rng);
        const GateSet gates = deterministic_gates(ds);
        const Vec x = random_state(rng);
        const Mat jr = assemble_jd(ds, x, gates) - assemble_rd(ds, x, gates);
        const Vec grad = evaluate_gradient(ds.entry(DesiredEntry::Hd), x,
                                           gates[static_cast<int>(DesiredEntry::Hd)]);
        const Vec ref = jr * grad;
        const Vec fd = desired_drift(ds, x, gates);
        for (int i = 0; i < 3; ++i) CHECK(close(fd[i], ref[i], 1e-12, 1e-12));
    }
}

TEST_CASE("feedback corrects only the realizable mismatch") {
    const PlantSystem plant = electromech_plant();  // Rres = 1, g = (0,0,1)
    const DesiredSystem mimic = plant_mimic();
    const GateSet gates = deterministic_gates(mimic);
    std::mt19937 rng(61);

    for (int trial = 0; trial < 20; ++trial) {
        const Vec x = random_state(rng);
        const Vec u = feedback(plant, mimic, x, gates);
        REQUIRE(u.size() == 1);
        CHECK(close(u[0], 0.0, 1e-12, 0.0));
    }

    const DesiredSystem ds = random_desired(rng);
    const GateSet dg = deterministic_gates(ds);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec x = random_state(rng);
        const Vec fd = desired_drift(ds, x, dg);
        const Vec f = plant.drift(x);
        const Vec u = feedback(plant, ds, x, dg);
        CHECK(close(u[0], fd[2] - f[2], 1e-12, 1e-12));
    }

    // u = g^+ (f_d - f) is linear in the mismatch: doubling it doubles u.
    const Vec x = random_state(rng);
    const Mat gpinv = left_pseudo_inverse(plant.input_matrix(x));
    const Vec diff = desired_drift(ds, x, dg) - plant.drift(x);
    Vec twice = diff;
    for (auto& v : twice) v *= 2.0;
    const Vec u1 = gpinv * diff;
    const Vec u2 = gpinv * twice;
    CHECK(close(u2[0], 2.0 * u1[0], 1e-13, 1e-13));
}

TEST_CASE("residual lives in the unactuated subspace") {
    std::mt19937 rng(67);

    const PlantSystem unit_plant = electromech_plant();
    const DesiredSystem ds = random_desired(rng);
    const GateSet gates = deterministic_gates(ds);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec x = random_state(rng);
        const Vec eta = residual_eta(unit_plant, ds, x, gates);
        CHECK(eta[2] == 0.0);  // third channel is fully actuated at Rres = 1
        const Mat gpinv = left_pseudo_inverse(unit_plant.input_matrix(x));
        const Vec proj = gpinv * eta;
        CHECK(close(proj[0], 0.0, 1e-12, 0.0));
    }

    ElectromechParams par;
    par.resistance = 3.0;
    const PlantSystem odd_plant = electromech_plant(par);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec x = random_state(rng);
        const Vec eta = residual_eta(odd_plant, ds, x, gates);
        CHECK(close(eta[2], 0.0, 1e-12, 0.0));
        const Vec diff = desired_drift(ds, x, gates) - odd_plant.drift(x);
        CHECK(close(eta[0], diff[0], 1e-12, 1e-12));
        CHECK(close(eta[1], diff[1], 1e-12, 1e-12));
    }

    const DesiredSystem mimic = plant_mimic();
    const GateSet mg = deterministic_gates(mimic);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec eta = residual_eta(unit_plant, mimic, random_state(rng), mg);
        for (double v : eta) CHECK(close(v, 0.0, 1e-12, 0.0));
    }
}

TEST_CASE("both closed-loop formulations coincide at a thousand states") {
    std::mt19937 rng(71);
    ElectromechParams par;
    par.mass = 1.2;
    par.resistance = 2.0;
    const PlantSystem plant = electromech_plant(par);
    for (int round = 0; round < 10; ++round) {
        const DesiredSystem ds = random_desired(rng);
        const GateSet gates = deterministic_gates(ds);
        for (int trial = 0; trial < 100; ++trial) {
            const Vec x = random_state(rng);
            const Vec closed = closed_loop_drift(plant, ds, x, gates);
            const Vec u = feedback(plant, ds, x, gates);
            const Vec via_input = plant.drift(x) + plant.input_matrix(x) * u;
            double err = 0.0;
            for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(closed[i] - via_input[i]));
            CHECK(err <= 1e-12);
            // The input channel cannot move the first two coordinates.
            const Vec f = plant.drift(x);
            CHECK(close(closed[0], f[0], 1e-12, 1e-12));
            CHECK(close(closed[1], f[1], 1e-12, 1e-12));
        }
    }
}

TEST_CASE("matching cost minimal cases and pointwise oracle") {
    const PlantSystem plant = electromech_plant();
    std::mt19937 rng(73);

    const DesiredSystem mimic = plant_mimic();
    const GateSet mg = deterministic_gates(mimic);
    Trajectory traj;
    for (int k = 0; k <= 10; ++k) {
        traj.times.push_back(0.1 * k);
        traj.states.push_back(random_state(rng));
    }
    CHECK(matching_cost(plant, mimic, traj, mg) <= 1e-24);

    // f_d = (0.03, 0, 0) everywhere; at the plant equilibrium f = 0, so
    // eta = (0.03, 0, 0) and the mean of |eta|^2 is 0.0009.
    DesiredSystem offset = DesiredSystem::make(PolynomialLibrary::make(3, 2));
    for (auto& m : offset.entries) close_all(m);
    open_term(offset.entry(DesiredEntry::A), 0, 0.03);
    open_term(offset.entry(DesiredEntry::Hd), 2, 1.0);  // Hd = p, gradient (0,1,0)
    const GateSet og = deterministic_gates(offset);
    Trajectory rest;
    for (int k = 0; k <= 4; ++k) {
        rest.times.push_back(0.25 * k);
        rest.states.push_back(Vec{1.0, 0.0, 0.0});
    }
    CHECK(close(matching_cost(plant, offset, rest, og), 0.0009, 1e-15, 0.0));

    const DesiredSystem ds = random_desired(rng);
    const GateSet gates = deterministic_gates(ds);
    double acc = 0.0;
    for (const Vec& x : traj.states) {
        const Vec eta = residual_eta(plant, ds, x, gates);
        acc += eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2];
    }
    CHECK(close(matching_cost(plant, ds, traj, gates), acc / traj.states.size(), 1e-12, 1e-12));

    Trajectory empty;
    CHECK_THROWS_AS(matching_cost(plant, ds, empty, gates), std::invalid_argument);
}

TEST_CASE("zero matching cost makes the loop track the desired system") {
    const PlantSystem plant = electromech_plant();
    const DesiredSystem mimic = plant_mimic();
    const GateSet gates = deterministic_gates(mimic);

    const Vec x0{0.6, 0.1, 0.3};
    const DriftFn closed = [&](double, const Vec& x) {
        return closed_loop_drift(plant, mimic, x, gates);
    };
    const DriftFn desired = [&](double, const Vec& x) { return desired_drift(mimic, x, gates); };
    const Trajectory a = integrate(closed, x0, 2.0, 200);
    const Trajectory b = integrate(desired, x0, 2.0, 200);
    CHECK(matching_cost(plant, mimic, a, gates) <= 1e-20);
    for (std::size_t k = 0; k < a.states.size(); ++k)
        for (int i = 0; i < 3; ++i) CHECK(close(a.states[k][i], b.states[k][i], 1e-9, 1e-9));
}

TEST_CASE("controller report lists every learned piece") {
    DesiredSystem ds = DesiredSystem::make(PolynomialLibrary::make(3, 2));
    for (auto& m : ds.entries) close_all(m);
    open_term(ds.entry(DesiredEntry::Hd), 0, 2.0114);
    open_term(ds.entry(DesiredEntry::Hd), 1, 2.2373);
    open_term(ds.entry(DesiredEntry::Hd), 9, -1.7219);
    open_term(ds.entry(DesiredEntry::E), 0, 1.6327);
    ds.initial_charge = 0.25;

    const std::string report = controller_report(ds, {"q", "p", "Q"});
    CHECK(report.find("Hd = 2.0114 + 2.2373*q - 1.7219*Q^2\n") != std::string::npos);
    CHECK(report.find("e = 1.6327\n") != std::string::npos);
    CHECK(report.find("a = 0\n") != std::string::npos);
    CHECK(report.find("u = g^+ ((J_d - R_d) dHd - f)\n") != std::string::npos);
    CHECK(report.find("Q(0) = 0.25\n") != std::string::npos);
}
