#pragma once

#include <array>
#include <string>

#include "idapbc/dictionary.hpp"
#include "idapbc/mat.hpp"
#include "idapbc/plant.hpp"
#include "idapbc/trajectory.hpp"

namespace idapbc {

/// Index of one learnable scalar entry of the desired system.
enum class DesiredEntry { A = 0, Beta, C, D, E, F, Hd };

constexpr int kNumDesiredEntries = 7;

/// Display name of each entry ("a", "beta", ..., "Hd").
const char* desired_entry_name(DesiredEntry entry);

/// Learnable desired closed-loop system.
///
/// Seven independent sparse dictionary models: a, beta, c fill the
/// skew-symmetric interconnection, d, e, f its diagonal dissipation, plus the
/// desired Hamiltonian Hd and a learnable initial capacitor charge Q(0).
struct DesiredSystem {
    std::array<SparseLinearModel, kNumDesiredEntries> entries;
    double initial_charge = 0.0;

    static DesiredSystem make(const PolynomialLibrary& library);

    SparseLinearModel& entry(DesiredEntry e) { return entries[static_cast<int>(e)]; }
    const SparseLinearModel& entry(DesiredEntry e) const { return entries[static_cast<int>(e)]; }

    const PolynomialLibrary& library() const { return entries[0].library; }

    void validate() const;
};

/// One gate vector per desired-system entry.
using GateSet = std::array<Vec, kNumDesiredEntries>;

GateSet deterministic_gates(const DesiredSystem& ds);

/// Interconnection matrix [[0, a, b], [-a, 0, c], [-b, -c, 0]]; skew-symmetric
/// by construction.
Mat assemble_jd(const DesiredSystem& ds, const Vec& x, const GateSet& gates);

/// Dissipation matrix diag(d, e, f); diagonal by construction.
Mat assemble_rd(const DesiredSystem& ds, const Vec& x, const GateSet& gates);

/// Desired drift f_d(x) = (J_d - R_d) dHd.
Vec desired_drift(const DesiredSystem& ds, const Vec& x, const GateSet& gates);

/// State feedback u = g^+ (f_d - f).
Vec feedback(const PlantSystem& plant, const DesiredSystem& ds, const Vec& x, const GateSet& gates);

/// Matching residual eta = (I - g g^+)(f_d - f), the part of the desired
/// drift the input channel cannot realize.
Vec residual_eta(const PlantSystem& plant, const DesiredSystem& ds, const Vec& x,
                 const GateSet& gates);

/// Closed-loop drift f_d - eta; algebraically equal to f + g u.
Vec closed_loop_drift(const PlantSystem& plant, const DesiredSystem& ds, const Vec& x,
                      const GateSet& gates);

/// Mean of |eta|^2 over the trajectory grid.
double matching_cost(const PlantSystem& plant, const DesiredSystem& ds,
                     const Trajectory& trajectory, const GateSet& gates);

/// Text report of the learned controller: Hd, the six entry polynomials,
/// the feedback law, and Q(0).
std::string controller_report(const DesiredSystem& ds,
                              const std::vector<std::string>& variable_names);

}  // namespace idapbc
