#include "idapbc/controller.hpp"

#include <sstream>
#include <stdexcept>

#include "idapbc/numerics.hpp"

namespace idapbc {

const char* desired_entry_name(DesiredEntry entry) {
    switch (entry) {
        case DesiredEntry::A: return "a";
        case DesiredEntry::Beta: return "beta";
        case DesiredEntry::C: return "c";
        case DesiredEntry::D: return "d";
        case DesiredEntry::E: return "e";
        case DesiredEntry::F: return "f";
        case DesiredEntry::Hd: return "Hd";
    }
    throw std::invalid_argument("unknown desired entry");
}

DesiredSystem DesiredSystem::make(const PolynomialLibrary& library) {
    DesiredSystem ds;
    for (auto& m : ds.entries) m = SparseLinearModel(library);
    ds.initial_charge = 0.0;
    return ds;
}

void DesiredSystem::validate() const {
    for (const auto& m : entries) {
        m.validate();
        if (!(m.library == entries[0].library))
            throw std::invalid_argument("desired system entries must share one library");
    }
    if (!std::isfinite(initial_charge))
        throw std::invalid_argument("initial charge must be finite");
}

GateSet deterministic_gates(const DesiredSystem& ds) {
    GateSet gates;
    for (int i = 0; i < kNumDesiredEntries; ++i)
        gates[i] = deterministic_gates(ds.entries[i]);
    return gates;
}

namespace {

std::array<double, kNumDesiredEntries> entry_values(const DesiredSystem& ds, const Vec& x,
                                                    const GateSet& gates) {
    std::array<double, kNumDesiredEntries> v{};
    for (int i = 0; i < kNumDesiredEntries; ++i) v[i] = evaluate(ds.entries[i], x, gates[i]);
    return v;
}

}  // namespace

Mat assemble_jd(const DesiredSystem& ds, const Vec& x, const GateSet& gates) {
    const double a = evaluate(ds.entry(DesiredEntry::A), x, gates[static_cast<int>(DesiredEntry::A)]);
    const double b =
        evaluate(ds.entry(DesiredEntry::Beta), x, gates[static_cast<int>(DesiredEntry::Beta)]);
    const double c = evaluate(ds.entry(DesiredEntry::C), x, gates[static_cast<int>(DesiredEntry::C)]);
    Mat jd = Mat::zeros(3, 3);
    jd(0, 1) = a;
    jd(1, 0) = -a;
    jd(0, 2) = b;
    jd(2, 0) = -b;
    jd(1, 2) = c;
    jd(2, 1) = -c;
    return jd;
}

Mat assemble_rd(const DesiredSystem& ds, const Vec& x, const GateSet& gates) {
    Mat rd = Mat::zeros(3, 3);
    rd(0, 0) = evaluate(ds.entry(DesiredEntry::D), x, gates[static_cast<int>(DesiredEntry::D)]);
    rd(1, 1) = evaluate(ds.entry(DesiredEntry::E), x, gates[static_cast<int>(DesiredEntry::E)]);
    rd(2, 2) = evaluate(ds.entry(DesiredEntry::F), x, gates[static_cast<int>(DesiredEntry::F)]);
    return rd;
}

Vec desired_drift(const DesiredSystem& ds, const Vec& x, const GateSet& gates) {
    const auto v = entry_values(ds, x, gates);
    const double a = v[0], b = v[1], c = v[2], d = v[3], e = v[4], f = v[5];
    const Vec grad = evaluate_gradient(ds.entry(DesiredEntry::Hd), x,
                                       gates[static_cast<int>(DesiredEntry::Hd)]);
    return {-d * grad[0] + a * grad[1] + b * grad[2],
            -a * grad[0] - e * grad[1] + c * grad[2],
            -b * grad[0] - c * grad[1] - f * grad[2]};
}

Vec feedback(const PlantSystem& plant, const DesiredSystem& ds, const Vec& x,
             const GateSet& gates) {
    const Vec fd = desired_drift(ds, x, gates);
    const Vec f = plant.drift(x);
    return left_pseudo_inverse(plant.input_matrix(x)) * (fd - f);
}

Vec residual_eta(const PlantSystem& plant, const DesiredSystem& ds, const Vec& x,
                 const GateSet& gates) {
    const Vec fd = desired_drift(ds, x, gates);
    const Vec diff = fd - plant.drift(x);
    const Mat g = plant.input_matrix(x);
    return diff - g * (left_pseudo_inverse(g) * diff);
}

Vec closed_loop_drift(const PlantSystem& plant, const DesiredSystem& ds, const Vec& x,
                      const GateSet& gates) {
    return desired_drift(ds, x, gates) - residual_eta(plant, ds, x, gates);
}

double matching_cost(const PlantSystem& plant, const DesiredSystem& ds,
                     const Trajectory& trajectory, const GateSet& gates) {
    if (trajectory.states.empty()) throw std::invalid_argument("trajectory is empty");
    double acc = 0.0;
    for (const Vec& x : trajectory.states)
        acc += norm2_squared(residual_eta(plant, ds, x, gates));
    return acc / static_cast<double>(trajectory.states.size());
}

std::string controller_report(const DesiredSystem& ds,
                              const std::vector<std::string>& variable_names) {
    std::ostringstream out;
    out << "Hd = " << export_expression(ds.entry(DesiredEntry::Hd), variable_names) << "\n";
    for (DesiredEntry e :
         {DesiredEntry::A, DesiredEntry::Beta, DesiredEntry::C, DesiredEntry::D, DesiredEntry::E,
          DesiredEntry::F}) {
        out << desired_entry_name(e) << " = " << export_expression(ds.entry(e), variable_names)
            << "\n";
    }
    out << "u = g^+ ((J_d - R_d) dHd - f)\n";
    out << "Q(0) = " << ds.initial_charge << "\n";
    return out.str();
}

}  // namespace idapbc
