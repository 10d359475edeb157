#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "idapbc/mat.hpp"

namespace idapbc {

/// Uniform-grid time series of states and the inputs applied along it.
///
/// The grid always has an even number of steps so the half-horizon T/2 lies
/// exactly on a grid point.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> inputs;

    std::size_t size() const { return times.size(); }
    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }

    double step_size() const {
        if (times.size() < 2) {
            throw std::invalid_argument("Trajectory: need at least two grid points");
        }
        return times[1] - times[0];
    }

    double horizon() const { return times.empty() ? 0.0 : times.back() - times.front(); }

    /// Inputs may be absent (empty) or one per grid point.
    void validate() const {
        if (times.empty()) {
            throw std::invalid_argument("Trajectory: empty");
        }
        if (times.size() != states.size()) {
            throw std::invalid_argument("Trajectory: times/states length mismatch");
        }
        if (!inputs.empty() && inputs.size() != times.size()) {
            throw std::invalid_argument("Trajectory: inputs length mismatch");
        }
        if (steps() % 2 != 0) {
            throw std::invalid_argument("Trajectory: step count must be even");
        }
    }
};

}  // namespace idapbc
