#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "idapbc/mat.hpp"

namespace testutil {

/// Mixed absolute/relative closeness: |a - b| <= max(atol, rtol |b|).
inline bool close(double a, double b, double atol, double rtol = 0.0) {
    return std::abs(a - b) <= std::max(atol, rtol * std::abs(b));
}

inline idapbc::Mat random_mat(std::mt19937& rng, std::size_t rows, std::size_t cols,
                              double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    idapbc::Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

inline idapbc::Vec random_vec(std::mt19937& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    idapbc::Vec v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

/// Greedy nearest matching of computed eigenvalues to expected ones; returns
/// the largest pairing distance.
inline double eigen_match_distance(std::vector<std::complex<double>> got,
                                   std::vector<std::complex<double>> expected) {
    double worst = 0.0;
    for (const auto& e : expected) {
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t i = 0; i < got.size(); ++i) {
            const double d = std::abs(got[i] - e);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        worst = std::max(worst, best_d);
        got.erase(got.begin() + best);
    }
    return worst;
}

}  // namespace testutil
