#pragma once

#include <cmath>

namespace idapbc {

// Generic scalar hooks used by code templated over double / reverse-mode
// values. The autodiff header provides the overloads for its tape type.

inline double value_of(double x) { return x; }

inline double tmax(double a, double b) { return a >= b ? a : b; }
inline double tmin(double a, double b) { return a <= b ? a : b; }
inline double tabs(double a) { return std::abs(a); }
inline double texp(double a) { return std::exp(a); }
inline double tlog(double a) { return std::log(a); }

/// Numerically stable logistic function.
template <class T>
T sigmoid(const T& z) {
    if (value_of(z) >= 0.0) {
        return 1.0 / (1.0 + texp(-z));
    }
    const T e = texp(z);
    return e / (1.0 + e);
}

template <class T>
T clamp01(const T& x) {
    return tmin(tmax(x, T(0.0)), T(1.0));
}

}  // namespace idapbc
