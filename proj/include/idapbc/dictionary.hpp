#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "idapbc/mat.hpp"
#include "idapbc/scalar.hpp"

namespace idapbc {

/// Monomial dictionary over n_vars variables up to a total degree.
///
/// Terms are held in graded lexicographic order: ascending total degree,
/// and within a degree block the exponent tuples in descending lexicographic
/// order (earlier variables carry the higher powers first). The constant
/// monomial is always term 0. For n = 3 and degree 2 over (q, p, Q) the order
/// is 1, q, p, Q, q^2, q*p, q*Q, p^2, p*Q, Q^2.
struct PolynomialLibrary {
    int n_vars = 0;
    int max_degree = 0;
    std::vector<std::vector<int>> terms;

    static PolynomialLibrary make(int n_vars, int max_degree);

    std::size_t size() const { return terms.size(); }

    bool operator==(const PolynomialLibrary& o) const {
        return n_vars == o.n_vars && max_degree == o.max_degree;
    }
};

/// Stretch and temperature constants of the hard-concrete gate distribution.
struct HardConcreteConstants {
    double beta = 2.0 / 3.0;  // concrete temperature, in (0, 1]
    double gamma = -0.1;      // lower stretch, negative
    double zeta = 1.1;        // upper stretch, > 1

    void validate() const {
        if (!(gamma < 0.0) || !(zeta > 1.0) || !(beta > 0.0 && beta <= 1.0)) {
            throw std::invalid_argument("HardConcreteConstants: need gamma < 0 < 1 < zeta, beta in (0,1]");
        }
    }
};

/// One dictionary-parameterized scalar function: coefficients xi plus a
/// hard-concrete gate per term.
struct SparseLinearModel {
    PolynomialLibrary library;
    std::vector<double> xi;
    std::vector<double> log_alpha;
    HardConcreteConstants constants;

    SparseLinearModel() = default;
    explicit SparseLinearModel(PolynomialLibrary lib)
        : library(std::move(lib)), xi(library.size(), 0.0), log_alpha(library.size(), 0.0) {}

    void validate() const {
        constants.validate();
        if (xi.size() != library.size() || log_alpha.size() != library.size()) {
            throw std::invalid_argument("SparseLinearModel: parameter length must match library size");
        }
    }
};

namespace detail {
constexpr int kMaxLibraryVars = 8;
constexpr int kMaxLibraryDegree = 8;
}  // namespace detail

/// Evaluate all monomials at x into out (length lib.size()).
template <class T>
void features_into(const PolynomialLibrary& lib, const T* x, T* out) {
    T powers[detail::kMaxLibraryVars][detail::kMaxLibraryDegree + 1];
    for (int v = 0; v < lib.n_vars; ++v) {
        powers[v][0] = T(1.0);
        for (int e = 1; e <= lib.max_degree; ++e) {
            powers[v][e] = powers[v][e - 1] * x[v];
        }
    }
    for (std::size_t j = 0; j < lib.terms.size(); ++j) {
        T acc = T(1.0);
        bool first = true;
        for (int v = 0; v < lib.n_vars; ++v) {
            const int e = lib.terms[j][v];
            if (e == 0) {
                continue;
            }
            acc = first ? powers[v][e] : acc * powers[v][e];
            first = false;
        }
        out[j] = acc;
    }
}

/// Row-major D x n Jacobian of the monomials at x.
template <class T>
void feature_jacobian_into(const PolynomialLibrary& lib, const T* x, T* out) {
    T powers[detail::kMaxLibraryVars][detail::kMaxLibraryDegree + 1];
    for (int v = 0; v < lib.n_vars; ++v) {
        powers[v][0] = T(1.0);
        for (int e = 1; e <= lib.max_degree; ++e) {
            powers[v][e] = powers[v][e - 1] * x[v];
        }
    }
    for (std::size_t j = 0; j < lib.terms.size(); ++j) {
        for (int i = 0; i < lib.n_vars; ++i) {
            const int ei = lib.terms[j][i];
            if (ei == 0) {
                out[j * lib.n_vars + i] = T(0.0);
                continue;
            }
            T acc = static_cast<double>(ei) * powers[i][ei - 1];
            for (int v = 0; v < lib.n_vars; ++v) {
                const int e = lib.terms[j][v];
                if (v == i || e == 0) {
                    continue;
                }
                acc = acc * powers[v][e];
            }
            out[j * lib.n_vars + i] = acc;
        }
    }
}

Vec features(const PolynomialLibrary& lib, const Vec& x);
Mat feature_jacobian(const PolynomialLibrary& lib, const Vec& x);

// Gate primitives, shared by the double API and the gradient engine.

/// Test-time gate z = clamp01(sigmoid(log_alpha) (zeta - gamma) + gamma).
template <class T>
T hard_concrete_deterministic(const T& log_alpha, const HardConcreteConstants& hc) {
    const T s = sigmoid(log_alpha);
    return clamp01(s * (hc.zeta - hc.gamma) + hc.gamma);
}

/// Training-time stochastic gate via the binary-concrete reparameterization.
/// noise must lie strictly in (0, 1).
template <class T>
T hard_concrete_sample(const T& log_alpha, double noise, const HardConcreteConstants& hc) {
    if (!(noise > 0.0 && noise < 1.0)) {
        throw std::invalid_argument("hard_concrete_sample: noise must be in (0,1)");
    }
    const double logit_noise = std::log(noise) - std::log1p(-noise);
    const T s = sigmoid((log_alpha + logit_noise) * (1.0 / hc.beta));
    return clamp01(s * (hc.zeta - hc.gamma) + hc.gamma);
}

/// Expected number of open gates: sigma(log_alpha - beta log(-gamma/zeta)).
template <class T>
T l0_term(const T& log_alpha, const HardConcreteConstants& hc) {
    const double shift = hc.beta * std::log(-hc.gamma / hc.zeta);
    return sigmoid(log_alpha - shift);
}

Vec deterministic_gates(const SparseLinearModel& model);
Vec sample_gates(const SparseLinearModel& model, const Vec& noise);
double l0_penalty(const SparseLinearModel& model);

/// Gated dictionary value sum_j gates_j xi_j theta_j(x).
double evaluate(const SparseLinearModel& model, const Vec& x, const Vec& gates);

/// Gradient of the gated dictionary value with respect to x.
Vec evaluate_gradient(const SparseLinearModel& model, const Vec& x, const Vec& gates);

/// Human-readable polynomial with test-time-active terms only (gate >= 0.5),
/// coefficients to four decimals, in library term order.
std::string export_expression(const SparseLinearModel& model,
                              const std::vector<std::string>& variable_names);

/// Number of terms whose deterministic gate is at least 0.5.
int active_term_count(const SparseLinearModel& model);

}  // namespace idapbc
