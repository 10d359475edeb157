#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "idapbc/scalar.hpp"

namespace idapbc {

/// One recorded operation: up to two parents with the local partials of the
/// result with respect to them. A parent index of -1 means "constant".
struct TapeNode {
    double d1, d2;
    int p1, p2;
};

/// Append-only record of a scalar computation; adjoints(<output>) runs the
/// reverse sweep and returns one adjoint per node.
class Tape {
public:
    int record(double d1, int p1, double d2, int p2) {
        nodes_.push_back({d1, d2, p1, p2});
        return static_cast<int>(nodes_.size()) - 1;
    }
    int leaf_index() { return record(0.0, -1, 0.0, -1); }

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }
    void reserve(std::size_t n) { nodes_.reserve(n); }

    std::vector<double> adjoints(int output_index) const {
        if (output_index < 0 || output_index >= static_cast<int>(nodes_.size()))
            throw std::out_of_range("tape output index out of range");
        std::vector<double> adj(nodes_.size(), 0.0);
        adj[output_index] = 1.0;
        for (int i = output_index; i >= 0; --i) {
            const double a = adj[i];
            if (a == 0.0) continue;
            const TapeNode& n = nodes_[i];
            if (n.p1 >= 0) adj[n.p1] += n.d1 * a;
            if (n.p2 >= 0) adj[n.p2] += n.d2 * a;
        }
        return adj;
    }

private:
    std::vector<TapeNode> nodes_;
};

/// Reverse-mode scalar: a value plus its node index on the active tape.
/// Index -1 marks a constant that records nothing.
struct Rev {
    double v = 0.0;
    int i = -1;

    Rev() = default;
    Rev(double value) : v(value) {}  // NOLINT: implicit constant lift
    Rev(double value, int index) : v(value), i(index) {}
};

namespace ad {

inline Tape*& active_tape() {
    thread_local Tape* tape = nullptr;
    return tape;
}

/// Installs a tape as the active one for the current thread while in scope.
class TapeScope {
public:
    explicit TapeScope(Tape& tape) : prev_(active_tape()) { active_tape() = &tape; }
    ~TapeScope() { active_tape() = prev_; }
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* prev_;
};

/// New differentiable leaf on the active tape.
inline Rev leaf(double value) {
    Tape* t = active_tape();
    if (!t) throw std::logic_error("no active tape");
    return Rev(value, t->leaf_index());
}

inline Rev binary(double value, const Rev& a, double da, const Rev& b, double db) {
    if (a.i < 0 && b.i < 0) return Rev(value);
    return Rev(value, active_tape()->record(da, a.i, db, b.i));
}

inline Rev unary(double value, const Rev& a, double da) {
    if (a.i < 0) return Rev(value);
    return Rev(value, active_tape()->record(da, a.i, 0.0, -1));
}

}  // namespace ad

inline double value_of(const Rev& x) { return x.v; }

inline Rev operator+(const Rev& a, const Rev& b) { return ad::binary(a.v + b.v, a, 1.0, b, 1.0); }
inline Rev operator-(const Rev& a, const Rev& b) { return ad::binary(a.v - b.v, a, 1.0, b, -1.0); }
inline Rev operator*(const Rev& a, const Rev& b) { return ad::binary(a.v * b.v, a, b.v, b, a.v); }
inline Rev operator/(const Rev& a, const Rev& b) {
    const double inv = 1.0 / b.v;
    return ad::binary(a.v * inv, a, inv, b, -a.v * inv * inv);
}
inline Rev operator-(const Rev& a) { return ad::unary(-a.v, a, -1.0); }
inline Rev operator+(const Rev& a) { return a; }

inline Rev operator+(const Rev& a, double b) { return ad::unary(a.v + b, a, 1.0); }
inline Rev operator+(double a, const Rev& b) { return ad::unary(a + b.v, b, 1.0); }
inline Rev operator-(const Rev& a, double b) { return ad::unary(a.v - b, a, 1.0); }
inline Rev operator-(double a, const Rev& b) { return ad::unary(a - b.v, b, -1.0); }
inline Rev operator*(const Rev& a, double b) { return ad::unary(a.v * b, a, b); }
inline Rev operator*(double a, const Rev& b) { return ad::unary(a * b.v, b, a); }
inline Rev operator/(const Rev& a, double b) { return ad::unary(a.v / b, a, 1.0 / b); }
inline Rev operator/(double a, const Rev& b) {
    const double inv = 1.0 / b.v;
    return ad::unary(a * inv, b, -a * inv * inv);
}

inline Rev& operator+=(Rev& a, const Rev& b) { return a = a + b; }
inline Rev& operator-=(Rev& a, const Rev& b) { return a = a - b; }
inline Rev& operator*=(Rev& a, const Rev& b) { return a = a * b; }
inline Rev& operator/=(Rev& a, const Rev& b) { return a = a / b; }

inline Rev texp(const Rev& a) {
    const double e = std::exp(a.v);
    return ad::unary(e, a, e);
}
inline Rev tlog(const Rev& a) { return ad::unary(std::log(a.v), a, 1.0 / a.v); }
inline Rev tsqrt(const Rev& a) {
    const double s = std::sqrt(a.v);
    return ad::unary(s, a, 0.5 / s);
}

/// Subgradient 0 at the kink.
inline Rev tabs(const Rev& a) {
    const double s = a.v > 0.0 ? 1.0 : (a.v < 0.0 ? -1.0 : 0.0);
    return ad::unary(std::abs(a.v), a, s);
}

/// Ties take the first argument, matching the double overloads.
inline Rev tmax(const Rev& a, const Rev& b) { return a.v >= b.v ? a : b; }
inline Rev tmin(const Rev& a, const Rev& b) { return a.v <= b.v ? a : b; }

inline double tsqrt(double a) { return std::sqrt(a); }

}  // namespace idapbc
