#include "idapbc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace idapbc {

Vec solve_linear(Mat a, Vec b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) {
        throw std::invalid_argument("solve_linear: shape mismatch");
    }
    const double scale = std::max(a.max_abs(), 1e-300);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
                pivot = r;
            }
        }
        if (std::abs(a(pivot, col)) < 1e-13 * scale) {
            throw SingularMatrixError("solve_linear: matrix is numerically singular");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(pivot, c), a(col, c));
            }
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < n; ++c) {
                a(r, c) -= f * a(col, c);
            }
            b[r] -= f * b[col];
        }
    }
    Vec x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) {
            acc -= a(i, c) * x[c];
        }
        x[i] = acc / a(i, i);
    }
    return x;
}

Mat left_pseudo_inverse(const Mat& g) {
    const std::size_t n = g.rows();
    const std::size_t m = g.cols();
    if (m > n) {
        throw std::invalid_argument("left_pseudo_inverse: matrix must be tall (rows >= cols)");
    }
    const Mat gt = g.transpose();
    const Mat gram = gt * g;
    // Invert the Gram matrix column by column; rank deficiency surfaces as a
    // singular solve.
    Mat inv(m, m);
    for (std::size_t c = 0; c < m; ++c) {
        Vec e(m, 0.0);
        e[c] = 1.0;
        Vec col = solve_linear(gram, e);
        for (std::size_t r = 0; r < m; ++r) {
            inv(r, c) = col[r];
        }
    }
    return inv * gt;
}

std::vector<double> characteristic_polynomial(const Mat& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n) {
        throw std::invalid_argument("characteristic_polynomial: matrix must be square");
    }
    // Faddeev-LeVerrier: M_1 = M, c_k = tr(M M_{k-1} ...)/k with sign flips.
    std::vector<double> coeffs(n + 1, 0.0);
    coeffs[0] = 1.0;
    Mat mk = m;
    for (std::size_t k = 1; k <= n; ++k) {
        const double ck = mk.trace() / static_cast<double>(k);
        coeffs[k] = -ck;
        if (k < n) {
            Mat shifted = mk;
            for (std::size_t i = 0; i < n; ++i) {
                shifted(i, i) -= ck;
            }
            mk = m * shifted;
        }
    }
    return coeffs;
}

namespace {

ComplexScalar poly_eval(const std::vector<double>& coeffs, ComplexScalar z) {
    ComplexScalar acc(0.0, 0.0);
    for (double c : coeffs) {
        acc = acc * z + c;
    }
    return acc;
}

/// Durand-Kerner simultaneous iteration on a monic polynomial.
std::vector<ComplexScalar> polynomial_roots(const std::vector<double>& coeffs) {
    const std::size_t deg = coeffs.size() - 1;
    double radius = 0.0;
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        radius = std::max(radius, std::abs(coeffs[k]));
    }
    radius = 1.0 + radius;  // Cauchy bound on root moduli

    std::vector<ComplexScalar> roots(deg);
    const ComplexScalar seed(0.4, 0.9);
    ComplexScalar p(1.0, 0.0);
    for (std::size_t k = 0; k < deg; ++k) {
        p *= seed;
        roots[k] = radius * p;
    }

    for (int iter = 0; iter < 600; ++iter) {
        double max_step = 0.0;
        for (std::size_t k = 0; k < deg; ++k) {
            ComplexScalar denom(1.0, 0.0);
            for (std::size_t j = 0; j < deg; ++j) {
                if (j != k) {
                    denom *= roots[k] - roots[j];
                }
            }
            if (std::abs(denom) == 0.0) {
                continue;
            }
            const ComplexScalar delta = poly_eval(coeffs, roots[k]) / denom;
            roots[k] -= delta;
            max_step = std::max(max_step, std::abs(delta));
        }
        if (max_step < 1e-15 * std::max(1.0, radius)) {
            break;
        }
    }
    return roots;
}

std::vector<double> poly_derivative(const std::vector<double>& coeffs) {
    const std::size_t deg = coeffs.size() - 1;
    std::vector<double> d(deg);
    for (std::size_t k = 0; k < deg; ++k) {
        d[k] = coeffs[k] * static_cast<double>(deg - k);
    }
    return d;
}

/// Newton refinement of an approximate simple root of p.
ComplexScalar newton_polish(const std::vector<double>& coeffs, ComplexScalar z) {
    const std::vector<double> deriv = poly_derivative(coeffs);
    for (int iter = 0; iter < 60; ++iter) {
        const ComplexScalar d = poly_eval(deriv, z);
        if (std::abs(d) == 0.0) {
            break;
        }
        const ComplexScalar step = poly_eval(coeffs, z) / d;
        z -= step;
        if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(z))) {
            break;
        }
    }
    return z;
}

/// Collapse clusters of nearly coincident roots onto one refined value.
///
/// A k-cluster approximates a root of multiplicity k, where the iteration is
/// ill conditioned; that root is a simple root of the (k-1)-th derivative, so
/// polishing the cluster mean there restores full accuracy.
void average_root_clusters(std::vector<ComplexScalar>& roots, const std::vector<double>& coeffs,
                           double scale) {
    const double cluster_radius = 5e-5 * std::max(1.0, scale);
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) {
            continue;
        }
        std::vector<std::size_t> members{i};
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (!used[j] && std::abs(roots[j] - roots[i]) < cluster_radius) {
                members.push_back(j);
                used[j] = true;
            }
        }
        ComplexScalar mean(0.0, 0.0);
        for (std::size_t idx : members) {
            mean += roots[idx];
        }
        mean /= static_cast<double>(members.size());
        std::vector<double> target = coeffs;
        for (std::size_t k = 1; k < members.size(); ++k) {
            target = poly_derivative(target);
        }
        const ComplexScalar polished = newton_polish(target, mean);
        for (std::size_t idx : members) {
            roots[idx] = polished;
        }
    }
}

}  // namespace

std::vector<ComplexScalar> eigenvalues(const Mat& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n) {
        throw std::invalid_argument("eigenvalues: matrix must be square");
    }
    if (n > 4) {
        throw std::invalid_argument("eigenvalues: supported only up to 4x4");
    }
    if (!m.is_finite()) {
        throw std::invalid_argument("eigenvalues: entries must be finite");
    }
    if (n == 1) {
        return {ComplexScalar(m(0, 0), 0.0)};
    }
    const std::vector<double> coeffs = characteristic_polynomial(m);
    std::vector<ComplexScalar> roots;
    if (n == 2) {
        // Quadratic formula; no iteration needed.
        const double b = coeffs[1];
        const double c = coeffs[2];
        const ComplexScalar disc = std::sqrt(ComplexScalar(b * b - 4.0 * c, 0.0));
        roots = {(-b + disc) / 2.0, (-b - disc) / 2.0};
    } else {
        roots = polynomial_roots(coeffs);
        average_root_clusters(roots, coeffs, m.max_abs());
    }
    // A real matrix has conjugate-symmetric spectrum; collapse stray imaginary
    // parts on roots that are real up to iteration noise.
    const double imag_tol = 1e-10 * std::max(1.0, m.max_abs());
    for (auto& r : roots) {
        if (std::abs(r.imag()) < imag_tol) {
            r = ComplexScalar(r.real(), 0.0);
        }
    }
    return roots;
}

Mat matrix_exponential(const Mat& a, double t) {
    const std::size_t n = a.rows();
    if (a.cols() != n) {
        throw std::invalid_argument("matrix_exponential: matrix must be square");
    }
    Mat at = a * t;
    int squarings = 0;
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            row_sum += std::abs(at(r, c));
        }
        norm = std::max(norm, row_sum);
    }
    while (norm > 0.25) {
        norm /= 2.0;
        ++squarings;
    }
    const double factor = std::ldexp(1.0, -squarings);
    at = at * factor;

    Mat result = Mat::identity(n);
    Mat term = Mat::identity(n);
    for (int k = 1; k <= 30; ++k) {
        term = term * at * (1.0 / static_cast<double>(k));
        result = result + term;
        if (term.max_abs() < 1e-20 * std::max(1.0, result.max_abs())) {
            break;
        }
    }
    for (int s = 0; s < squarings; ++s) {
        result = result * result;
    }
    return result;
}

}  // namespace idapbc
