#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "idapbc/mat.hpp"

namespace idapbc {

/// Thrown when a linear solve meets a numerically rank-deficient matrix.
class SingularMatrixError : public std::runtime_error {
public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Solve A x = b for square A by Gaussian elimination with partial pivoting.
Vec solve_linear(Mat a, Vec b);

/// Left pseudo-inverse (A^T A)^{-1} A^T of a tall full-column-rank matrix.
/// Throws SingularMatrixError when A^T A is numerically singular.
Mat left_pseudo_inverse(const Mat& g);

/// Eigenvalues of a small dense matrix (n <= 4), with multiplicity.
///
/// Computed from the characteristic polynomial (Faddeev-LeVerrier) with a
/// Durand-Kerner root pass, conjugate pairing, and cluster averaging for
/// near-multiple roots. Returned in the order produced by the root finder;
/// callers that need a specific order sort themselves.
std::vector<ComplexScalar> eigenvalues(const Mat& m);

/// e^{A t} by scaling-and-squaring with a truncated Taylor series.
Mat matrix_exponential(const Mat& a, double t);

/// Characteristic polynomial coefficients of M (monic, highest power first):
/// lambda^n + c[1] lambda^{n-1} + ... + c[n]. Exposed for testing.
std::vector<double> characteristic_polynomial(const Mat& m);

}  // namespace idapbc
