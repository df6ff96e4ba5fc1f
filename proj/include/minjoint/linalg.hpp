#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace minjoint {

using Operator = Eigen::MatrixXcd;

/// Canonical real coordinates of a Hermitian operator: the d diagonal entries,
/// then real and imaginary parts of the strict upper triangle in row-major
/// order. Always d*d coordinates.
Eigen::VectorXd flatten_hermitian(const Operator& op);

/// Inverse of flatten_hermitian.
Operator unflatten_hermitian(const Eigen::VectorXd& coords, Eigen::Index dim);

/// Hilbert-Schmidt inner product tr(A^dagger B); real part only, which is the
/// whole value for Hermitian arguments.
double hs_inner(const Operator& a, const Operator& b);
double hs_norm(const Operator& a);

/// Coordinates in which the Euclidean inner product equals the Hilbert-Schmidt
/// one (off-diagonal coordinates scaled by sqrt 2).
Eigen::VectorXd hs_coordinates(const Operator& op);

/// Numerical rank of the family, counting singular values above
/// rel_tol * sigma_max of the stacked Hilbert-Schmidt coordinates.
Eigen::Index family_rank(std::span<const Operator> ops, double rel_tol);

/// Smallest eigenvalue of the Hermitian part of `op`.
double min_eigenvalue(const Operator& op);

/// Pauli matrices sigma_1..3 and the 2x2 identity.
Operator pauli(int k);
Operator identity2();

}  // namespace minjoint
