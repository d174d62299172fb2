#pragma once

#include <Eigen/Dense>

namespace fsd::linalg {

/// X^T X / N for an N x p design (p x p Gram matrix).
Eigen::MatrixXd gram_primal(const Eigen::MatrixXd& design);

/// X X^T / N for an N x p design (N x N Gram matrix).
Eigen::MatrixXd gram_dual(const Eigen::MatrixXd& design);

struct SymEig {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns match values
};

/// Full symmetric eigendecomposition (LAPACK divide-and-conquer).
SymEig sym_eig(const Eigen::MatrixXd& a);

/// Eigenvalues only, ascending.
Eigen::VectorXd sym_eigvals(const Eigen::MatrixXd& a);

/// Largest-magnitude eigenvalue of a symmetric matrix.
double sym_op_norm(const Eigen::MatrixXd& a);

}  // namespace fsd::linalg
