#pragma once

#include <Eigen/Dense>
#include <complex>

namespace flateta {

using Matrix = Eigen::MatrixXcd;

// Matrix exponential by scaling-and-squaring with a [6/6] Pade approximant.
Matrix expm(const Matrix& a);

bool is_hermitian(const Matrix& a, double tol);

// smallest eigenvalue of a Hermitian matrix
double hermitian_min_eigenvalue(const Matrix& a);

}  // namespace flateta
