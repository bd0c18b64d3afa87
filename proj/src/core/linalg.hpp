#pragma once

#include <Eigen/Dense>
#include <complex>

namespace resilience {

using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

// e^A by scaling and squaring around a diagonal [6/6] Pade approximant.
Matrix expm(const Matrix& a);

// Largest singular value.
double spectral_norm(const Matrix& m);
double spectral_norm(const ComplexMatrix& m);

double max_real_eigenvalue(const Matrix& a);

// Solves A C + C A^T + S = 0 through the N^2-dimensional Kronecker system.
Matrix lyapunov_solve(const Matrix& a, const Matrix& s);

}  // namespace resilience
