#pragma once

#include <Eigen/Dense>
#include <string>

namespace cps {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Moore-Penrose pseudoinverse via SVD. Singular values below
// rel_cutoff * sigma_max are treated as zero.
MatrixXd pinv(const MatrixXd& M, double rel_cutoff = 1e-10);

// Numerical rank with the same cutoff convention as pinv.
int numerical_rank(const MatrixXd& M, double rel_cutoff = 1e-10);

// (M + M^T) / 2
MatrixXd symmetrize(const MatrixXd& M);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const MatrixXd& S);

// Spectral radius (dense eigensolver).
double spectral_radius(const MatrixXd& A);

// Symmetric PSD square root E with E^T E = S (negative eigenvalues clamped).
MatrixXd psd_sqrt(const MatrixXd& S);

// Lower Cholesky factor; throws DomainError if S is not positive definite.
MatrixXd cholesky_lower(const MatrixXd& S);

// Row-major text serialization used by the matrix archive and CSV export.
std::string matrix_to_text(const MatrixXd& M);

}  // namespace cps
