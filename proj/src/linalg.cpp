#include "cps/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cstdio>

#include "cps/errors.hpp"

namespace cps {

MatrixXd pinv(const MatrixXd& M, double rel_cutoff) {
  if (M.size() == 0) return MatrixXd(M.cols(), M.rows());
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cutoff = rel_cutoff * sv(0);
  VectorXd inv_sv = VectorXd::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv_sv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const MatrixXd& M, double rel_cutoff) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  double cutoff = rel_cutoff * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return r;
}

MatrixXd symmetrize(const MatrixXd& M) { return 0.5 * (M + M.transpose()); }

double min_eigenvalue(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_radius(const MatrixXd& A) {
  Eigen::EigenSolver<MatrixXd> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

MatrixXd psd_sqrt(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(S));
  VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return lam.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd cholesky_lower(const MatrixXd& S) {
  Eigen::LLT<MatrixXd> llt(symmetrize(S));
  if (llt.info() != Eigen::Success)
    throw DomainError("cholesky_lower: matrix is not positive definite");
  return llt.matrixL();
}

std::string matrix_to_text(const MatrixXd& M) {
  std::string out;
  char buf[40];
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
      out += buf;
      out += (j + 1 < M.cols()) ? ' ' : '\n';
    }
  }
  return out;
}

}  // namespace cps
