#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mtgbn/errors.hpp"
#include "mtgbn/rng.hpp"

namespace mtgbn {

// Symmetric positive-definite matrix with its Cholesky factor cached.
//
// Construction checks symmetry to 1e-12 relative tolerance, symmetrizes exactly,
// and factorizes; failure of either check throws. logdet() and solves reuse the
// cached lower factor.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  // Lower-triangular Cholesky factor L with M = L L^T, positive diagonal.
  const Eigen::MatrixXd& chol_lower() const { return l_; }
  double logdet() const { return logdet_; }
  // Solve M x = b via the cached factor.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  Eigen::MatrixXd inverse() const;

 private:
  Eigen::MatrixXd m_;
  Eigen::MatrixXd l_;
  double logdet_;
};

// Unconstrained lower-triangular parameterization of an SPD matrix:
// v_ii = log(l_ii), v_ij = l_ij below the diagonal, strict upper zero.
class CholState {
 public:
  explicit CholState(Eigen::MatrixXd v);
  static CholState zero(int p);

  int dim() const { return static_cast<int>(v_.rows()); }
  const Eigen::MatrixXd& v() const { return v_; }
  double operator()(int i, int j) const { return v_(i, j); }

  // Number of free entries, p(p+1)/2.
  int packed_size() const { return dim() * (dim() + 1) / 2; }
  // Row-major lower-triangle flattening used by the sampler's phase space.
  Eigen::VectorXd packed() const;
  static CholState from_packed(int p, const Eigen::VectorXd& x);

 private:
  Eigen::MatrixXd v_;
};

// Forward map: SPD matrix -> unconstrained triangle (via its Cholesky factor).
CholState transform(const SpdMatrix& sigma);

// Inverse map: rebuilds L (exponentiating the diagonal) and returns L L^T.
// Throws Overflow if exponentiation leaves the finite range.
SpdMatrix inverse_transform(const CholState& v);

// Log multivariate gamma, log Gamma_d(a) = d(d-1)/4 * log(pi) + sum_j lgamma(a-(j-1)/2).
// Requires a > (d-1)/2.
double lmvgamma(int d, double a);

// Log-determinant of the principal submatrix of `m` indexed by `idx` (sorted, unique).
// Empty idx gives 0, the log-determinant of the empty matrix.
double logdet_sub(const SpdMatrix& m, const std::vector<int>& idx);

// Uniformly random SPD matrix with unit trace: eigenvalues uniform on the simplex
// (flat Dirichlet), eigenvectors Haar-distributed via sign-fixed QR.
SpdMatrix sample_uniform_spd_unit_trace(int p, Rng& rng);

// Inverse-Wishart draw with scale matrix `scale` and degrees of freedom `nu`
// (density proportional to |X|^{-(nu+p+1)/2} exp(-tr(scale X^{-1})/2); mean
// scale/(nu-p-1) for nu > p+1). Bartlett construction. Requires nu > p-1.
SpdMatrix sample_inverse_wishart(const SpdMatrix& scale, double nu, Rng& rng);

// n rows of a zero-mean multivariate normal with the given covariance.
Eigen::MatrixXd sample_mvn(const SpdMatrix& cov, int n, Rng& rng);

// Zero-mean sample covariance S = D^T D / n. Symmetric PSD, possibly singular.
Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& data);

}  // namespace mtgbn
