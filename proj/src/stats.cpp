#include "mtgbn/stats.hpp"

#include <cmath>

namespace mtgbn {

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw DimensionMismatch("SpdMatrix: matrix must be square and non-empty");
  }
  const double scale = m_.cwiseAbs().maxCoeff();
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * (1.0 + scale)) {
    throw NotSymmetric("SpdMatrix: matrix is not symmetric");
  }
  m_ = ((m_ + m_.transpose()) / 2.0).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("SpdMatrix: Cholesky factorization failed");
  }
  l_ = llt.matrixL();
  // A semidefinite matrix can slip through LLT with a zero pivot; reject it.
  if ((l_.diagonal().array() <= 0.0).any() || !l_.allFinite()) {
    throw NotPositiveDefinite("SpdMatrix: non-positive Cholesky pivot");
  }
  logdet_ = 2.0 * l_.diagonal().array().log().sum();
}

Eigen::MatrixXd SpdMatrix::solve(const Eigen::MatrixXd& b) const {
  // M = L L^T: forward then back substitution against the cached factor.
  Eigen::MatrixXd y = l_.triangularView<Eigen::Lower>().solve(b);
  return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd SpdMatrix::inverse() const {
  return solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

CholState::CholState(Eigen::MatrixXd v) : v_(std::move(v)) {
  if (v_.rows() != v_.cols() || v_.rows() == 0) {
    throw DimensionMismatch("CholState: matrix must be square and non-empty");
  }
  for (int i = 0; i < v_.rows(); ++i) {
    for (int j = i + 1; j < v_.cols(); ++j) {
      if (v_(i, j) != 0.0) {
        throw DomainError("CholState: strict upper triangle must be zero");
      }
    }
  }
}

CholState CholState::zero(int p) { return CholState(Eigen::MatrixXd::Zero(p, p)); }

Eigen::VectorXd CholState::packed() const {
  Eigen::VectorXd x(packed_size());
  int k = 0;
  for (int i = 0; i < dim(); ++i) {
    for (int j = 0; j <= i; ++j) x[k++] = v_(i, j);
  }
  return x;
}

CholState CholState::from_packed(int p, const Eigen::VectorXd& x) {
  if (x.size() != p * (p + 1) / 2) {
    throw DimensionMismatch("CholState: packed vector has wrong length");
  }
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(p, p);
  int k = 0;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) v(i, j) = x[k++];
  }
  return CholState(std::move(v));
}

CholState transform(const SpdMatrix& sigma) {
  Eigen::MatrixXd v = sigma.chol_lower();
  for (int i = 0; i < v.rows(); ++i) v(i, i) = std::log(v(i, i));
  for (int i = 0; i < v.rows(); ++i) {
    for (int j = i + 1; j < v.cols(); ++j) v(i, j) = 0.0;
  }
  return CholState(std::move(v));
}

SpdMatrix inverse_transform(const CholState& v) {
  Eigen::MatrixXd l = v.v();
  for (int i = 0; i < l.rows(); ++i) l(i, i) = std::exp(l(i, i));
  if (!l.allFinite()) {
    throw Overflow("inverse_transform: exponentiated diagonal is not finite");
  }
  Eigen::MatrixXd sigma = l * l.transpose();
  if (!sigma.allFinite()) {
    throw Overflow("inverse_transform: reconstructed matrix is not finite");
  }
  return SpdMatrix(std::move(sigma));
}

double lmvgamma(int d, double a) {
  if (d < 1) throw DomainError("lmvgamma: dimension must be positive");
  if (!(a > (d - 1) / 2.0)) {
    throw DomainError("lmvgamma: argument must exceed (d-1)/2");
  }
  double out = d * (d - 1) / 4.0 * std::log(M_PI);
  for (int j = 1; j <= d; ++j) out += std::lgamma(a - (j - 1) / 2.0);
  return out;
}

double logdet_sub(const SpdMatrix& m, const std::vector<int>& idx) {
  if (idx.empty()) return 0.0;
  const int c = static_cast<int>(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= m.dim()) {
      throw DimensionMismatch("logdet_sub: index out of range");
    }
    if (k > 0 && idx[k] <= idx[k - 1]) {
      throw DomainError("logdet_sub: indices must be sorted and unique");
    }
  }
  if (c == m.dim()) return m.logdet();
  Eigen::MatrixXd sub(c, c);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) sub(i, j) = m(idx[i], idx[j]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("logdet_sub: principal submatrix not positive definite");
  }
  Eigen::MatrixXd l = llt.matrixL();
  return 2.0 * l.diagonal().array().log().sum();
}

SpdMatrix sample_uniform_spd_unit_trace(int p, Rng& rng) {
  if (p < 1) throw DimensionMismatch("sample_uniform_spd_unit_trace: p must be positive");
  // Flat Dirichlet via normalized standard exponentials.
  Eigen::VectorXd lambda(p);
  for (int i = 0; i < p; ++i) lambda[i] = -std::log(1.0 - rng.uniform());
  lambda /= lambda.sum();
  // Haar orthogonal matrix: QR of a Ginibre matrix, sign-fixed so R has positive diagonal.
  Eigen::MatrixXd z(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return SpdMatrix(q * lambda.asDiagonal() * q.transpose());
}

SpdMatrix sample_inverse_wishart(const SpdMatrix& scale, double nu, Rng& rng) {
  const int p = scale.dim();
  if (!(nu > p - 1)) {
    throw DomainError("sample_inverse_wishart: need nu > p - 1");
  }
  // X^{-1} ~ Wishart(scale^{-1}, nu) via Bartlett: X^{-1} = (K A)(K A)^T with
  // scale^{-1} = K K^T; diagonal of A is sqrt(chi^2_{nu-i+1}), strict lower normal.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(nu - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  // K = L^{-T} where scale = L L^T; avoid forming the inverse explicitly:
  // X = (K A)^{-T} (K A)^{-1} with (K A)^{-1} = A^{-1} K^{-1} = A^{-1} L^T.
  Eigen::MatrixXd b = a.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd(scale.chol_lower().transpose()));
  return SpdMatrix(b.transpose() * b);
}

Eigen::MatrixXd sample_mvn(const SpdMatrix& cov, int n, Rng& rng) {
  if (n < 1) throw DomainError("sample_mvn: need at least one row");
  const int p = cov.dim();
  Eigen::MatrixXd z(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  return z * cov.chol_lower().transpose();
}

Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& data) {
  if (data.rows() < 1 || data.cols() < 1) {
    throw DimensionMismatch("sample_cov: data must be non-empty");
  }
  Eigen::MatrixXd s = data.transpose() * data / static_cast<double>(data.rows());
  return ((s + s.transpose()) / 2.0).eval();
}

}  // namespace mtgbn
