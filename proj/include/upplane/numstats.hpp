#pragma once

#include <Eigen/Dense>

#include "upplane/error.hpp"

namespace upplane::numstats {

// Batch of n real-valued sample vectors of dimension d, one per row.
class SampleSet {
 public:
  explicit SampleSet(Eigen::MatrixXd data);

  const Eigen::MatrixXd& data() const { return data_; }
  Eigen::Index n() const { return data_.rows(); }
  Eigen::Index d() const { return data_.cols(); }

 private:
  Eigen::MatrixXd data_;
};

// Symmetric positive semidefinite matrix with cached eigendecomposition and
// log-determinant. Construction symmetrizes within a 1e-10 relative
// tolerance, rejects indefinite input, and floors eigenvalues at
// eps_floor = 1e-12 * max(lambda_max, 1) so log-determinants stay finite for
// rank-deficient empirical covariances.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Eigen::MatrixXd& matrix);

  static SpdMatrix identity(Eigen::Index d, double scale = 1.0);
  static SpdMatrix diagonal(const Eigen::VectorXd& diag);

  Eigen::Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  // Descending, already floored at eps_floor.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  // Columns paired with eigenvalues().
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  double logdet() const { return logdet_; }
  double eps_floor() const { return eps_floor_; }

  // Solves A x = rhs through the cached eigendecomposition.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  // F with F * F^T == entries(); used for Gaussian sampling.
  Eigen::MatrixXd factor() const;

 private:
  Eigen::MatrixXd entries_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  double logdet_ = 0.0;
  double eps_floor_ = 0.0;
};

struct GaussianModel {
  Eigen::VectorXd mean;
  SpdMatrix cov;

  GaussianModel(Eigen::VectorXd mean_in, SpdMatrix cov_in);
  Eigen::Index dim() const { return cov.dim(); }
};

// Unbiased sample covariance (1/(n-1)) sum (x-mean)(x-mean)^T + ridge * I.
SpdMatrix sample_covariance(const SampleSet& s, double ridge = 0.0);

// Differential entropy of N(mu, cov): 0.5 * ln((2 pi e)^d det cov).
double gaussian_entropy(const SpdMatrix& cov);

// N = (1/(2 pi e)) exp(2 h / d).
double entropy_power(double h, int d);

// Renyi divergence of order 1/2 between Gaussians (closed form).
double gaussian_renyi_half(const GaussianModel& p, const GaussianModel& q);

// psi(x) for x > 0, absolute error <= 1e-10.
double digamma(double x);

}  // namespace upplane::numstats
