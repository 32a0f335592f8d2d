#include "upplane/numstats.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace upplane::numstats {

namespace {

constexpr double kLog2PiE = 2.8378770664093453;  // ln(2 pi e)

void require(bool ok, Errc code, const char* msg) {
  if (!ok) throw Error(code, msg);
}

}  // namespace

SampleSet::SampleSet(Eigen::MatrixXd data) : data_(std::move(data)) {
  require(data_.rows() >= 1 && data_.cols() >= 1, Errc::EmptyInput,
          "sample set needs n >= 1 and d >= 1");
  require(data_.allFinite(), Errc::NonFinite,
          "sample set contains a non-finite entry");
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& matrix) {
  require(matrix.rows() == matrix.cols(), Errc::DimensionMismatch,
          "SPD matrix must be square");
  require(matrix.allFinite(), Errc::NonFinite,
          "SPD matrix contains a non-finite entry");
  const double scale = matrix.cwiseAbs().maxCoeff();
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10 * scale || scale == 0.0, Errc::NotSymmetric,
          "matrix is not symmetric within tolerance");

  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  require(es.info() == Eigen::Success, Errc::NonConvergence,
          "eigendecomposition failed");

  // Eigen returns ascending order; store descending.
  const Eigen::Index d = sym.rows();
  Eigen::VectorXd lam(d);
  Eigen::MatrixXd vec(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    lam[i] = es.eigenvalues()[d - 1 - i];
    vec.col(i) = es.eigenvectors().col(d - 1 - i);
  }

  const double lam_max = lam[0];
  require(lam[d - 1] >= -1e-10 * std::max(lam_max, 0.0),
          Errc::NotPositiveSemiDefinite,
          "matrix has a significantly negative eigenvalue");

  eps_floor_ = 1e-12 * std::max(lam_max, 1.0);
  logdet_ = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    lam[i] = std::max(lam[i], eps_floor_);
    logdet_ += std::log(lam[i]);
  }

  eigenvalues_ = lam;
  eigenvectors_ = vec;
  entries_ = vec * lam.asDiagonal() * vec.transpose();
  entries_ = 0.5 * (entries_ + entries_.transpose().eval());
}

SpdMatrix SpdMatrix::identity(Eigen::Index d, double scale) {
  return SpdMatrix(Eigen::MatrixXd(scale *
                                   Eigen::MatrixXd::Identity(d, d)));
}

SpdMatrix SpdMatrix::diagonal(const Eigen::VectorXd& diag) {
  return SpdMatrix(Eigen::MatrixXd(diag.asDiagonal()));
}

Eigen::MatrixXd SpdMatrix::solve(const Eigen::MatrixXd& rhs) const {
  require(rhs.rows() == dim(), Errc::DimensionMismatch,
          "solve: rhs dimension mismatch");
  return eigenvectors_ *
         eigenvalues_.cwiseInverse().asDiagonal() *
         (eigenvectors_.transpose() * rhs);
}

Eigen::MatrixXd SpdMatrix::factor() const {
  return eigenvectors_ * eigenvalues_.cwiseSqrt().asDiagonal();
}

GaussianModel::GaussianModel(Eigen::VectorXd mean_in, SpdMatrix cov_in)
    : mean(std::move(mean_in)), cov(std::move(cov_in)) {
  require(mean.size() == cov.dim(), Errc::DimensionMismatch,
          "Gaussian mean dimension must match covariance dimension");
}

SpdMatrix sample_covariance(const SampleSet& s, double ridge) {
  require(s.n() >= 2, Errc::TooFewSamples,
          "sample covariance needs at least two samples");
  require(ridge >= 0.0 && std::isfinite(ridge), Errc::DomainError,
          "ridge must be a finite nonnegative real");
  const Eigen::RowVectorXd mean = s.data().colwise().mean();
  const Eigen::MatrixXd centered = s.data().rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(s.n() - 1);
  cov.diagonal().array() += ridge;
  return SpdMatrix(cov);
}

double gaussian_entropy(const SpdMatrix& cov) {
  return 0.5 * (static_cast<double>(cov.dim()) * kLog2PiE + cov.logdet());
}

double entropy_power(double h, int d) {
  require(d >= 1, Errc::DomainError, "entropy power needs d >= 1");
  require(std::isfinite(h), Errc::DomainError, "entropy must be finite");
  const double exponent = 2.0 * h / static_cast<double>(d);
  require(exponent <= 709.0, Errc::Overflow,
          "entropy power exponent exceeds double range");
  return std::exp(exponent) / (2.0 * M_PI * M_E);
}

double gaussian_renyi_half(const GaussianModel& p, const GaussianModel& q) {
  require(p.dim() == q.dim(), Errc::DimensionMismatch,
          "divergence needs equal dimensions");
  const SpdMatrix mid(0.5 * (p.cov.entries() + q.cov.entries()));
  const Eigen::VectorXd diff = p.mean - q.mean;
  const double quad = 0.25 * diff.dot(mid.solve(diff).col(0));
  const double logdet_term =
      mid.logdet() - 0.5 * (p.cov.logdet() + q.cov.logdet());
  return std::max(0.0, quad + logdet_term);
}

double digamma(double x) {
  require(std::isfinite(x) && x > 0.0, Errc::DomainError,
          "digamma needs x > 0");
  // Recurrence up to x >= 6, then the asymptotic expansion with six
  // Bernoulli terms; worst-case absolute error is below 1e-10 at x = 6.
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      std::log(x) - 0.5 * inv -
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0))))));
  return acc + series;
}

}  // namespace upplane::numstats
