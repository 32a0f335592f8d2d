#pragma once

#include <cstdint>

#include "upplane/numstats.hpp"

namespace upplane::gaussianlab {

// Linear-Gaussian inverse problem Y = H X + W with X ~ N(0, sigma_x) and
// W ~ N(0, sigma_w). The posterior covariance
//   sigma_x - sigma_x H^T (H sigma_x H^T + sigma_w)^{-1} H sigma_x
// is derived at construction and cached; for Gaussian problems it does not
// depend on the realized observation.
class LinearGaussianProblem {
 public:
  LinearGaussianProblem(numstats::SpdMatrix sigma_x, Eigen::MatrixXd h,
                        numstats::SpdMatrix sigma_w);

  Eigen::Index dim() const { return sigma_x_.dim(); }
  Eigen::Index obs_dim() const { return sigma_w_.dim(); }
  const numstats::SpdMatrix& prior() const { return sigma_x_; }
  const Eigen::MatrixXd& degradation() const { return h_; }
  const numstats::SpdMatrix& noise() const { return sigma_w_; }
  const numstats::SpdMatrix& posterior_cov() const { return posterior_; }
  // K with E[X|Y] = K Y.
  const Eigen::MatrixXd& gain() const { return gain_; }

 private:
  numstats::SpdMatrix sigma_x_;
  Eigen::MatrixXd h_;
  numstats::SpdMatrix sigma_w_;
  numstats::SpdMatrix posterior_;
  Eigen::MatrixXd gain_;
};

LinearGaussianProblem build_problem(const numstats::SpdMatrix& sigma_x,
                                    const Eigen::MatrixXd& h,
                                    const numstats::SpdMatrix& sigma_w);

// det(posterior)^{1/d}, the entropy power of the Gaussian posterior.
double inherent_uncertainty(const LinearGaussianProblem& p);

struct SolveOptions {
  long max_iters = 100000;       // total inner-iteration budget
  double objective_tol = 1e-10;  // relative objective change
  double constraint_tol = 1e-8;  // |D - P| at the reported solution
};

struct UpSolution {
  double u = 0.0;  // achieved error entropy power det(S + Sq)^{1/d}
  numstats::SpdMatrix sigma_hat;
  double constraint_activity = 0.0;  // |D_{1/2} - P|
  bool converged = false;
  long iterations = 0;
};

// Numerically minimizes det(S + Sq)^{1/d} over PSD S subject to the Gaussian
// Renyi-1/2 divergence constraint D(Sq, S) <= P, via an augmented Lagrangian
// over log-Cholesky factors initialized at S = Sq. On non-convergence the
// best iterate is returned with converged == false.
UpSolution solve_up_gaussian(const LinearGaussianProblem& p, double P,
                             const SolveOptions& opts = {});

// Stochastic estimator family: Xhat = E[X|Y] + Z with Z ~ N(0, sigma_z).
struct EstimatorFamilySpec {
  numstats::SpdMatrix sigma_z;
  std::uint64_t seed = 0;
};

struct FamilySimulation {
  numstats::SampleSet errors;  // rows of Xhat - X
  // Conditional divergence between N(., posterior) and N(., sigma_z); the
  // Gaussian structure makes it constant in y.
  double renyi_half = 0.0;
  // Same-mean symmetric-KL form det((Sq+Sz)/2)/sqrt(det Sq det Sz) - 1,
  // which the scalar denoising example uses as its constraint.
  double symmetric_kl = 0.0;
  double mse_per_dim = 0.0;
};

FamilySimulation simulate_family(const LinearGaussianProblem& p,
                                 const EstimatorFamilySpec& spec, int n);

// Closed-form conditional entropy power of the family's error,
// det(posterior + sigma_z)^{1/d}.
double conditional_error_entropy_power(const LinearGaussianProblem& p,
                                       const EstimatorFamilySpec& spec);

// Brute-force grid search over sigma_z in (0, 3 sigma_q] minimizing
// sigma_q^2 + sigma_z^2 subject to the symmetric-KL constraint; independent
// oracle for the Example 1 closed form.
double example1_oracle(double P, double sigma2, int grid);

// Seed-driven well-conditioned random problem (square degradation operator),
// used by verification sweeps.
LinearGaussianProblem random_problem(int d, std::uint64_t seed);

}  // namespace upplane::gaussianlab
