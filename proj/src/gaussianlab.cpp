#include "upplane/gaussianlab.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "upplane/random.hpp"

namespace upplane::gaussianlab {

namespace {

using numstats::SpdMatrix;

void require(bool ok, Errc code, const char* msg) {
  if (!ok) throw Error(code, msg);
}

// Objective, constraint and gradients of the covariance optimization in
// log-Cholesky coordinates. Parameters theta pack the lower triangle of L
// column by column, diagonal entries stored as logs, and S = L L^T.
class UpObjective {
 public:
  UpObjective(const Eigen::MatrixXd& posterior, double posterior_logdet,
              double perception)
      : sq_(posterior),
        logdet_sq_(posterior_logdet),
        p_(perception),
        d_(static_cast<int>(posterior.rows())) {}

  int n_params() const { return d_ * (d_ + 1) / 2; }

  Eigen::MatrixXd unpack(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d_, d_);
    int t = 0;
    for (int j = 0; j < d_; ++j) {
      l(j, j) = std::exp(theta[t++]);
      for (int i = j + 1; i < d_; ++i) l(i, j) = theta[t++];
    }
    return l;
  }

  static Eigen::VectorXd pack(const Eigen::MatrixXd& l) {
    const int d = static_cast<int>(l.rows());
    Eigen::VectorXd theta(d * (d + 1) / 2);
    int t = 0;
    for (int j = 0; j < d; ++j) {
      theta[t++] = std::log(l(j, j));
      for (int i = j + 1; i < d; ++i) theta[t++] = l(i, j);
    }
    return theta;
  }

  // f = (1/d) ln det(S + Sq); g = D_{1/2}(Sq, S) - P. Gradients fall out of
  // d ln det(M)/dS = M^{-1} and ln det(S) = 2 sum theta_diag.
  struct Eval {
    double f = 0.0;
    double g = 0.0;
    Eigen::VectorXd grad_f;
    Eigen::VectorXd grad_g;
    bool ok = false;
  };

  Eval evaluate(const Eigen::VectorXd& theta) const {
    Eval ev;
    const Eigen::MatrixXd l = unpack(theta);
    if (!l.allFinite()) return ev;
    const Eigen::MatrixXd s = l * l.transpose();
    const Eigen::MatrixXd m = s + sq_;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return ev;

    double logdet_m = 0.0;
    for (int i = 0; i < d_; ++i)
      logdet_m += 2.0 * std::log(llt.matrixL()(i, i));
    double half_logdet_s = 0.0;
    {
      int t = 0;
      for (int j = 0; j < d_; ++j) {
        half_logdet_s += theta[t];
        t += d_ - j;
      }
    }

    ev.f = logdet_m / d_;
    ev.g = logdet_m - d_ * std::log(2.0) - half_logdet_s -
           0.5 * logdet_sq_ - p_;

    const Eigen::MatrixXd m_inv =
        llt.solve(Eigen::MatrixXd::Identity(d_, d_));
    // S^{-1} via triangular solves on L.
    const Eigen::MatrixXd l_inv =
        l.triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd::Identity(d_, d_));
    const Eigen::MatrixXd s_inv = l_inv.transpose() * l_inv;

    ev.grad_f = chain(m_inv / d_, l);
    ev.grad_g = chain(m_inv - 0.5 * s_inv, l);
    ev.ok = ev.grad_f.allFinite() && ev.grad_g.allFinite() &&
            std::isfinite(ev.f) && std::isfinite(ev.g);
    return ev;
  }

 private:
  // Chain rule from a symmetric gradient G in S-space to theta-space:
  // dphi/dL = 2 G L restricted to the lower triangle, diagonal scaled by
  // L_jj for the log parameterization.
  Eigen::VectorXd chain(const Eigen::MatrixXd& g_s,
                        const Eigen::MatrixXd& l) const {
    const Eigen::MatrixXd g_l = 2.0 * g_s * l;
    Eigen::VectorXd out(n_params());
    int t = 0;
    for (int j = 0; j < d_; ++j) {
      out[t++] = g_l(j, j) * l(j, j);
      for (int i = j + 1; i < d_; ++i) out[t++] = g_l(i, j);
    }
    return out;
  }

  const Eigen::MatrixXd& sq_;
  double logdet_sq_;
  double p_;
  int d_;
};

}  // namespace

LinearGaussianProblem::LinearGaussianProblem(numstats::SpdMatrix sigma_x,
                                             Eigen::MatrixXd h,
                                             numstats::SpdMatrix sigma_w)
    : sigma_x_(std::move(sigma_x)),
      h_(std::move(h)),
      sigma_w_(std::move(sigma_w)),
      posterior_(numstats::SpdMatrix::identity(1)),
      gain_() {
  require(h_.cols() == sigma_x_.dim(), Errc::DimensionMismatch,
          "degradation operator columns must match prior dimension");
  require(h_.rows() == sigma_w_.dim(), Errc::DimensionMismatch,
          "degradation operator rows must match noise dimension");
  require(h_.allFinite(), Errc::NonFinite,
          "degradation operator has non-finite entries");

  const Eigen::MatrixXd cross = sigma_x_.entries() * h_.transpose();
  Eigen::MatrixXd innovation = h_ * cross + sigma_w_.entries();
  innovation = 0.5 * (innovation + innovation.transpose().eval());
  require(innovation.allFinite(), Errc::SingularInnovation,
          "innovation covariance is not finite");
  SpdMatrix s(innovation);
  require(s.eigenvalues()[0] > 0.0, Errc::SingularInnovation,
          "innovation covariance has no positive eigenvalue");

  gain_ = s.solve(cross.transpose()).transpose();  // K = cross S^{-1}
  Eigen::MatrixXd post = sigma_x_.entries() - gain_ * cross.transpose();
  post = 0.5 * (post + post.transpose().eval());
  posterior_ = SpdMatrix(post);
}

LinearGaussianProblem build_problem(const numstats::SpdMatrix& sigma_x,
                                    const Eigen::MatrixXd& h,
                                    const numstats::SpdMatrix& sigma_w) {
  return LinearGaussianProblem(sigma_x, h, sigma_w);
}

double inherent_uncertainty(const LinearGaussianProblem& p) {
  return std::exp(p.posterior_cov().logdet() /
                  static_cast<double>(p.dim()));
}

UpSolution solve_up_gaussian(const LinearGaussianProblem& p, double P,
                             const SolveOptions& opts) {
  require(P >= 0.0 && !std::isnan(P), Errc::DomainError,
          "perception budget must be nonnegative");
  const Eigen::MatrixXd& sq = p.posterior_cov().entries();
  const double logdet_sq = p.posterior_cov().logdet();
  const int d = static_cast<int>(p.dim());

  if (P == 0.0) {
    // The divergence separates points, so the P = 0 feasible set is exactly
    // {posterior covariance}; evaluating the objective there is the whole
    // optimization. The multiplier degenerates at this corner, which rules
    // out the penalty path anyway.
    const double u = std::exp((std::log(2.0) * d + logdet_sq) / d);
    return UpSolution{u, p.posterior_cov(), 0.0, true, 0};
  }

  UpObjective problem(sq, logdet_sq, P);

  // Initialize at the P = 0 optimum S = Sq.
  Eigen::LLT<Eigen::MatrixXd> llt0(sq);
  Eigen::MatrixXd l0;
  if (llt0.info() == Eigen::Success) {
    l0 = llt0.matrixL();
  } else {
    Eigen::MatrixXd jittered = sq;
    jittered.diagonal().array() += p.posterior_cov().eps_floor();
    l0 = Eigen::LLT<Eigen::MatrixXd>(jittered).matrixL();
  }
  Eigen::VectorXd theta = UpObjective::pack(l0);

  double lambda = 0.0;
  double mu = 100.0;
  long iters = 0;  // counts function/gradient evaluations
  bool converged = false;
  const int n_params = problem.n_params();

  auto al_value = [&](const UpObjective::Eval& ev) {
    const double viol = std::max(0.0, lambda + mu * ev.g);
    return ev.f + (viol * viol - lambda * lambda) / (2.0 * mu);
  };
  auto al_grad = [&](const UpObjective::Eval& ev) {
    const double c = std::max(0.0, lambda + mu * ev.g);
    return Eigen::VectorXd(ev.grad_f + c * ev.grad_g);
  };

  UpObjective::Eval ev = problem.evaluate(theta);
  ++iters;
  require(ev.ok, Errc::NonConvergence, "initial point not evaluable");

  // Outer dual updates around an inner damped-Newton minimization of the
  // augmented Lagrangian. The Hessian is a forward difference of the
  // analytic gradient; parameter counts stay tiny (d <= 8).
  constexpr int kOuterMax = 40;
  double prev_violation = std::numeric_limits<double>::infinity();
  double prev_outer_f = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < kOuterMax && iters < opts.max_iters; ++outer) {
    for (int inner = 0; inner < 200 && iters < opts.max_iters; ++inner) {
      const double phi = al_value(ev);
      const Eigen::VectorXd grad = al_grad(ev);
      if (grad.lpNorm<Eigen::Infinity>() <=
          1e-11 * (1.0 + std::abs(phi)))
        break;

      // Hessian split: the stiff mu * grad_g grad_g^T rank-one part is
      // exact; finite differences only estimate the smooth f + c g
      // curvature with the multiplier frozen, which keeps the probes
      // accurate at large mu.
      const double c0 = std::max(0.0, lambda + mu * ev.g);
      const Eigen::VectorXd smooth_grad = ev.grad_f + c0 * ev.grad_g;
      Eigen::MatrixXd hess(n_params, n_params);
      const double fd_step = 1e-6;
      bool hess_ok = true;
      for (int j = 0; j < n_params && hess_ok; ++j) {
        Eigen::VectorXd probe = theta;
        probe[j] += fd_step;
        const UpObjective::Eval pe = problem.evaluate(probe);
        ++iters;
        if (!pe.ok) {
          hess_ok = false;
          break;
        }
        hess.col(j) =
            (pe.grad_f + c0 * pe.grad_g - smooth_grad) / fd_step;
      }
      if (hess_ok && c0 > 0.0)
        hess += mu * ev.grad_g * ev.grad_g.transpose();

      Eigen::VectorXd dir;
      if (hess_ok) {
        hess = 0.5 * (hess + hess.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
        const double floor =
            std::max(1e-9, 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
        Eigen::VectorXd inv = es.eigenvalues();
        for (int j = 0; j < n_params; ++j)
          inv[j] = 1.0 / std::max(inv[j], floor);
        dir = -(es.eigenvectors() * inv.asDiagonal() *
                (es.eigenvectors().transpose() * grad));
      } else {
        dir = -grad / std::max(1.0, grad.norm());
      }

      // Armijo backtracking; the modified Newton direction is descent.
      const double slope = grad.dot(dir);
      double a = 1.0;
      bool accepted = false;
      UpObjective::Eval cand_ev;
      Eigen::VectorXd cand;
      for (int bt = 0; bt < 60; ++bt) {
        cand = theta + a * dir;
        cand_ev = problem.evaluate(cand);
        ++iters;
        if (cand_ev.ok && al_value(cand_ev) <= phi + 1e-4 * a * slope) {
          accepted = true;
          break;
        }
        a *= 0.5;
      }
      if (!accepted) break;  // at line-search resolution
      theta = cand;
      ev = cand_ev;
    }

    const double violation = std::abs(ev.g);
    if (violation <= opts.constraint_tol &&
        std::abs(ev.f - prev_outer_f) <=
            opts.objective_tol * std::max(1.0, std::abs(ev.f))) {
      converged = true;
      break;
    }
    prev_outer_f = ev.f;
    lambda = std::max(0.0, lambda + mu * ev.g);
    if (violation > 0.25 * prev_violation) mu = std::min(mu * 10.0, 1e12);
    prev_violation = violation;
  }

  const Eigen::MatrixXd l_final = problem.unpack(theta);
  UpSolution sol{std::exp(ev.f), SpdMatrix(l_final * l_final.transpose()),
                 std::abs(ev.g), converged, iters};
  return sol;
}

FamilySimulation simulate_family(const LinearGaussianProblem& p,
                                 const EstimatorFamilySpec& spec, int n) {
  require(n >= 100, Errc::DomainError, "simulation needs n >= 100");
  require(spec.sigma_z.dim() == p.dim(), Errc::DimensionMismatch,
          "injected-noise covariance must match problem dimension");

  const Eigen::Index d = p.dim();
  const Eigen::Index dp = p.obs_dim();
  const Eigen::MatrixXd fx = p.prior().factor();
  const Eigen::MatrixXd fw = p.noise().factor();
  const Eigen::MatrixXd fz = spec.sigma_z.factor();

  Rng rng(spec.seed);
  Eigen::MatrixXd errors(n, d);
  double sq_acc = 0.0;
  Eigen::VectorXd x(d), w(dp), z(d);
  for (int i = 0; i < n; ++i) {
    x = fx * rng.normal_vector(d);
    w = fw * rng.normal_vector(dp);
    z = fz * rng.normal_vector(d);
    const Eigen::VectorXd y = p.degradation() * x + w;
    const Eigen::VectorXd err = p.gain() * y + z - x;
    errors.row(i) = err.transpose();
    sq_acc += err.squaredNorm();
  }

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  const double renyi =
      numstats::gaussian_renyi_half({zero, p.posterior_cov()},
                                    {zero, spec.sigma_z});

  FamilySimulation out{numstats::SampleSet(std::move(errors)), renyi,
                       std::expm1(renyi),
                       sq_acc / (static_cast<double>(n) * d)};
  return out;
}

double conditional_error_entropy_power(const LinearGaussianProblem& p,
                                       const EstimatorFamilySpec& spec) {
  require(spec.sigma_z.dim() == p.dim(), Errc::DimensionMismatch,
          "injected-noise covariance must match problem dimension");
  const SpdMatrix sum(p.posterior_cov().entries() + spec.sigma_z.entries());
  return std::exp(sum.logdet() / static_cast<double>(p.dim()));
}

double example1_oracle(double P, double sigma2, int grid) {
  require(P >= 0.0 && !std::isnan(P), Errc::DomainError, "needs P >= 0");
  require(sigma2 > 0.0 && std::isfinite(sigma2), Errc::DomainError,
          "needs sigma^2 > 0");
  require(grid >= 1000, Errc::DomainError, "grid must have >= 1000 points");

  const double sq2 = sigma2 / (1.0 + sigma2);
  const double sq = std::sqrt(sq2);
  double best = std::numeric_limits<double>::infinity();
  double fallback = std::numeric_limits<double>::infinity();
  double fallback_viol = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= grid; ++i) {
    const double sz = 3.0 * sq * static_cast<double>(i) / grid;
    const double d_skl = (sq2 + sz * sz) / (2.0 * sz * sq) - 1.0;
    const double objective = sq2 + sz * sz;
    if (d_skl <= P) {
      best = std::min(best, objective);
    } else if (d_skl - P < fallback_viol) {
      fallback_viol = d_skl - P;
      fallback = objective;
    }
  }
  // A grid this coarse may miss a measure-zero feasible set (P = 0); fall
  // back to the point closest to feasibility.
  return std::isfinite(best) ? best : fallback;
}

LinearGaussianProblem random_problem(int d, std::uint64_t seed) {
  require(d >= 1, Errc::DomainError, "needs d >= 1");
  Rng rng(seed);
  const Eigen::MatrixXd a = rng.normal_matrix(d, d);
  const Eigen::MatrixXd b = rng.normal_matrix(d, d);
  const Eigen::MatrixXd h = rng.normal_matrix(d, d);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  const SpdMatrix sigma_x(a * a.transpose() / d + 0.5 * id);
  const SpdMatrix sigma_w(b * b.transpose() / d + 0.5 * id);
  return LinearGaussianProblem(sigma_x, h, sigma_w);
}

}  // namespace upplane::gaussianlab
