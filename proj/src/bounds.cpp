#include "upplane/bounds.hpp"

#include <cmath>

namespace upplane::bounds {

namespace {

void require(bool ok, Errc code, const char* msg) {
  if (!ok) throw Error(code, msg);
}

// Shared core: f(b) = b - sqrt((b-1)^2 - 1) for b >= 2. Both eta variants
// reduce to this with b = 2 e^{2P/d} or b = 2 (1-P)^{-4/d}. The direct form
// cancels catastrophically as b grows; with x = b - 1,
//   f(b) = 1 + (x - sqrt(x^2 - 1)) = 1 + 1/(x + sqrt(x^2 - 1)),
// which is cancellation-free. Past x = 1e8 the first-order expansion
// sqrt(x^2 - 1) ~ x - 1/(2x) applies and also dodges x*x overflow.
double eta_from_scale(double b) {
  const double x = b - 1.0;
  if (x > 1e8) return 1.0 + 0.5 / x;
  return 1.0 + 1.0 / (x + std::sqrt(x * x - 1.0));
}

void check_perception_domain(double P, DivergenceKind kind) {
  if (kind == DivergenceKind::Hellinger)
    require(P >= 0.0 && P <= 1.0, Errc::DomainError,
            "Hellinger perception must lie in [0, 1]");
  else
    require(P >= 0.0 && !std::isnan(P), Errc::DomainError,
            "perception index must be nonnegative");
}

}  // namespace

PlaneContext::PlaneContext(int d_in, double n_xy_in, double n_xgy_in,
                           DivergenceKind kind_in)
    : d(d_in), n_xy(n_xy_in), n_xgy(n_xgy_in), kind(kind_in) {
  require(d >= 1, Errc::DomainError, "plane context needs d >= 1");
  require(std::isfinite(n_xy) && std::isfinite(n_xgy) && n_xy >= 0.0,
          Errc::DomainError, "entropy powers must be finite and nonnegative");
  require(n_xy <= n_xgy, Errc::OrderViolation,
          "inherent uncertainty exceeds its Gaussian envelope");
}

double eta(double P, int d) {
  require(d >= 1, Errc::DomainError, "eta needs d >= 1");
  require(P >= 0.0 && !std::isnan(P), Errc::DomainError, "eta needs P >= 0");
  const double s = 2.0 * P / static_cast<double>(d);
  if (s > 700.0) return 1.0;
  return eta_from_scale(2.0 * std::exp(s));
}

double eta_hellinger(double P, int d) {
  require(d >= 1, Errc::DomainError, "eta needs d >= 1");
  require(P >= 0.0 && P <= 1.0, Errc::DomainError,
          "Hellinger perception must lie in [0, 1]");
  if (P == 1.0) return 1.0;  // limit value
  const double b = 2.0 * std::pow(1.0 - P, -4.0 / static_cast<double>(d));
  if (std::isinf(b)) return 1.0;
  return eta_from_scale(b);
}

double gamma_residual(double gamma, double P, int d) {
  require(d >= 1, Errc::DomainError, "gamma residual needs d >= 1");
  require(gamma > 0.0 && std::isfinite(gamma), Errc::DomainError,
          "gamma must be positive");
  require(P >= 0.0 && !std::isnan(P), Errc::DomainError, "needs P >= 0");
  return gamma * gamma + 2.0 * gamma + 1.0 -
         4.0 * gamma * std::exp(2.0 * P / static_cast<double>(d));
}

std::pair<double, double> up_region_bounds(double P, const PlaneContext& ctx) {
  check_perception_domain(P, ctx.kind);
  const double mult = ctx.kind == DivergenceKind::Hellinger
                          ? eta_hellinger(P, ctx.d)
                          : eta(P, ctx.d);
  return {mult * ctx.n_xy, mult * ctx.n_xgy};
}

RegionVerdict classify_point(const UpPoint& pt, const PlaneContext& ctx,
                             double tol) {
  require(tol >= 0.0 && std::isfinite(tol), Errc::DomainError,
          "tolerance must be finite and nonnegative");
  require(std::isfinite(pt.uncertainty) && pt.uncertainty >= 0.0,
          Errc::DomainError, "uncertainty must be finite and nonnegative");
  const auto [lower, upper] = up_region_bounds(pt.perception, ctx);
  const double u = pt.uncertainty;
  RegionVerdict v{Region::Optimal, lower, upper, 0.0};
  if (u < lower * (1.0 - tol)) {
    v.region = Region::Impossible;
    v.slack = u - lower;
  } else if (u <= upper * (1.0 + tol)) {
    v.region = Region::Optimal;
    v.slack = std::abs(u - lower) <= std::abs(u - upper) ? u - lower
                                                         : u - upper;
  } else {
    v.region = Region::Suboptimal;
    v.slack = u - upper;
  }
  return v;
}

Example1Result example1_up(double P, double sigma2) {
  require(P >= 0.0 && !std::isnan(P), Errc::DomainError, "needs P >= 0");
  require(sigma2 > 0.0 && std::isfinite(sigma2), Errc::DomainError,
          "needs sigma^2 > 0");
  const double sq2 = sigma2 / (1.0 + sigma2);
  // t = P + 1 - sqrt((P+1)^2 - 1) in the cancellation-free reciprocal form.
  const double a = P + 1.0;
  const double root = std::sqrt(a * a - 1.0);
  const double t = std::isinf(root) ? 0.0 : 1.0 / (a + root);
  return {sq2 * (1.0 + t * t), std::sqrt(sq2) * t};
}

DistortionCheck check_distortion_bound(double mse_per_dim,
                                       double error_entropy_power,
                                       double tol) {
  require(std::isfinite(mse_per_dim) && std::isfinite(error_entropy_power),
          Errc::NonFinite, "inputs must be finite");
  require(tol >= 0.0, Errc::DomainError, "tolerance must be nonnegative");
  return {mse_per_dim >= error_entropy_power * (1.0 - tol),
          mse_per_dim - error_entropy_power};
}

double gaussianity_gap(double n_xy, double dkl_to_gaussian, int d) {
  require(d >= 1, Errc::DomainError, "needs d >= 1");
  require(std::isfinite(n_xy) && n_xy >= 0.0, Errc::DomainError,
          "N(X|Y) must be finite and nonnegative");
  require(std::isfinite(dkl_to_gaussian) && dkl_to_gaussian >= 0.0,
          Errc::DomainError, "KL divergence must be finite and nonnegative");
  return n_xy * std::exp(2.0 * dkl_to_gaussian / static_cast<double>(d));
}

std::pair<double, double> theorem1_bounds(double n_xy, double n_xgy) {
  require(std::isfinite(n_xy) && std::isfinite(n_xgy) && n_xy >= 0.0,
          Errc::DomainError, "entropy powers must be finite and nonnegative");
  require(n_xy <= n_xgy, Errc::OrderViolation,
          "inherent uncertainty exceeds its Gaussian envelope");
  return {n_xy, 2.0 * n_xgy};
}

std::vector<CurveRow> tabulate_bounds(const PlaneContext& ctx,
                                      const std::vector<double>& p_grid) {
  std::vector<CurveRow> rows;
  rows.reserve(p_grid.size());
  for (double p : p_grid) {
    const auto [lo, up] = up_region_bounds(p, ctx);
    const double mult = ctx.kind == DivergenceKind::Hellinger
                            ? eta_hellinger(p, ctx.d)
                            : eta(p, ctx.d);
    rows.push_back({p, mult, lo, up});
  }
  return rows;
}

}  // namespace upplane::bounds
