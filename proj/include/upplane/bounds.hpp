#pragma once

#include <string>
#include <utility>
#include <vector>

#include "upplane/error.hpp"

namespace upplane::bounds {

enum class DivergenceKind { RenyiHalf, Hellinger };

inline const char* divergence_name(DivergenceKind k) {
  return k == DivergenceKind::RenyiHalf ? "renyi-half" : "hellinger";
}

// Bound context for the uncertainty-perception plane: dimension, inherent
// uncertainty N(X|Y), and its Gaussian envelope N(X_G|Y).
struct PlaneContext {
  int d;
  double n_xy;
  double n_xgy;
  DivergenceKind kind;

  PlaneContext(int d_in, double n_xy_in, double n_xgy_in,
               DivergenceKind kind_in);
};

enum class Region { Impossible, Optimal, Suboptimal };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::Impossible: return "impossible";
    case Region::Optimal: return "optimal";
    case Region::Suboptimal: return "suboptimal";
  }
  return "unknown";
}

// A (perception, uncertainty) coordinate on the plane.
struct UpPoint {
  double perception = 0.0;
  double uncertainty = 0.0;
  std::string label;
};

struct RegionVerdict {
  Region region;
  double lower;
  double upper;
  double slack;  // signed distance to the violated/nearest bound
};

// Tradeoff multiplier for Renyi-1/2 perception:
//   eta(P) = 2 e^{2P/d} - sqrt((2 e^{2P/d} - 1)^2 - 1),
// decreasing from eta(0) = 2 to 1 as P grows.
double eta(double P, int d);

// Hellinger-perception variant, defined on [0, 1] with eta(1) = 1 by limit.
double eta_hellinger(double P, int d);

// Residual of the stationarity constraint gamma^2 + 2 gamma + 1 =
// 4 gamma e^{2P/d}; zero exactly at gamma = eta(P) - 1.
double gamma_residual(double gamma, double P, int d);

// (eta_k(P, d) * n_xy, eta_k(P, d) * n_xgy) for the context's divergence.
std::pair<double, double> up_region_bounds(double P, const PlaneContext& ctx);

RegionVerdict classify_point(const UpPoint& pt, const PlaneContext& ctx,
                             double tol);

// Scalar denoising family closed form: minimal uncertainty and the noise
// level sigma_z* that attains it.
struct Example1Result {
  double u;
  double sigma_z_star;
};
Example1Result example1_up(double P, double sigma2);

struct DistortionCheck {
  bool holds;
  double slack;
};
// Checks per-dimension MSE >= error entropy power (with tolerance).
DistortionCheck check_distortion_bound(double mse_per_dim,
                                       double error_entropy_power,
                                       double tol);

// N(X_G|Y) = N(X|Y) e^{2 D_KL / d}.
double gaussianity_gap(double n_xy, double dkl_to_gaussian, int d);

// Divergence-free envelope (N(X|Y), 2 N(X_G|Y)).
std::pair<double, double> theorem1_bounds(double n_xy, double n_xgy);

struct CurveRow {
  double p;
  double eta;
  double lower;
  double upper;
};
// Bound curves over a perception grid, ready for CSV/SVG export.
std::vector<CurveRow> tabulate_bounds(const PlaneContext& ctx,
                                      const std::vector<double>& p_grid);

}  // namespace upplane::bounds
