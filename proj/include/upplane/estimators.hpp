#pragma once

#include <span>
#include <utility>

#include "upplane/numstats.hpp"

namespace upplane::estimators {

// Configuration for the nearest-neighbor entropy estimator.
struct KnnConfig {
  int k = 3;  // neighbor order; must satisfy 1 <= k <= n-1 at call time
};

enum class BandwidthRule { Silverman, Scott, Fixed };

struct KdeConfig {
  BandwidthRule bandwidth_rule = BandwidthRule::Silverman;
  double fixed_bandwidth = 0.0;   // used when bandwidth_rule == Fixed
  double density_floor = 1e-30;   // lower clamp on evaluated densities
};

// Kozachenko-Leonenko estimate of differential entropy:
//   h = psi(n) - psi(k) + ln(c_d) + (d/n) * sum_i ln r_i
// with r_i the Euclidean distance from sample i to its k-th nearest neighbor
// and c_d the unit-ball volume. Duplicate samples are broken by a
// deterministic index-seeded jitter of magnitude 1e-12 * per-dimension range.
double knn_entropy(const numstats::SampleSet& s, const KnnConfig& cfg);

// entropy_power(knn_entropy(s, cfg), s.d()).
double sample_entropy_power(const numstats::SampleSet& s,
                            const KnnConfig& cfg);

// Estimated Bhattacharyya coefficient E_{x~p}[sqrt(qhat(x)/phat(x))] with
// Gaussian-kernel densities; phat evaluated leave-one-out at p's own samples
// and clamped below at density_floor.
double kde_bhattacharyya(const numstats::SampleSet& p,
                         const numstats::SampleSet& q, const KdeConfig& cfg);

// Renyi divergence of order 1/2: max(0, -2 ln BC).
double kde_renyi_half(const numstats::SampleSet& p,
                      const numstats::SampleSet& q, const KdeConfig& cfg);

// Hellinger distance sqrt(max(0, 1 - BC)), in [0, 1].
double hellinger_distance(const numstats::SampleSet& p,
                          const numstats::SampleSet& q, const KdeConfig& cfg);

// Sandwich interval for a Renyi divergence of order r given its value at
// order t, valid for 0 < r <= t < 1:
//   (r/t) ((1-t)/(1-r)) D_t <= D_r <= D_t.
std::pair<double, double> renyi_order_interval(double value_t, double r,
                                               double t);

// Weight-normalized average; assembles conditional divergences and entropies
// from per-observation estimates.
double conditional_pool(std::span<const double> values,
                        std::span<const double> weights);

}  // namespace upplane::estimators
