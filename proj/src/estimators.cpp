#include "upplane/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "upplane/random.hpp"

namespace upplane::estimators {

namespace {

void require(bool ok, Errc code, const char* msg) {
  if (!ok) throw Error(code, msg);
}

// ---------------------------------------------------------------------------
// Exact k-nearest-neighbor search. A spatial-partition tree handles d <= 16;
// higher dimensions fall back to brute force. Both paths are exact, so the
// estimator value does not depend on the strategy.
// ---------------------------------------------------------------------------

// Bounded max-heap over squared distances; keeps the k smallest seen.
class KBest {
 public:
  explicit KBest(int k) : k_(k) { heap_.reserve(k); }

  double worst() const {
    return heap_.size() < static_cast<std::size_t>(k_)
               ? std::numeric_limits<double>::infinity()
               : heap_.front();
  }

  void offer(double d2) {
    if (heap_.size() < static_cast<std::size_t>(k_)) {
      heap_.push_back(d2);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (d2 < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = d2;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  double kth() const { return heap_.front(); }
  bool full() const { return heap_.size() == static_cast<std::size_t>(k_); }

 private:
  int k_;
  std::vector<double> heap_;
};

class KdTree {
 public:
  KdTree(const Eigen::MatrixXd& pts, int leaf_size = 16)
      : pts_(pts), leaf_size_(leaf_size) {
    index_.resize(pts_.rows());
    std::iota(index_.begin(), index_.end(), 0);
    nodes_.reserve(2 * pts_.rows() / leaf_size_ + 4);
    root_ = build(0, static_cast<int>(pts_.rows()));
  }

  // Squared distance to the k-th nearest neighbor of pts_.row(self),
  // excluding the point itself.
  double kth_sq_distance(int self, int k) const {
    KBest best(k);
    query(root_, self, best);
    return best.kth();
  }

 private:
  struct Node {
    int begin = 0, end = 0;       // leaf range into index_
    int axis = -1;                // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin > leaf_size_) {
      // Split on the dimension with the widest spread in this range.
      int axis = 0;
      double best_spread = -1.0;
      for (int j = 0; j < pts_.cols(); ++j) {
        double lo = pts_(index_[begin], j), hi = lo;
        for (int i = begin; i < end; ++i) {
          const double v = pts_(index_[i], j);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
          best_spread = hi - lo;
          axis = j;
        }
      }
      const int mid = begin + (end - begin) / 2;
      std::nth_element(index_.begin() + begin, index_.begin() + mid,
                       index_.begin() + end, [&](int a, int b) {
                         return pts_(a, axis) < pts_(b, axis);
                       });
      node.axis = axis;
      node.split = pts_(index_[mid], axis);
      const int id = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
      const int left = build(begin, mid);
      const int right = build(mid, end);
      nodes_[id].left = left;
      nodes_[id].right = right;
      return id;
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    return id;
  }

  void query(int id, int self, KBest& best) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = index_[i];
        if (idx == self) continue;
        best.offer((pts_.row(idx) - pts_.row(self)).squaredNorm());
      }
      return;
    }
    const double delta = pts_(self, node.axis) - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    query(near, self, best);
    if (delta * delta <= best.worst() || !best.full()) query(far, self, best);
  }

  const Eigen::MatrixXd& pts_;
  int leaf_size_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
  int root_ = 0;
};

// k-th nearest neighbor distances for every sample, exact.
std::vector<double> knn_distances(const Eigen::MatrixXd& pts, int k) {
  const int n = static_cast<int>(pts.rows());
  std::vector<double> out(n);
  if (pts.cols() <= 16) {
    KdTree tree(pts);
    for (int i = 0; i < n; ++i)
      out[i] = std::sqrt(tree.kth_sq_distance(i, k));
  } else {
    std::vector<double> d2(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        d2[j] = (pts.row(j) - pts.row(i)).squaredNorm();
      d2[i] = std::numeric_limits<double>::infinity();
      std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
      out[i] = std::sqrt(d2[k - 1]);
    }
  }
  return out;
}

// Breaks exact duplicate rows with a deterministic jitter of magnitude
// 1e-12 * per-dimension range, seeded by the sample's original index. The
// first occurrence of each distinct row is left untouched, so duplicate-free
// inputs pass through bit-identically.
void jitter_duplicates(Eigen::MatrixXd& pts) {
  const int n = static_cast<int>(pts.rows());
  const int d = static_cast<int>(pts.cols());
  const Eigen::MatrixXd orig = pts;  // comparisons on unmodified values
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](int a, int b) {
    for (int j = 0; j < d; ++j) {
      if (orig(a, j) < orig(b, j)) return true;
      if (orig(a, j) > orig(b, j)) return false;
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), row_less);

  const Eigen::VectorXd range =
      (orig.colwise().maxCoeff() - orig.colwise().minCoeff()).transpose();
  for (int s = 1; s < n; ++s) {
    const int prev = order[s - 1], cur = order[s];
    if ((orig.row(prev) - orig.row(cur)).cwiseAbs().maxCoeff() > 0.0)
      continue;
    std::uint64_t state = static_cast<std::uint64_t>(cur) + 1;
    for (int j = 0; j < d; ++j) {
      state = splitmix64(state);
      pts(cur, j) += 1e-12 * range[j] * (u64_to_unit(state) - 0.5);
    }
  }
}

// ---------------------------------------------------------------------------
// Gaussian-kernel density estimation with per-dimension bandwidths.
// ---------------------------------------------------------------------------

struct KdeFit {
  Eigen::MatrixXd scaled;  // points divided per-dimension by the bandwidth
  Eigen::VectorXd inv_h;   // 1/h per dimension
  double log_norm = 0.0;   // -(sum ln h_j) - (d/2) ln(2 pi)
};

KdeFit make_kde_fit(const numstats::SampleSet& s, const KdeConfig& cfg) {
  const int n = static_cast<int>(s.n());
  const int d = static_cast<int>(s.d());
  Eigen::VectorXd h(d);
  if (cfg.bandwidth_rule == BandwidthRule::Fixed) {
    h.setConstant(cfg.fixed_bandwidth);
  } else {
    const Eigen::RowVectorXd mean = s.data().colwise().mean();
    const Eigen::MatrixXd centered = s.data().rowwise() - mean;
    Eigen::VectorXd var =
        centered.colwise().squaredNorm().transpose() /
        static_cast<double>(n - 1);
    // An exactly constant column must yield a zero bandwidth even though
    // the mean subtraction above leaves rounding residue.
    const Eigen::RowVectorXd spread =
        s.data().colwise().maxCoeff() - s.data().colwise().minCoeff();
    for (int j = 0; j < d; ++j)
      if (spread[j] == 0.0) var[j] = 0.0;
    double factor = std::pow(n, -1.0 / (d + 4));
    if (cfg.bandwidth_rule == BandwidthRule::Silverman)
      factor *= std::pow(4.0 / (d + 2), 1.0 / (d + 4));
    h = factor * var.cwiseSqrt();
  }
  for (int j = 0; j < d; ++j)
    require(std::isfinite(h[j]) && h[j] > 0.0, Errc::BandwidthError,
            "bandwidth rule yielded a non-positive bandwidth");

  KdeFit fit;
  fit.inv_h = h.cwiseInverse();
  fit.scaled = s.data() * fit.inv_h.asDiagonal();
  fit.log_norm = -h.array().log().sum() -
                 0.5 * static_cast<double>(d) * std::log(2.0 * M_PI);
  return fit;
}

// Log-density at the (already scaled) query point; `exclude` removes one fit
// sample for leave-one-out evaluation, -1 keeps all.
double kde_log_density(const KdeFit& fit, const Eigen::RowVectorXd& scaled_x,
                       int exclude) {
  const Eigen::Index m = fit.scaled.rows();
  Eigen::VectorXd t =
      -0.5 * (fit.scaled.rowwise() - scaled_x).rowwise().squaredNorm();
  if (exclude >= 0) t[exclude] = -std::numeric_limits<double>::infinity();
  const double tmax = t.maxCoeff();
  if (!std::isfinite(tmax)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) acc += std::exp(t[i] - tmax);
  const double m_eff = static_cast<double>(exclude >= 0 ? m - 1 : m);
  return tmax + std::log(acc) + fit.log_norm - std::log(m_eff);
}

}  // namespace

double knn_entropy(const numstats::SampleSet& s, const KnnConfig& cfg) {
  const int n = static_cast<int>(s.n());
  const int d = static_cast<int>(s.d());
  require(cfg.k >= 1, Errc::DomainError, "k must be at least 1");
  require(n >= cfg.k + 1, Errc::TooFewSamples,
          "knn entropy needs n >= k + 1 samples");

  Eigen::MatrixXd pts = s.data();
  jitter_duplicates(pts);
  std::vector<double> r = knn_distances(pts, cfg.k);

  // Summing in sorted order makes the estimate invariant under sample
  // permutation bit for bit, and independent of the search strategy.
  std::sort(r.begin(), r.end());
  double sum_log_r = 0.0;
  for (double ri : r) {
    if (ri <= 0.0)
      throw Error(Errc::DegenerateSamples,
                  "zero nearest-neighbor distance after jitter");
    sum_log_r += std::log(ri);
  }

  const double log_unit_ball =
      0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d + 1.0);
  return numstats::digamma(n) - numstats::digamma(cfg.k) + log_unit_ball +
         (static_cast<double>(d) / n) * sum_log_r;
}

double sample_entropy_power(const numstats::SampleSet& s,
                            const KnnConfig& cfg) {
  return numstats::entropy_power(knn_entropy(s, cfg),
                                 static_cast<int>(s.d()));
}

double kde_bhattacharyya(const numstats::SampleSet& p,
                         const numstats::SampleSet& q, const KdeConfig& cfg) {
  require(p.d() == q.d(), Errc::DimensionMismatch,
          "sample sets must share dimensionality");
  require(p.n() >= 10 && q.n() >= 10, Errc::TooFewSamples,
          "kde divergence needs at least 10 samples per side");
  require(std::isfinite(cfg.density_floor) && cfg.density_floor > 0.0,
          Errc::DomainError, "density_floor must be positive");

  const KdeFit fit_p = make_kde_fit(p, cfg);
  const KdeFit fit_q = make_kde_fit(q, cfg);
  const double log_floor = std::log(cfg.density_floor);

  double acc = 0.0, comp = 0.0;  // Kahan summation in a fixed order
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    const Eigen::RowVectorXd x = p.data().row(i);
    const double log_q =
        kde_log_density(fit_q, x.cwiseProduct(fit_q.inv_h.transpose()), -1);
    double log_p = kde_log_density(
        fit_p, x.cwiseProduct(fit_p.inv_h.transpose()), static_cast<int>(i));
    log_p = std::max(log_p, log_floor);
    const double term = std::exp(0.5 * (log_q - log_p));
    const double y = term - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc / static_cast<double>(p.n());
}

double kde_renyi_half(const numstats::SampleSet& p,
                      const numstats::SampleSet& q, const KdeConfig& cfg) {
  const double bc = kde_bhattacharyya(p, q, cfg);
  return std::max(0.0, -2.0 * std::log(std::max(bc, 1e-300)));
}

double hellinger_distance(const numstats::SampleSet& p,
                          const numstats::SampleSet& q, const KdeConfig& cfg) {
  const double bc = kde_bhattacharyya(p, q, cfg);
  return std::sqrt(std::max(0.0, 1.0 - std::min(bc, 1.0)));
}

std::pair<double, double> renyi_order_interval(double value_t, double r,
                                               double t) {
  require(std::isfinite(value_t) && value_t >= 0.0, Errc::DomainError,
          "divergence value must be a finite nonnegative real");
  require(r > 0.0 && t < 1.0 && r <= t, Errc::OrderError,
          "orders must satisfy 0 < r <= t < 1");
  const double lower = (r / t) * ((1.0 - t) / (1.0 - r)) * value_t;
  return {lower, value_t};
}

double conditional_pool(std::span<const double> values,
                        std::span<const double> weights) {
  require(values.size() == weights.size(), Errc::DimensionMismatch,
          "values and weights must have equal length");
  require(!values.empty(), Errc::EmptyInput, "nothing to pool");
  double wsum = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]), Errc::NonFinite,
            "pooled value is not finite");
    require(std::isfinite(weights[i]) && weights[i] >= 0.0, Errc::DomainError,
            "weights must be finite and nonnegative");
    wsum += weights[i];
    acc += weights[i] * values[i];
  }
  require(wsum > 0.0, Errc::ZeroWeight, "weights sum to zero");
  return acc / wsum;
}

}  // namespace upplane::estimators
