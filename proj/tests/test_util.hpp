#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "upplane/numstats.hpp"
#include "upplane/random.hpp"

namespace testutil {

// n draws from N(mean, cov) given a covariance factor F with F F^T = cov.
inline upplane::numstats::SampleSet gaussian_samples(
    int n, const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor,
    std::uint64_t seed) {
  upplane::Rng rng(seed);
  const Eigen::Index d = mean.size();
  Eigen::MatrixXd data(n, d);
  for (int i = 0; i < n; ++i)
    data.row(i) = (mean + factor * rng.normal_vector(d)).transpose();
  return upplane::numstats::SampleSet(std::move(data));
}

inline upplane::numstats::SampleSet standard_gaussian(int n, int d,
                                                      std::uint64_t seed) {
  return gaussian_samples(n, Eigen::VectorXd::Zero(d),
                          Eigen::MatrixXd::Identity(d, d), seed);
}

inline upplane::numstats::SampleSet uniform_samples(int n, int d,
                                                    std::uint64_t seed) {
  upplane::Rng rng(seed);
  Eigen::MatrixXd data(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) data(i, j) = rng.uniform();
  return upplane::numstats::SampleSet(std::move(data));
}

// Fresh scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("upplane_test_" + tag + "_" + std::to_string(counter_++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

}  // namespace testutil
