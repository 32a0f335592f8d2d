#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "test_util.hpp"
#include "upplane/estimators.hpp"
#include "upplane/sample_io.hpp"

using namespace upplane;
using namespace upplane::estimators;
using numstats::SampleSet;

namespace {
constexpr double kEntropyStdNormal = 1.4189385332046727;   // 0.5 ln(2 pi e)
constexpr double kEntropyStdNormal2 = 2.8378770664093453;  // ln(2 pi e)

SampleSet permuted(const SampleSet& s, std::uint64_t seed) {
  std::vector<int> order(s.n());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
    std::swap(order[i],
              order[static_cast<int>(rng.next_u64() % (i + 1))]);
  Eigen::MatrixXd data(s.n(), s.d());
  for (Eigen::Index i = 0; i < s.n(); ++i) data.row(i) = s.data().row(order[i]);
  return SampleSet(std::move(data));
}
}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("knn entropy calibrates against Gaussian and uniform oracles") {
  const KnnConfig cfg{3};
  SUBCASE("standard normal, d=1") {
    const SampleSet s = testutil::standard_gaussian(10000, 1, 21);
    CHECK(knn_entropy(s, cfg) ==
          doctest::Approx(kEntropyStdNormal).epsilon(0.05));
  }
  SUBCASE("uniform on [0,1]") {
    const SampleSet s = testutil::uniform_samples(10000, 1, 22);
    CHECK(std::abs(knn_entropy(s, cfg)) <= 0.05);
  }
  SUBCASE("anisotropic Gaussian, d=2") {
    Eigen::MatrixXd factor(2, 2);
    factor << 1.0, 0.0, 0.0, 2.0;
    const SampleSet s =
        testutil::gaussian_samples(10000, Eigen::VectorXd::Zero(2), factor, 23);
    const double expected = kEntropyStdNormal2 + 0.5 * std::log(4.0);
    CHECK(knn_entropy(s, cfg) == doctest::Approx(expected).epsilon(0.05));
  }
}

TEST_CASE("knn entropy edge cases and invariances") {
  const KnnConfig cfg{3};
  SUBCASE("too few samples") {
    const SampleSet s = testutil::standard_gaussian(3, 1, 1);
    CHECK_THROWS_WITH_AS(knn_entropy(s, cfg),
                         doctest::Contains("TooFewSamples"), Error);
  }
  SUBCASE("all-identical samples degenerate") {
    Eigen::MatrixXd data = Eigen::MatrixXd::Constant(50, 2, 0.7);
    CHECK_THROWS_WITH_AS(knn_entropy(SampleSet(std::move(data)), cfg),
                         doctest::Contains("DegenerateSamples"), Error);
  }
  SUBCASE("a few duplicate rows are repaired by jitter") {
    SampleSet s = testutil::standard_gaussian(500, 2, 3);
    Eigen::MatrixXd data = s.data();
    data.row(10) = data.row(20);
    data.row(11) = data.row(20);
    const double h = knn_entropy(SampleSet(std::move(data)), cfg);
    const double href = knn_entropy(s, cfg);
    CHECK(h == doctest::Approx(href).epsilon(0.05));
  }
  SUBCASE("permutation invariance is exact for duplicate-free data") {
    const SampleSet s = testutil::standard_gaussian(800, 2, 4);
    CHECK(knn_entropy(permuted(s, 99), cfg) == knn_entropy(s, cfg));
  }
  SUBCASE("translation invariance and scaling equivariance") {
    const SampleSet s = testutil::standard_gaussian(2000, 1, 5);
    const double h = knn_entropy(s, cfg);
    Eigen::MatrixXd shifted = s.data().array() + 0.5;
    CHECK(knn_entropy(SampleSet(std::move(shifted)), cfg) ==
          doctest::Approx(h).epsilon(1e-12));
    Eigen::MatrixXd scaled = 3.0 * s.data();
    CHECK(knn_entropy(SampleSet(std::move(scaled)), cfg) ==
          doctest::Approx(h + std::log(3.0)).epsilon(0.01));
  }
}

TEST_CASE("sample entropy power") {
  const KnnConfig cfg{3};
  const SampleSet s2 = testutil::standard_gaussian(10000, 2, 31);
  CHECK(sample_entropy_power(s2, cfg) == doctest::Approx(1.0).epsilon(0.10));

  const SampleSet s1 = testutil::gaussian_samples(
      10000, Eigen::VectorXd::Zero(1),
      Eigen::MatrixXd::Constant(1, 1, 2.0), 32);
  CHECK(sample_entropy_power(s1, cfg) == doctest::Approx(4.0).epsilon(0.10));

  SUBCASE("affine shift leaves the value unchanged") {
    const SampleSet s = testutil::standard_gaussian(2000, 2, 33);
    const double n0 = sample_entropy_power(s, cfg);
    Eigen::MatrixXd shifted = s.data();
    shifted.col(0).array() += 0.5;
    shifted.col(1).array() -= 0.25;
    const double n1 = sample_entropy_power(SampleSet(std::move(shifted)), cfg);
    CHECK(n1 == doctest::Approx(n0).epsilon(1e-12));
  }
}

TEST_CASE("kde divergence calibrates against the Gaussian table") {
  const KdeConfig cfg;
  SUBCASE("same distribution stays near zero") {
    const SampleSet p = testutil::standard_gaussian(10000, 1, 41);
    const SampleSet q = testutil::standard_gaussian(10000, 1, 42);
    CHECK(kde_renyi_half(p, q, cfg) <= 0.05);
    CHECK(kde_renyi_half(p, p, cfg) <= 0.05);
  }
  SUBCASE("unit-variance mean separation: D = mu^2/4") {
    const SampleSet p = testutil::standard_gaussian(10000, 1, 43);
    const SampleSet q = testutil::gaussian_samples(
        10000, Eigen::VectorXd::Constant(1, 1.0),
        Eigen::MatrixXd::Identity(1, 1), 44);
    CHECK(kde_renyi_half(p, q, cfg) == doctest::Approx(0.25).epsilon(0.15));
  }
  SUBCASE("variance mismatch: ln(2.5/2)") {
    const SampleSet p = testutil::standard_gaussian(10000, 1, 45);
    const SampleSet q = testutil::gaussian_samples(
        10000, Eigen::VectorXd::Zero(1),
        Eigen::MatrixXd::Constant(1, 1, 2.0), 46);
    CHECK(kde_renyi_half(p, q, cfg) ==
          doctest::Approx(0.22314355131420976).epsilon(0.20));
  }
  SUBCASE("monotone in the mean separation") {
    const SampleSet p = testutil::standard_gaussian(4000, 1, 47);
    double prev = -1.0;
    for (double mu : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const SampleSet q = testutil::gaussian_samples(
          4000, Eigen::VectorXd::Constant(1, mu),
          Eigen::MatrixXd::Identity(1, 1), 48);
      const double d = kde_renyi_half(p, q, cfg);
      CHECK(d >= prev);
      prev = d;
    }
  }
  SUBCASE("dimension mismatch and bandwidth failures") {
    const SampleSet p = testutil::standard_gaussian(100, 1, 49);
    const SampleSet q = testutil::standard_gaussian(100, 2, 50);
    CHECK_THROWS_WITH_AS(kde_renyi_half(p, q, cfg),
                         doctest::Contains("DimensionMismatch"), Error);
    Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(100, 1);
    flat.col(0).setConstant(0.4);
    CHECK_THROWS_WITH_AS(
        kde_renyi_half(SampleSet(std::move(flat)), p, cfg),
        doctest::Contains("BandwidthError"), Error);
    KdeConfig fixed_bad;
    fixed_bad.bandwidth_rule = BandwidthRule::Fixed;
    fixed_bad.fixed_bandwidth = 0.0;
    CHECK_THROWS_WITH_AS(kde_renyi_half(p, p, fixed_bad),
                         doctest::Contains("BandwidthError"), Error);
  }
}

TEST_CASE("hellinger distance") {
  const KdeConfig cfg;
  SUBCASE("identical sets sit at zero") {
    const SampleSet p = testutil::standard_gaussian(2000, 1, 51);
    CHECK(hellinger_distance(p, p, cfg) <= 0.02);
  }
  SUBCASE("three-sigma separation") {
    const SampleSet p = testutil::standard_gaussian(10000, 1, 52);
    const SampleSet q = testutil::gaussian_samples(
        10000, Eigen::VectorXd::Constant(1, 3.0),
        Eigen::MatrixXd::Identity(1, 1), 53);
    CHECK(std::abs(hellinger_distance(p, q, cfg) - 0.8217953106714897) <=
          0.05);
  }
  SUBCASE("disjoint supports saturate") {
    Rng rng(54);
    Eigen::MatrixXd a(2000, 1), b(2000, 1);
    for (int i = 0; i < 2000; ++i) {
      a(i, 0) = rng.uniform();
      b(i, 0) = 5.0 + rng.uniform();
    }
    CHECK(hellinger_distance(SampleSet(std::move(a)),
                             SampleSet(std::move(b)), cfg) >= 0.95);
  }
  SUBCASE("consistency with the divergence through the shared coefficient") {
    const SampleSet p = testutil::standard_gaussian(3000, 1, 55);
    const SampleSet q = testutil::gaussian_samples(
        3000, Eigen::VectorXd::Constant(1, 1.0),
        Eigen::MatrixXd::Identity(1, 1), 56);
    const double h = hellinger_distance(p, q, cfg);
    const double d = kde_renyi_half(p, q, cfg);
    CHECK(d == doctest::Approx(-2.0 * std::log(1.0 - h * h)).epsilon(1e-9));
  }
}

TEST_CASE("renyi order interval") {
  CHECK(renyi_order_interval(1.0, 0.5, 0.5) == std::pair{1.0, 1.0});
  const auto [lo, hi] = renyi_order_interval(2.0, 0.25, 0.5);
  CHECK(lo == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(hi == 2.0);
  CHECK(renyi_order_interval(0.0, 0.3, 0.6) == std::pair{0.0, 0.0});
  CHECK_THROWS_WITH_AS(renyi_order_interval(1.0, 0.6, 0.5),
                       doctest::Contains("OrderError"), Error);
  CHECK_THROWS_AS(renyi_order_interval(1.0, 0.0, 0.5), Error);
  CHECK_THROWS_AS(renyi_order_interval(1.0, 0.5, 1.0), Error);

  SUBCASE("lower never exceeds upper; equality only at r = t or zero") {
    Rng rng(61);
    for (int i = 0; i < 50; ++i) {
      const double t = 0.05 + 0.9 * rng.uniform();
      const double r = t * (0.05 + 0.95 * rng.uniform());
      const double v = 3.0 * rng.uniform();
      const auto [a, b] = renyi_order_interval(v, r, t);
      CHECK(a <= b + 1e-15);
      if (v > 0.0 && r < t) CHECK(a < b);
    }
  }
}

TEST_CASE("conditional pool") {
  const std::vector<double> v1{1.0, 3.0}, w1{1.0, 1.0};
  CHECK(conditional_pool(v1, w1) == doctest::Approx(2.0));
  const std::vector<double> v2{5.0}, w2{2.0};
  CHECK(conditional_pool(v2, w2) == doctest::Approx(5.0));
  const std::vector<double> v3{0.0, 1.0, 2.0}, w3{1.0, 0.0, 1.0};
  CHECK(conditional_pool(v3, w3) == doctest::Approx(1.0));

  const std::vector<double> empty;
  CHECK_THROWS_WITH_AS(conditional_pool(empty, empty),
                       doctest::Contains("EmptyInput"), Error);
  const std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_WITH_AS(conditional_pool(v1, zeros),
                       doctest::Contains("ZeroWeight"), Error);
  CHECK_THROWS_WITH_AS(conditional_pool(v1, w3),
                       doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("sample set file round trips") {
  testutil::TempDir tmp("samples");
  const SampleSet s = testutil::standard_gaussian(64, 3, 71);

  const auto bin = tmp.path() / "x.f32";
  sample_io::save_samples_f32(bin, s);
  const SampleSet back = sample_io::load_samples(bin);
  REQUIRE(back.n() == s.n());
  REQUIRE(back.d() == s.d());
  // float32 storage: round trip to single precision.
  CHECK((back.data() - s.data()).cwiseAbs().maxCoeff() < 1e-6);

  const auto csv = tmp.path() / "x.csv";
  sample_io::save_samples_csv(csv, s);
  const SampleSet csv_back = sample_io::load_samples(csv);
  CHECK((csv_back.data() - s.data()).cwiseAbs().maxCoeff() < 1e-12);

  SUBCASE("truncated payload is reported") {
    std::filesystem::resize_file(bin, 10);
    CHECK_THROWS_WITH_AS(sample_io::load_samples_f32(bin),
                         doctest::Contains("TruncatedData"), Error);
  }
  SUBCASE("missing sidecar is reported") {
    std::filesystem::remove(tmp.path() / "x.f32.json");
    CHECK_THROWS_AS(sample_io::load_samples_f32(bin), Error);
  }
}

}  // TEST_SUITE
