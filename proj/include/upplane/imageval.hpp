#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "upplane/bounds.hpp"
#include "upplane/estimators.hpp"
#include "upplane/numstats.hpp"

namespace upplane::imageval {

// Row-major image with interleaved channels, pixel values in [0, 1].
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> pixels;

  double at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

ImageTensor make_image(int height, int width, int channels);

// Decodes binary PGM (P5) / PPM (P6) at 8- or 16-bit depth, or the raw
// float32 tensor format with its {"h","w","c"} JSON sidecar. Values are
// normalized into [0, 1].
ImageTensor load_image(const std::filesystem::path& path);

// Encodes by extension: .pgm (P5) and .ppm (P6) at 16-bit depth, .f32 as the
// raw tensor with sidecar.
void save_image(const std::filesystem::path& path, const ImageTensor& img);

struct PatchSet {
  numstats::SampleSet base;  // n patches by size*size*channels dims
  int size = 9;
  int stride = 3;
};

// Sliding-window extraction across all images, deterministic ordering by
// (image index, row, column); patch vectors are row-major with channels
// interleaved last.
PatchSet extract_patches(const std::vector<ImageTensor>& images, int size = 9,
                         int stride = 3);

struct DistortionMetrics {
  double mse = 0.0;
  double psnr = 0.0;  // +inf when mse == 0
  double ssim = 0.0;
};

// MSE, PSNR (dynamic range 1) and mean local SSIM with the standard 11x11
// Gaussian window, sigma 1.5, K1 = 0.01, K2 = 0.03.
DistortionMetrics distortion_metrics(const ImageTensor& x,
                                     const ImageTensor& xhat);

// det(sample_covariance)^{1/d} of the patch rows: the geometric mean of the
// error-covariance spectrum, the tractable uncertainty upper bound.
double uncertainty_upper(const PatchSet& errors, double ridge);

// Pooled (unconditional) divergence between truth and restored patch
// distributions; stands in for the conditional perception index.
double perception_index(const PatchSet& true_patches,
                        const PatchSet& restored_patches,
                        const estimators::KdeConfig& cfg);

struct EvaluationRecord {
  std::string algorithm;
  double perception = 0.0;
  bounds::DivergenceKind divergence_kind = bounds::DivergenceKind::RenyiHalf;
  double uncertainty = 0.0;
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  int n_images = 0;
  int n_patches = 0;
};

struct EvalConfig {
  int patch_size = 9;
  int stride = 3;
  double ridge = 1e-8;
  estimators::KdeConfig kde;
  bounds::DivergenceKind divergence_kind = bounds::DivergenceKind::RenyiHalf;
  // Patch count cap for the O(n^2) divergence estimate; selection is a
  // deterministic seed-driven subsample.
  int kde_max_samples = 5000;
  std::uint64_t seed = 0;
  double max_skip_fraction = 0.10;
};

// Runs the full protocol over a manifest: a JSON list of
// {"truth": ..., "degraded": ..., "restored": ...} with paths relative to
// the manifest file. Failing triplets are skipped and counted; the run
// fails once more than max_skip_fraction of them are unusable.
EvaluationRecord evaluate_algorithm(const std::filesystem::path& manifest,
                                    const EvalConfig& cfg);

// Synthetic per-pixel Gaussian restoration fixture. Truth pixels are iid
// N(mu0, sigma_x^2), observations add N(0, sigma_w^2) noise, and two
// restorations are written: the posterior mean and a posterior sample.
struct SyntheticOptions {
  int n_images = 64;
  int height = 32;
  int width = 32;
  double mu0 = 0.5;
  double sigma_x = 0.12;
  double sigma_w = 0.5879;
  std::uint64_t seed = 7;
};

// Writes <dir>/posterior_mean/... and <dir>/posterior_sample/... with one
// manifest.json per algorithm directory. Returns the per-pixel posterior
// variance (the fixture's analytic inherent uncertainty per dimension).
double write_synthetic_gaussian_dataset(const std::filesystem::path& dir,
                                        const SyntheticOptions& opts);

// Analytic per-pixel posterior variance of the fixture problem.
double synthetic_posterior_variance(const SyntheticOptions& opts);

}  // namespace upplane::imageval
