#include "upplane/imageval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "upplane/random.hpp"

namespace upplane::imageval {

namespace {

void require(bool ok, Errc code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::IoError,
          "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

// PNM header tokenizer: skips whitespace and '#' comments.
struct PnmCursor {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  long next_int() {
    skip_space_and_comments();
    require(pos < bytes.size(), Errc::CorruptHeader,
            "header ended before all fields were read");
    long value = 0;
    bool digits = false;
    while (pos < bytes.size() &&
           std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      digits = true;
      ++pos;
      require(value <= 1 << 30, Errc::CorruptHeader,
              "header field out of range");
    }
    require(digits, Errc::CorruptHeader, "expected an integer header field");
    return value;
  }
};

ImageTensor load_pnm(const std::vector<std::uint8_t>& bytes,
                     const std::string& name) {
  require(bytes.size() >= 2, Errc::UnsupportedFormat, name + ": too short");
  require(bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'),
          Errc::UnsupportedFormat, name + ": not a binary PGM/PPM file");
  const int channels = bytes[1] == '5' ? 1 : 3;

  PnmCursor cur{bytes, 2};
  const long width = cur.next_int();
  const long height = cur.next_int();
  const long maxval = cur.next_int();
  require(width >= 1 && height >= 1, Errc::CorruptHeader,
          name + ": non-positive image dimensions");
  require(maxval >= 1 && maxval <= 65535, Errc::CorruptHeader,
          name + ": maxval out of range");
  // Exactly one whitespace byte separates the header from the payload.
  require(cur.pos < bytes.size() &&
              std::isspace(static_cast<unsigned char>(bytes[cur.pos])),
          Errc::CorruptHeader, name + ": missing header terminator");
  ++cur.pos;

  const int bytes_per_value = maxval > 255 ? 2 : 1;
  const std::size_t expected = static_cast<std::size_t>(width) * height *
                               channels * bytes_per_value;
  require(bytes.size() - cur.pos >= expected, Errc::TruncatedData,
          name + ": pixel payload is truncated");

  ImageTensor img = make_image(static_cast<int>(height),
                               static_cast<int>(width), channels);
  const double scale = 1.0 / static_cast<double>(maxval);
  std::size_t p = cur.pos;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    unsigned value = bytes[p++];
    if (bytes_per_value == 2) value = (value << 8) | bytes[p++];  // big-endian
    img.pixels[i] = static_cast<double>(value) * scale;
  }
  return img;
}

ImageTensor load_raw_f32(const std::filesystem::path& path) {
  std::filesystem::path side = path;
  side += ".json";
  std::ifstream meta_in(side);
  require(static_cast<bool>(meta_in), Errc::CorruptHeader,
          "missing sidecar " + side.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptHeader, e.what());
  }
  require(meta.contains("h") && meta.contains("w") && meta.contains("c"),
          Errc::CorruptHeader, side.string() + ": needs h, w and c");
  const int h = meta["h"].get<int>();
  const int w = meta["w"].get<int>();
  const int c = meta["c"].get<int>();
  require(h >= 1 && w >= 1 && (c == 1 || c == 3), Errc::CorruptHeader,
          side.string() + ": invalid tensor shape");

  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  const std::size_t count = static_cast<std::size_t>(h) * w * c;
  require(bytes.size() >= count * sizeof(float), Errc::TruncatedData,
          path.string() + ": tensor payload is truncated");

  ImageTensor img = make_image(h, w, c);
  const float* values = reinterpret_cast<const float*>(bytes.data());
  for (std::size_t i = 0; i < count; ++i) {
    const double v = static_cast<double>(values[i]);
    require(std::isfinite(v), Errc::NonFinite,
            path.string() + ": non-finite pixel value");
    img.pixels[i] = std::clamp(v, 0.0, 1.0);
  }
  return img;
}

void save_pnm(const std::filesystem::path& path, const ImageTensor& img,
              int channels) {
  require(img.channels == channels, Errc::ChannelMismatch,
          "image channel count does not match the requested format");
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), Errc::IoError,
          "cannot open " + path.string());
  out << (channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n"
      << 65535 << "\n";
  for (double v : img.pixels) {
    const unsigned value = static_cast<unsigned>(
        std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
    const std::uint8_t hi = static_cast<std::uint8_t>(value >> 8);
    const std::uint8_t lo = static_cast<std::uint8_t>(value & 0xff);
    out.put(static_cast<char>(hi));
    out.put(static_cast<char>(lo));
  }
  require(static_cast<bool>(out), Errc::IoError,
          "short write to " + path.string());
}

void save_raw_f32(const std::filesystem::path& path, const ImageTensor& img) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), Errc::IoError,
          "cannot open " + path.string());
  for (double v : img.pixels) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof(float));
  }
  std::filesystem::path side = path;
  side += ".json";
  std::ofstream meta(side);
  require(static_cast<bool>(meta), Errc::IoError,
          "cannot open " + side.string());
  meta << nlohmann::json{{"h", img.height},
                         {"w", img.width},
                         {"c", img.channels}}
              .dump()
       << "\n";
}

// Separable valid-region convolution with a normalized 1-D kernel.
std::vector<double> convolve_valid(const std::vector<double>& plane, int h,
                                   int w, const std::vector<double>& kernel) {
  const int k = static_cast<int>(kernel.size());
  const int oh = h - k + 1, ow = w - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t)
        acc += kernel[t] * plane[static_cast<std::size_t>(y) * w + x + t];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t)
        acc += kernel[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

double ssim_channel(const std::vector<double>& x, const std::vector<double>& y,
                    int h, int w) {
  std::vector<double> kernel(kSsimWindow);
  const int half = kSsimWindow / 2;
  double ksum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double t = static_cast<double>(i - half) / kSsimSigma;
    kernel[i] = std::exp(-0.5 * t * t);
    ksum += kernel[i];
  }
  for (double& v : kernel) v /= ksum;

  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = convolve_valid(x, h, w, kernel);
  const auto mu_y = convolve_valid(y, h, w, kernel);
  const auto m_xx = convolve_valid(xx, h, w, kernel);
  const auto m_yy = convolve_valid(yy, h, w, kernel);
  const auto m_xy = convolve_valid(xy, h, w, kernel);

  constexpr double c1 = kSsimK1 * kSsimK1;  // dynamic range 1
  constexpr double c2 = kSsimK2 * kSsimK2;
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double var_x = m_xx[i] - mu_x[i] * mu_x[i];
    const double var_y = m_yy[i] - mu_y[i] * mu_y[i];
    const double cov = m_xy[i] - mu_x[i] * mu_y[i];
    acc += ((2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * cov + c2)) /
           ((mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) *
            (var_x + var_y + c2));
  }
  return acc / static_cast<double>(mu_x.size());
}

struct Triplet {
  std::filesystem::path truth, degraded, restored;
};

std::vector<Triplet> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  require(static_cast<bool>(in), Errc::ManifestError,
          "cannot open manifest " + manifest.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ManifestError, manifest.string() + ": " + e.what());
  }
  require(doc.is_array() && !doc.empty(), Errc::ManifestError,
          manifest.string() + ": manifest must be a non-empty JSON array");
  const std::filesystem::path base = manifest.parent_path();
  std::vector<Triplet> out;
  for (const auto& entry : doc) {
    require(entry.contains("truth") && entry.contains("degraded") &&
                entry.contains("restored"),
            Errc::ManifestError,
            manifest.string() + ": entry misses truth/degraded/restored");
    out.push_back({base / entry["truth"].get<std::string>(),
                   base / entry["degraded"].get<std::string>(),
                   base / entry["restored"].get<std::string>()});
  }
  return out;
}

// Deterministic subsample of row indices (partial Fisher-Yates).
std::vector<int> subsample_indices(int n, int want, std::uint64_t seed) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (want >= n) return idx;
  std::uint64_t state = seed ^ 0x5bf03635ULL;
  for (int i = 0; i < want; ++i) {
    state = splitmix64(state);
    const int j = i + static_cast<int>(state % static_cast<std::uint64_t>(
                                                   n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(want);
  std::sort(idx.begin(), idx.end());
  return idx;
}

numstats::SampleSet take_rows(const Eigen::MatrixXd& m,
                              const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return numstats::SampleSet(std::move(out));
}

}  // namespace

ImageTensor make_image(int height, int width, int channels) {
  require(height >= 1 && width >= 1, Errc::DomainError,
          "image dimensions must be positive");
  require(channels == 1 || channels == 3, Errc::ChannelMismatch,
          "channel count must be 1 or 3");
  ImageTensor img;
  img.height = height;
  img.width = width;
  img.channels = channels;
  img.pixels.assign(
      static_cast<std::size_t>(height) * width * channels, 0.0);
  return img;
}

ImageTensor load_image(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".f32") return load_raw_f32(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm" || ext.empty()) {
    return load_pnm(read_file_bytes(path), path.string());
  }
  // Unknown extension: accept PNM magic, otherwise refuse.
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' &&
      (bytes[1] == '5' || bytes[1] == '6'))
    return load_pnm(bytes, path.string());
  throw Error(Errc::UnsupportedFormat,
              path.string() + ": unrecognized image format");
}

void save_image(const std::filesystem::path& path, const ImageTensor& img) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm") {
    save_pnm(path, img, 1);
  } else if (ext == ".ppm") {
    save_pnm(path, img, 3);
  } else if (ext == ".f32") {
    save_raw_f32(path, img);
  } else {
    throw Error(Errc::UnsupportedFormat,
                path.string() + ": unsupported output format");
  }
}

PatchSet extract_patches(const std::vector<ImageTensor>& images, int size,
                         int stride) {
  require(!images.empty(), Errc::EmptyInput, "no images to patch");
  require(size >= 1 && stride >= 1, Errc::DomainError,
          "patch size and stride must be positive");
  const int channels = images.front().channels;
  std::size_t count = 0;
  for (const ImageTensor& img : images) {
    require(img.channels == channels, Errc::ChannelMismatch,
            "images mix channel counts");
    require(img.height >= size && img.width >= size, Errc::ImageTooSmall,
            "image smaller than the patch size");
    const std::size_t ny = (img.height - size) / stride + 1;
    const std::size_t nx = (img.width - size) / stride + 1;
    count += ny * nx;
  }

  const int dim = size * size * channels;
  Eigen::MatrixXd base(static_cast<Eigen::Index>(count), dim);
  Eigen::Index row = 0;
  for (const ImageTensor& img : images) {
    for (int y = 0; y + size <= img.height; y += stride) {
      for (int x = 0; x + size <= img.width; x += stride) {
        int col = 0;
        for (int py = 0; py < size; ++py)
          for (int px = 0; px < size; ++px)
            for (int c = 0; c < channels; ++c)
              base(row, col++) = img.at(y + py, x + px, c);
        ++row;
      }
    }
  }
  return PatchSet{numstats::SampleSet(std::move(base)), size, stride};
}

DistortionMetrics distortion_metrics(const ImageTensor& x,
                                     const ImageTensor& xhat) {
  require(x.height == xhat.height && x.width == xhat.width &&
              x.channels == xhat.channels,
          Errc::ShapeMismatch, "distortion metrics need equal shapes");
  require(x.height >= kSsimWindow && x.width >= kSsimWindow,
          Errc::ImageTooSmall, "SSIM window does not fit the image");

  double se = 0.0;
  for (std::size_t i = 0; i < x.pixels.size(); ++i) {
    const double diff = x.pixels[i] - xhat.pixels[i];
    se += diff * diff;
  }
  const double mse = se / static_cast<double>(x.pixels.size());

  double ssim_acc = 0.0;
  std::vector<double> plane_x(static_cast<std::size_t>(x.height) * x.width);
  std::vector<double> plane_y(plane_x.size());
  for (int c = 0; c < x.channels; ++c) {
    for (int y = 0; y < x.height; ++y)
      for (int xx = 0; xx < x.width; ++xx) {
        plane_x[static_cast<std::size_t>(y) * x.width + xx] = x.at(y, xx, c);
        plane_y[static_cast<std::size_t>(y) * x.width + xx] =
            xhat.at(y, xx, c);
      }
    ssim_acc += ssim_channel(plane_x, plane_y, x.height, x.width);
  }

  DistortionMetrics out;
  out.mse = mse;
  out.psnr = mse > 0.0 ? 10.0 * std::log10(1.0 / mse)
                       : std::numeric_limits<double>::infinity();
  out.ssim = ssim_acc / x.channels;
  return out;
}

double uncertainty_upper(const PatchSet& errors, double ridge) {
  const numstats::SpdMatrix cov =
      numstats::sample_covariance(errors.base, ridge);
  return std::exp(cov.logdet() / static_cast<double>(cov.dim()));
}

double perception_index(const PatchSet& true_patches,
                        const PatchSet& restored_patches,
                        const estimators::KdeConfig& cfg) {
  return estimators::kde_renyi_half(true_patches.base, restored_patches.base,
                                    cfg);
}

EvaluationRecord evaluate_algorithm(const std::filesystem::path& manifest,
                                    const EvalConfig& cfg) {
  const std::vector<Triplet> triplets = read_manifest(manifest);

  std::vector<ImageTensor> truths, restoreds;
  double mse_acc = 0.0, ssim_acc = 0.0;
  int used = 0, skipped = 0;
  std::string first_failure;
  for (const Triplet& t : triplets) {
    try {
      ImageTensor truth = load_image(t.truth);
      ImageTensor restored = load_image(t.restored);
      require(std::filesystem::exists(t.degraded), Errc::IoError,
              "missing degraded image " + t.degraded.string());
      const DistortionMetrics m = distortion_metrics(truth, restored);
      mse_acc += m.mse;
      ssim_acc += m.ssim;
      truths.push_back(std::move(truth));
      restoreds.push_back(std::move(restored));
      ++used;
    } catch (const Error& e) {
      ++skipped;
      if (first_failure.empty()) first_failure = e.what();
    }
  }
  const double skip_fraction =
      static_cast<double>(skipped) / static_cast<double>(triplets.size());
  if (used == 0 || skip_fraction > cfg.max_skip_fraction)
    throw Error(Errc::ManifestError,
                manifest.string() + ": " + std::to_string(skipped) + "/" +
                    std::to_string(triplets.size()) +
                    " triplets unusable; first failure: " + first_failure);

  const PatchSet truth_patches =
      extract_patches(truths, cfg.patch_size, cfg.stride);
  const PatchSet restored_patches =
      extract_patches(restoreds, cfg.patch_size, cfg.stride);

  // Error patches share extraction positions, so rows subtract directly.
  PatchSet error_patches{
      numstats::SampleSet(restored_patches.base.data() -
                          truth_patches.base.data()),
      cfg.patch_size, cfg.stride};

  const int n_patches = static_cast<int>(truth_patches.base.n());
  const std::vector<int> kde_rows =
      subsample_indices(n_patches, cfg.kde_max_samples, cfg.seed);
  const numstats::SampleSet kde_truth =
      take_rows(truth_patches.base.data(), kde_rows);
  const numstats::SampleSet kde_restored =
      take_rows(restored_patches.base.data(), kde_rows);

  EvaluationRecord rec;
  rec.algorithm = manifest.parent_path().filename().string();
  rec.divergence_kind = cfg.divergence_kind;
  rec.perception =
      cfg.divergence_kind == bounds::DivergenceKind::Hellinger
          ? estimators::hellinger_distance(kde_truth, kde_restored, cfg.kde)
          : estimators::kde_renyi_half(kde_truth, kde_restored, cfg.kde);
  rec.uncertainty = uncertainty_upper(error_patches, cfg.ridge);
  rec.mse = mse_acc / used;
  rec.psnr = rec.mse > 0.0 ? 10.0 * std::log10(1.0 / rec.mse)
                           : std::numeric_limits<double>::infinity();
  rec.ssim = ssim_acc / used;
  rec.n_images = used;
  rec.n_patches = n_patches;
  return rec;
}

double synthetic_posterior_variance(const SyntheticOptions& opts) {
  const double vx = opts.sigma_x * opts.sigma_x;
  const double vw = opts.sigma_w * opts.sigma_w;
  return vx * vw / (vx + vw);
}

double write_synthetic_gaussian_dataset(const std::filesystem::path& dir,
                                        const SyntheticOptions& opts) {
  require(opts.n_images >= 1 && opts.height >= 1 && opts.width >= 1,
          Errc::DomainError, "fixture needs positive dimensions");
  require(opts.sigma_x > 0.0 && opts.sigma_w > 0.0, Errc::DomainError,
          "fixture needs positive noise levels");

  const double vx = opts.sigma_x * opts.sigma_x;
  const double vw = opts.sigma_w * opts.sigma_w;
  const double gain = vx / (vx + vw);              // posterior-mean shrinkage
  const double sigma_q = std::sqrt(gain * vw);     // posterior std

  const std::filesystem::path mean_dir = dir / "posterior_mean";
  const std::filesystem::path sample_dir = dir / "posterior_sample";
  std::filesystem::create_directories(mean_dir);
  std::filesystem::create_directories(sample_dir);

  nlohmann::json mean_manifest = nlohmann::json::array();
  nlohmann::json sample_manifest = nlohmann::json::array();
  Rng rng(opts.seed);
  char name[64];
  for (int i = 0; i < opts.n_images; ++i) {
    ImageTensor truth = make_image(opts.height, opts.width, 1);
    ImageTensor degraded = truth, mean_rest = truth, sample_rest = truth;
    for (std::size_t p = 0; p < truth.pixels.size(); ++p) {
      const double x = opts.mu0 + opts.sigma_x * rng.normal();
      const double y = x + opts.sigma_w * rng.normal();
      const double post_mean = opts.mu0 + gain * (y - opts.mu0);
      truth.pixels[p] = std::clamp(x, 0.0, 1.0);
      degraded.pixels[p] = std::clamp(y, 0.0, 1.0);
      mean_rest.pixels[p] = std::clamp(post_mean, 0.0, 1.0);
      sample_rest.pixels[p] =
          std::clamp(post_mean + sigma_q * rng.normal(), 0.0, 1.0);
    }

    std::snprintf(name, sizeof(name), "%03d", i);
    const std::string truth_name = std::string("truth_") + name + ".pgm";
    const std::string degraded_name =
        std::string("degraded_") + name + ".pgm";
    const std::string restored_name =
        std::string("restored_") + name + ".pgm";
    for (const auto& adir : {mean_dir, sample_dir}) {
      save_image(adir / truth_name, truth);
      save_image(adir / degraded_name, degraded);
    }
    save_image(mean_dir / restored_name, mean_rest);
    save_image(sample_dir / restored_name, sample_rest);

    const nlohmann::json entry = {{"truth", truth_name},
                                  {"degraded", degraded_name},
                                  {"restored", restored_name}};
    mean_manifest.push_back(entry);
    sample_manifest.push_back(entry);
  }

  std::ofstream(mean_dir / "manifest.json") << mean_manifest.dump(2) << "\n";
  std::ofstream(sample_dir / "manifest.json")
      << sample_manifest.dump(2) << "\n";
  return gain * vw;
}

}  // namespace upplane::imageval
