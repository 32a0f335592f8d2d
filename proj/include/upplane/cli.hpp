#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "upplane/bounds.hpp"
#include "upplane/imageval.hpp"

namespace upplane::cli {

inline constexpr const char* kVersion = "0.1.0";

// Settings shared by every subcommand. The seed is echoed into all outputs;
// out_dir falls back to the UPPLANE_OUT_DIR environment variable.
struct GlobalOptions {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  bounds::DivergenceKind divergence = bounds::DivergenceKind::RenyiHalf;
  bool no_timestamp = false;
};

struct BoundsArgs {
  std::vector<int> dims{1};
  double p_min = 0.0;
  std::optional<double> p_max;  // default 5 (Renyi) or 0.99 (Hellinger)
  int p_count = 200;
  double n_xy = 0.5;
  double n_xgy = 0.75;
};

struct VerifyGaussianArgs {
  std::vector<int> dims{1, 2, 4};
  std::vector<double> p_values{0.0, 0.1, 0.3, 0.7, 1.2, 2.0, 3.0, 4.5, 6.5,
                               10.0};
  int seeds = 5;
  double tol = 1e-3;
};

struct VerifyExample1Args {
  std::vector<double> p_values{0.0, 0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> sigma2_values{0.25, 1.0, 4.0};
  int grid = 2000000;
  double tol = 1e-4;
};

struct EntropyArgs {
  std::filesystem::path input;
  int k = 3;
};

struct DivergenceArgs {
  std::filesystem::path p_input;
  std::filesystem::path q_input;
  std::string bandwidth = "silverman";  // silverman | scott | fixed
  double fixed_bandwidth = 0.0;
  double density_floor = 1e-30;
};

struct EvaluateArgs {
  std::filesystem::path dataset;  // root with one directory per algorithm
  int patch_size = 9;
  int stride = 3;
  double ridge = 1e-8;
  int kde_max_samples = 5000;
  double tol = 0.02;  // region classification tolerance
  std::optional<int> plane_d;
  std::optional<double> plane_n_xy;
  std::optional<double> plane_n_xgy;
};

// Each command writes its artifacts under out_dir and returns a process exit
// code: 0 success, 1 data/runtime failure, 2 usage error.
int cmd_bounds(const BoundsArgs& args, const GlobalOptions& g);
int cmd_verify_gaussian(const VerifyGaussianArgs& args,
                        const GlobalOptions& g);
int cmd_verify_example1(const VerifyExample1Args& args,
                        const GlobalOptions& g);
int cmd_entropy(const EntropyArgs& args, const GlobalOptions& g);
int cmd_divergence(const DivergenceArgs& args, const GlobalOptions& g);
int cmd_evaluate(const EvaluateArgs& args, const GlobalOptions& g);

// Maps a thrown Error to the documented exit codes.
int exit_code_for(const Error& e);

}  // namespace upplane::cli
