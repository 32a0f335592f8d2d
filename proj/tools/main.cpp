#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "upplane/cli.hpp"

namespace {

using upplane::Errc;
using upplane::Error;

// Config-file precedence: flags > file > defaults. A value is taken from the
// config only when its flag was not supplied on the command line.
template <class T>
void apply_config(const nlohmann::json& cfg, const char* key,
                  const CLI::Option* opt, T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::UsageError,
                std::string("config key '") + key + "': " + e.what());
  }
}

upplane::bounds::DivergenceKind parse_divergence(const std::string& name) {
  if (name == "renyi-half") return upplane::bounds::DivergenceKind::RenyiHalf;
  if (name == "hellinger") return upplane::bounds::DivergenceKind::Hellinger;
  throw Error(Errc::UsageError,
              "divergence must be 'renyi-half' or 'hellinger'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty-perception plane toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  upplane::cli::GlobalOptions global;
  std::string divergence_name = "renyi-half";
  std::string config_path;
  app.add_option("--seed", global.seed, "RNG seed echoed into all outputs");
  app.add_option("--out-dir", global.out_dir, "output directory")
      ->envname("UPPLANE_OUT_DIR");
  app.add_option("--config", config_path, "JSON config file");
  auto* divergence_opt = app.add_option(
      "--divergence", divergence_name, "perception divergence")
      ->check(CLI::IsMember({"renyi-half", "hellinger"}));
  app.add_flag("--no-timestamp", global.no_timestamp,
               "omit timestamps from SVG output");

  upplane::cli::BoundsArgs bounds_args;
  double bounds_p_max = 5.0;
  auto* bounds_cmd =
      app.add_subcommand("bounds", "tabulate and plot the bound curves");
  auto* bo_dims = bounds_cmd->add_option("--dims", bounds_args.dims,
                                         "dimensions, one curve per value");
  auto* bo_pmin = bounds_cmd->add_option("--p-min", bounds_args.p_min,
                                         "perception grid start");
  auto* bo_pmax = bounds_cmd->add_option("--p-max", bounds_p_max,
                                         "perception grid end");
  auto* bo_pcount = bounds_cmd->add_option("--p-count", bounds_args.p_count,
                                           "perception grid size");
  auto* bo_nxy = bounds_cmd->add_option("--n-xy", bounds_args.n_xy,
                                        "inherent uncertainty N(X|Y)");
  auto* bo_nxgy = bounds_cmd->add_option("--n-xgy", bounds_args.n_xgy,
                                         "Gaussian envelope N(X_G|Y)");

  upplane::cli::VerifyGaussianArgs vg_args;
  auto* vg_cmd = app.add_subcommand(
      "verify-gaussian", "numeric covariance optimization vs closed form");
  auto* vg_dims = vg_cmd->add_option("--dims", vg_args.dims, "dimensions");
  auto* vg_p = vg_cmd->add_option("--p-values", vg_args.p_values,
                                  "perception budgets");
  auto* vg_seeds =
      vg_cmd->add_option("--seeds", vg_args.seeds, "number of random seeds");
  auto* vg_tol = vg_cmd->add_option("--tol", vg_args.tol,
                                    "relative error tolerance");

  upplane::cli::VerifyExample1Args ve_args;
  auto* ve_cmd = app.add_subcommand(
      "verify-example1", "scalar denoising closed form vs grid oracle");
  auto* ve_p =
      ve_cmd->add_option("--p-values", ve_args.p_values, "perception values");
  auto* ve_s = ve_cmd->add_option("--sigma2", ve_args.sigma2_values,
                                  "observation noise variances");
  auto* ve_grid =
      ve_cmd->add_option("--grid", ve_args.grid, "oracle grid points");
  auto* ve_tol = ve_cmd->add_option("--tol", ve_args.tol,
                                    "absolute error tolerance");

  upplane::cli::EntropyArgs en_args;
  auto* en_cmd = app.add_subcommand(
      "entropy", "nearest-neighbor entropy of a sample file");
  en_cmd->add_option("--input", en_args.input, "sample file (.csv or binary)")
      ->required();
  auto* en_k = en_cmd->add_option("--k", en_args.k, "neighbor order");

  upplane::cli::DivergenceArgs dv_args;
  auto* dv_cmd = app.add_subcommand(
      "divergence", "KDE divergence between two sample files");
  dv_cmd->add_option("--p", dv_args.p_input, "first sample file")->required();
  dv_cmd->add_option("--q", dv_args.q_input, "second sample file")
      ->required();
  auto* dv_bw = dv_cmd->add_option("--bandwidth", dv_args.bandwidth,
                                   "silverman | scott | fixed");
  auto* dv_h = dv_cmd->add_option("--fixed-bandwidth",
                                  dv_args.fixed_bandwidth,
                                  "bandwidth for --bandwidth fixed");
  auto* dv_floor = dv_cmd->add_option("--density-floor",
                                      dv_args.density_floor,
                                      "density lower clamp");

  upplane::cli::EvaluateArgs ev_args;
  auto* ev_cmd = app.add_subcommand(
      "evaluate", "place restoration algorithms on the plane");
  ev_cmd->add_option("--dataset", ev_args.dataset,
                     "root directory, one subdirectory per algorithm")
      ->required();
  auto* ev_patch = ev_cmd->add_option("--patch-size", ev_args.patch_size,
                                      "square patch side");
  auto* ev_stride =
      ev_cmd->add_option("--stride", ev_args.stride, "patch stride");
  auto* ev_ridge = ev_cmd->add_option("--ridge", ev_args.ridge,
                                      "covariance ridge (pixel units^2)");
  auto* ev_kmax = ev_cmd->add_option("--kde-max-samples",
                                     ev_args.kde_max_samples,
                                     "patch cap for the KDE divergence");
  auto* ev_tol = ev_cmd->add_option("--tol", ev_args.tol,
                                    "region classification tolerance");
  int ev_plane_d = 0;
  double ev_plane_nxy = 0.0, ev_plane_nxgy = 0.0;
  auto* ev_pd = ev_cmd->add_option("--plane-d", ev_plane_d,
                                   "plane context dimension");
  auto* ev_pnxy = ev_cmd->add_option("--plane-n-xy", ev_plane_nxy,
                                     "plane context N(X|Y)");
  auto* ev_pnxgy = ev_cmd->add_option("--plane-n-xgy", ev_plane_nxgy,
                                      "plane context N(X_G|Y)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    nlohmann::json cfg = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        throw Error(Errc::UsageError, "cannot open config " + config_path);
      try {
        in >> cfg;
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::UsageError,
                    config_path + ": " + std::string(e.what()));
      }
    }
    apply_config(cfg, "divergence", divergence_opt, divergence_name);
    global.divergence = parse_divergence(divergence_name);

    if (bounds_cmd->parsed()) {
      apply_config(cfg, "dims", bo_dims, bounds_args.dims);
      apply_config(cfg, "p_min", bo_pmin, bounds_args.p_min);
      apply_config(cfg, "p_count", bo_pcount, bounds_args.p_count);
      apply_config(cfg, "n_xy", bo_nxy, bounds_args.n_xy);
      apply_config(cfg, "n_xgy", bo_nxgy, bounds_args.n_xgy);
      if (bo_pmax->count() > 0 || cfg.contains("p_max")) {
        apply_config(cfg, "p_max", bo_pmax, bounds_p_max);
        bounds_args.p_max = bounds_p_max;
      }
      return upplane::cli::cmd_bounds(bounds_args, global);
    }
    if (vg_cmd->parsed()) {
      apply_config(cfg, "dims", vg_dims, vg_args.dims);
      apply_config(cfg, "p_values", vg_p, vg_args.p_values);
      apply_config(cfg, "seeds", vg_seeds, vg_args.seeds);
      apply_config(cfg, "tol", vg_tol, vg_args.tol);
      return upplane::cli::cmd_verify_gaussian(vg_args, global);
    }
    if (ve_cmd->parsed()) {
      apply_config(cfg, "p_values", ve_p, ve_args.p_values);
      apply_config(cfg, "sigma2", ve_s, ve_args.sigma2_values);
      apply_config(cfg, "grid", ve_grid, ve_args.grid);
      apply_config(cfg, "tol", ve_tol, ve_args.tol);
      return upplane::cli::cmd_verify_example1(ve_args, global);
    }
    if (en_cmd->parsed()) {
      apply_config(cfg, "k", en_k, en_args.k);
      return upplane::cli::cmd_entropy(en_args, global);
    }
    if (dv_cmd->parsed()) {
      apply_config(cfg, "bandwidth", dv_bw, dv_args.bandwidth);
      apply_config(cfg, "fixed_bandwidth", dv_h, dv_args.fixed_bandwidth);
      apply_config(cfg, "density_floor", dv_floor, dv_args.density_floor);
      return upplane::cli::cmd_divergence(dv_args, global);
    }
    if (ev_cmd->parsed()) {
      apply_config(cfg, "patch_size", ev_patch, ev_args.patch_size);
      apply_config(cfg, "stride", ev_stride, ev_args.stride);
      apply_config(cfg, "ridge", ev_ridge, ev_args.ridge);
      apply_config(cfg, "kde_max_samples", ev_kmax, ev_args.kde_max_samples);
      apply_config(cfg, "tol", ev_tol, ev_args.tol);
      if (cfg.contains("plane")) {
        const nlohmann::json& plane = cfg["plane"];
        if (plane.contains("d")) ev_args.plane_d = plane["d"].get<int>();
        if (plane.contains("n_xy"))
          ev_args.plane_n_xy = plane["n_xy"].get<double>();
        if (plane.contains("n_xgy"))
          ev_args.plane_n_xgy = plane["n_xgy"].get<double>();
      }
      if (ev_pd->count() > 0) ev_args.plane_d = ev_plane_d;
      if (ev_pnxy->count() > 0) ev_args.plane_n_xy = ev_plane_nxy;
      if (ev_pnxgy->count() > 0) ev_args.plane_n_xgy = ev_plane_nxgy;
      return upplane::cli::cmd_evaluate(ev_args, global);
    }
    throw Error(Errc::UsageError, "no subcommand selected");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return upplane::cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
