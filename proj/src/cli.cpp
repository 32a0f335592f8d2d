#include "upplane/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "upplane/estimators.hpp"
#include "upplane/gaussianlab.hpp"
#include "upplane/sample_io.hpp"
#include "upplane/svg.hpp"

namespace upplane::cli {

namespace {

std::string fmt12(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string());
  out << body;
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

nlohmann::json run_metadata(const GlobalOptions& g) {
  return {{"seed", g.seed},
          {"divergence", bounds::divergence_name(g.divergence)},
          {"version", kVersion}};
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return grid;
}

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::UsageError:
    case Errc::DeskScale:
    case Errc::OrderError:
      return 2;
    default:
      return 1;
  }
}

int cmd_bounds(const BoundsArgs& args, const GlobalOptions& g) {
  const bool hellinger = g.divergence == bounds::DivergenceKind::Hellinger;
  const double p_max = args.p_max.value_or(hellinger ? 0.99 : 5.0);
  if (!(p_max > args.p_min))
    throw Error(Errc::UsageError, "perception grid needs max > min");
  if (args.p_count < 2)
    throw Error(Errc::UsageError, "perception grid needs at least 2 points");
  if (args.p_min < 0.0 || (hellinger && p_max > 1.0))
    throw Error(Errc::UsageError, "perception grid outside valid domain");
  if (args.dims.empty()) throw Error(Errc::UsageError, "no dimensions given");

  std::filesystem::create_directories(g.out_dir);
  const std::vector<double> grid =
      linear_grid(args.p_min, p_max, args.p_count);
  for (int d : args.dims) {
    if (d < 1) throw Error(Errc::UsageError, "dimensions must be positive");
    const bounds::PlaneContext ctx(d, args.n_xy, args.n_xgy, g.divergence);
    const std::vector<bounds::CurveRow> rows =
        bounds::tabulate_bounds(ctx, grid);

    std::ostringstream csv;
    csv << "P,eta,lower,upper\n";
    for (const auto& row : rows)
      csv << fmt12(row.p) << ',' << fmt12(row.eta) << ',' << fmt12(row.lower)
          << ',' << fmt12(row.upper) << '\n';
    write_text(g.out_dir / ("bounds_d" + std::to_string(d) + ".csv"),
               csv.str());

    svg::PlaneOptions plane_opts;
    plane_opts.timestamp = !g.no_timestamp;
    plane_opts.title = std::string("uncertainty-perception plane (d=") +
                       std::to_string(d) + ", " +
                       bounds::divergence_name(g.divergence) + ")";
    write_text(g.out_dir / ("plane_d" + std::to_string(d) + ".svg"),
               svg::render_up_plane(rows, {}, plane_opts));
    std::cout << "bounds: d=" << d << " rows=" << rows.size()
              << " eta(start)=" << fmt12(rows.front().eta) << "\n";
  }
  return 0;
}

int cmd_verify_gaussian(const VerifyGaussianArgs& args,
                        const GlobalOptions& g) {
  if (args.dims.empty() || args.p_values.empty() || args.seeds < 1)
    throw Error(Errc::UsageError, "empty verification sweep");
  for (int d : args.dims)
    if (d < 1 || d > 8)
      throw Error(Errc::DeskScale,
                  "dims must stay within 1..8 for the desk-scale sweep");

  std::filesystem::create_directories(g.out_dir);
  int failures = 0;
  double max_rel_err = 0.0;
  nlohmann::json summary_rows = nlohmann::json::array();
  for (int d : args.dims) {
    for (int s = 0; s < args.seeds; ++s) {
      const std::uint64_t seed = g.seed + static_cast<std::uint64_t>(s);
      const gaussianlab::LinearGaussianProblem problem =
          gaussianlab::random_problem(d, seed ^ 0x9d2c5680ULL);
      const double n_xy = gaussianlab::inherent_uncertainty(problem);

      std::ostringstream csv;
      csv << "P,U_numeric,U_analytic,constraint_activity,iterations\n";
      for (double p : args.p_values) {
        const gaussianlab::UpSolution sol =
            gaussianlab::solve_up_gaussian(problem, p);
        const double analytic = bounds::eta(p, d) * n_xy;
        const double rel_err =
            std::abs(sol.u - analytic) / std::max(analytic, 1e-300);
        max_rel_err = std::max(max_rel_err, rel_err);
        const bool pass = rel_err <= args.tol && sol.converged;
        if (!pass) ++failures;
        csv << fmt12(p) << ',' << fmt12(sol.u) << ',' << fmt12(analytic)
            << ',' << fmt12(sol.constraint_activity) << ',' << sol.iterations
            << '\n';
        summary_rows.push_back({{"d", d},
                                {"seed_index", s},
                                {"P", p},
                                {"rel_err", rel_err},
                                {"activity", sol.constraint_activity},
                                {"pass", pass}});
        std::cout << "verify-gaussian: d=" << d << " seed=" << s
                  << " P=" << fmt12(p) << " rel_err=" << fmt12(rel_err)
                  << " activity=" << fmt12(sol.constraint_activity)
                  << (pass ? " PASS" : " FAIL") << "\n";
      }
      write_text(g.out_dir / ("verify_gaussian_d" + std::to_string(d) + "_s" +
                              std::to_string(s) + ".csv"),
                 csv.str());
    }
  }

  nlohmann::json summary = {{"rows", summary_rows},
                            {"failures", failures},
                            {"max_rel_err", max_rel_err},
                            {"tolerance", args.tol},
                            {"metadata", run_metadata(g)}};
  write_text(g.out_dir / "verify_gaussian_summary.json",
             summary.dump(2) + "\n");
  std::cout << "verify-gaussian: max_rel_err=" << fmt12(max_rel_err) << " "
            << (failures == 0 ? "ALL PASS" : "FAILURES") << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_verify_example1(const VerifyExample1Args& args,
                        const GlobalOptions& g) {
  if (args.p_values.empty() || args.sigma2_values.empty())
    throw Error(Errc::UsageError, "empty verification sweep");
  if (args.grid < 1000)
    throw Error(Errc::UsageError, "oracle grid needs at least 1000 points");

  std::filesystem::create_directories(g.out_dir);
  std::ostringstream csv;
  csv << "P,sigma2,U_closed,U_oracle,abs_err,sigma_z_star\n";
  int failures = 0;
  double max_abs_err = 0.0;
  for (double sigma2 : args.sigma2_values) {
    for (double p : args.p_values) {
      const bounds::Example1Result closed = bounds::example1_up(p, sigma2);
      const double oracle = gaussianlab::example1_oracle(p, sigma2, args.grid);
      const double abs_err = std::abs(closed.u - oracle);
      max_abs_err = std::max(max_abs_err, abs_err);
      if (abs_err > args.tol) ++failures;
      csv << fmt12(p) << ',' << fmt12(sigma2) << ',' << fmt12(closed.u) << ','
          << fmt12(oracle) << ',' << fmt12(abs_err) << ','
          << fmt12(closed.sigma_z_star) << '\n';
      std::cout << "verify-example1: P=" << fmt12(p)
                << " sigma2=" << fmt12(sigma2) << " abs_err=" << fmt12(abs_err)
                << (abs_err <= args.tol ? " PASS" : " FAIL") << "\n";
    }
  }
  write_text(g.out_dir / "verify_example1.csv", csv.str());
  std::cout << "verify-example1: max_abs_err=" << fmt12(max_abs_err) << " "
            << (failures == 0 ? "ALL PASS" : "FAILURES") << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_entropy(const EntropyArgs& args, const GlobalOptions& g) {
  const numstats::SampleSet samples = sample_io::load_samples(args.input);
  const estimators::KnnConfig cfg{args.k};
  const double h = estimators::knn_entropy(samples, cfg);
  const double n =
      numstats::entropy_power(h, static_cast<int>(samples.d()));

  std::filesystem::create_directories(g.out_dir);
  nlohmann::json out = {{"input", args.input.string()},
                        {"n", samples.n()},
                        {"d", samples.d()},
                        {"k", args.k},
                        {"entropy", json_number(h)},
                        {"entropy_power", json_number(n)},
                        {"metadata", run_metadata(g)}};
  write_text(g.out_dir / "entropy.json", out.dump(2) + "\n");
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_divergence(const DivergenceArgs& args, const GlobalOptions& g) {
  const numstats::SampleSet p = sample_io::load_samples(args.p_input);
  const numstats::SampleSet q = sample_io::load_samples(args.q_input);

  estimators::KdeConfig cfg;
  cfg.density_floor = args.density_floor;
  if (args.bandwidth == "silverman") {
    cfg.bandwidth_rule = estimators::BandwidthRule::Silverman;
  } else if (args.bandwidth == "scott") {
    cfg.bandwidth_rule = estimators::BandwidthRule::Scott;
  } else if (args.bandwidth == "fixed") {
    cfg.bandwidth_rule = estimators::BandwidthRule::Fixed;
    cfg.fixed_bandwidth = args.fixed_bandwidth;
  } else {
    throw Error(Errc::UsageError,
                "bandwidth must be silverman, scott or fixed");
  }

  const double bc = estimators::kde_bhattacharyya(p, q, cfg);
  const double renyi = std::max(0.0, -2.0 * std::log(std::max(bc, 1e-300)));
  const double hellinger =
      std::sqrt(std::max(0.0, 1.0 - std::min(bc, 1.0)));
  const double selected =
      g.divergence == bounds::DivergenceKind::Hellinger ? hellinger : renyi;

  std::filesystem::create_directories(g.out_dir);
  nlohmann::json out = {{"p_input", args.p_input.string()},
                        {"q_input", args.q_input.string()},
                        {"n_p", p.n()},
                        {"n_q", q.n()},
                        {"d", p.d()},
                        {"bhattacharyya", json_number(bc)},
                        {"renyi_half", json_number(renyi)},
                        {"hellinger", json_number(hellinger)},
                        {"selected_kind",
                         bounds::divergence_name(g.divergence)},
                        {"selected_value", json_number(selected)},
                        {"metadata", run_metadata(g)}};
  write_text(g.out_dir / "divergence.json", out.dump(2) + "\n");
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args, const GlobalOptions& g) {
  if (!std::filesystem::is_directory(args.dataset))
    throw Error(Errc::ManifestError,
                "dataset root is not a directory: " + args.dataset.string());

  // Algorithm directories in sorted order for a deterministic report.
  std::vector<std::filesystem::path> algo_dirs;
  for (const auto& entry :
       std::filesystem::directory_iterator(args.dataset)) {
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "manifest.json"))
      algo_dirs.push_back(entry.path());
  }
  std::sort(algo_dirs.begin(), algo_dirs.end());
  if (algo_dirs.empty())
    throw Error(Errc::ManifestError,
                "no algorithm directories with manifest.json under " +
                    args.dataset.string());

  imageval::EvalConfig cfg;
  cfg.patch_size = args.patch_size;
  cfg.stride = args.stride;
  cfg.ridge = args.ridge;
  cfg.kde_max_samples = args.kde_max_samples;
  cfg.divergence_kind = g.divergence;
  cfg.seed = g.seed;

  std::optional<bounds::PlaneContext> ctx;
  if (args.plane_d && args.plane_n_xy && args.plane_n_xgy)
    ctx.emplace(*args.plane_d, *args.plane_n_xy, *args.plane_n_xgy,
                g.divergence);

  std::vector<imageval::EvaluationRecord> records;
  nlohmann::json records_json = nlohmann::json::array();
  std::ostringstream csv;
  csv << "algorithm,perception,divergence,uncertainty,mse,psnr,ssim,"
         "n_images,n_patches,region,lower,upper,slack\n";
  std::vector<svg::PlanePoint> points;
  const std::vector<std::string> palette{"#1f6fb2", "#b2571f", "#6a1fb2",
                                         "#1fb26a", "#b21f45"};
  for (std::size_t i = 0; i < algo_dirs.size(); ++i) {
    const imageval::EvaluationRecord rec =
        imageval::evaluate_algorithm(algo_dirs[i] / "manifest.json", cfg);
    records.push_back(rec);

    nlohmann::json rj = {{"algorithm", rec.algorithm},
                         {"perception", json_number(rec.perception)},
                         {"divergence",
                          bounds::divergence_name(rec.divergence_kind)},
                         {"uncertainty", json_number(rec.uncertainty)},
                         {"mse", json_number(rec.mse)},
                         {"psnr", json_number(rec.psnr)},
                         {"ssim", json_number(rec.ssim)},
                         {"n_images", rec.n_images},
                         {"n_patches", rec.n_patches}};
    std::string region_cell, lower_cell, upper_cell, slack_cell;
    if (ctx) {
      const bounds::RegionVerdict verdict = bounds::classify_point(
          {rec.perception, rec.uncertainty, rec.algorithm}, *ctx, args.tol);
      rj["region"] = bounds::region_name(verdict.region);
      rj["bound_lower"] = json_number(verdict.lower);
      rj["bound_upper"] = json_number(verdict.upper);
      rj["slack"] = json_number(verdict.slack);
      region_cell = bounds::region_name(verdict.region);
      lower_cell = fmt12(verdict.lower);
      upper_cell = fmt12(verdict.upper);
      slack_cell = fmt12(verdict.slack);
    }
    records_json.push_back(rj);
    csv << rec.algorithm << ',' << fmt12(rec.perception) << ','
        << bounds::divergence_name(rec.divergence_kind) << ','
        << fmt12(rec.uncertainty) << ',' << fmt12(rec.mse) << ','
        << fmt12(rec.psnr) << ',' << fmt12(rec.ssim) << ',' << rec.n_images
        << ',' << rec.n_patches << ',' << region_cell << ',' << lower_cell
        << ',' << upper_cell << ',' << slack_cell << '\n';
    points.push_back({rec.perception, rec.uncertainty, rec.algorithm,
                      palette[i % palette.size()]});
    std::cout << "evaluate: " << rec.algorithm
              << " perception=" << fmt12(rec.perception)
              << " uncertainty=" << fmt12(rec.uncertainty)
              << " psnr=" << fmt12(rec.psnr)
              << (region_cell.empty() ? "" : " region=" + region_cell)
              << "\n";
  }

  std::filesystem::create_directories(g.out_dir);
  nlohmann::json report = {{"records", records_json},
                           {"metadata", run_metadata(g)}};
  nlohmann::json config_echo = {{"patch_size", cfg.patch_size},
                                {"stride", cfg.stride},
                                {"ridge", cfg.ridge},
                                {"kde_max_samples", cfg.kde_max_samples},
                                {"tol", args.tol}};
  if (ctx)
    config_echo["plane"] = {{"d", ctx->d},
                            {"n_xy", ctx->n_xy},
                            {"n_xgy", ctx->n_xgy}};
  report["metadata"]["config"] = config_echo;
  write_text(g.out_dir / "report.json", report.dump(2) + "\n");
  write_text(g.out_dir / "report.csv", csv.str());

  std::vector<bounds::CurveRow> curve;
  if (ctx) {
    double p_hi = 1e-6;
    for (const auto& rec : records) p_hi = std::max(p_hi, rec.perception);
    curve = bounds::tabulate_bounds(*ctx, linear_grid(0.0, p_hi * 1.1, 200));
  }
  svg::PlaneOptions plane_opts;
  plane_opts.timestamp = !g.no_timestamp;
  plane_opts.shade_regions = ctx.has_value();
  write_text(g.out_dir / "plane.svg",
             svg::render_up_plane(curve, points, plane_opts));
  return 0;
}

}  // namespace upplane::cli
