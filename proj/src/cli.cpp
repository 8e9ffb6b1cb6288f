#include "dpalign/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpalign/data.hpp"
#include "dpalign/metrics.hpp"
#include "dpalign/plot.hpp"
#include "dpalign/trainer.hpp"

namespace dpalign {

namespace fs = std::filesystem;

namespace {

struct TrainFlags {
  int max_iters = TrainConfig{}.max_iters;
  double step_size = TrainConfig{}.step_size;
  double tol = TrainConfig{}.convergence_tol;
  int log_every = TrainConfig{}.log_every;
  bool no_warp_prior = false;
  bool serial = false;
  std::string kernel = "se";
  int truncation = 0;
  double prior_noise = ModelConfig{}.prior_noise;
  bool plots = false;
  std::string out;
};

struct SyntheticFlags {
  double severity = 0.0;
  std::string sweep;
  int seeds = 1;
  std::uint64_t first_seed = 0;
  int j = 10;
  int n = 50;
  double noise_std = 0.05;
};

struct FitFlags {
  std::string input;
  std::uint64_t seed = 0;
};

struct GradcheckFlags {
  std::uint64_t seed = 0;
  double tol = 1e-4;
  std::string kernel = "se";
  int j = 3;
  int n = 8;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--max-iters", f.max_iters, "Maximum optimizer iterations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--step-size", f.step_size, "Initial (and maximum) step size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "Relative objective change for convergence")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--log-every", f.log_every, "Objective trace interval")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-warp-prior", f.no_warp_prior, "Drop the warp prior term");
  cmd->add_flag("--serial", f.serial, "Evaluate sequences serially");
  cmd->add_option("--kernel", f.kernel, "Sequence GP kernel")
      ->check(CLI::IsMember({"se", "matern32"}));
  cmd->add_option("--truncation", f.truncation, "Mixture truncation level (0 = number of sequences)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--prior-noise", f.prior_noise, "Diagonal noise added to the warp prior covariance")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--plots", f.plots, "Write SVG plots");
}

TrainConfig train_config(const TrainFlags& f, std::uint64_t seed) {
  TrainConfig c;
  c.max_iters = f.max_iters;
  c.step_size = f.step_size;
  c.convergence_tol = f.tol;
  c.log_every = f.log_every;
  c.warp_prior_on = !f.no_warp_prior;
  c.seed = seed;
  c.policy = f.serial ? ExecutionPolicy::kSerial : ExecutionPolicy::kParallel;
  return c;
}

ModelConfig model_config(const TrainFlags& f) {
  ModelConfig m;
  m.gp_kernel = parse_kernel_family(f.kernel);
  m.truncation = f.truncation;
  m.prior_noise = f.prior_noise;
  return m;
}

std::vector<double> parse_sweep(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size() || v < 0.0) throw CLI::ValidationError("--sweep", "bad severity '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw CLI::ValidationError("--sweep", "empty severity list");
  return values;
}

using Manifest = std::vector<std::pair<std::string, std::string>>;

void write_manifest(const fs::path& path, const Manifest& entries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
}

Manifest train_manifest(const TrainFlags& f) {
  return {{"version", std::string(kVersion)},
          {"kernel", f.kernel},
          {"warp_kernel", std::string(to_string(ModelConfig{}.warp_kernel))},
          {"truncation", f.truncation == 0 ? "J" : std::to_string(f.truncation)},
          {"max_iters", std::to_string(f.max_iters)},
          {"step_size", format_double(f.step_size)},
          {"tol", format_double(f.tol)},
          {"log_every", std::to_string(f.log_every)},
          {"warp_prior", f.no_warp_prior ? "off" : "on"},
          {"prior_noise", format_double(f.prior_noise)},
          {"plots", f.plots ? "on" : "off"}};
}

void write_run_outputs(const fs::path& dir, const Dataset& data, const FitResult& r, bool plots) {
  fs::create_directories(dir);
  const Eigen::Index n = data.length();
  {
    std::ofstream out(dir / "aligned.csv");
    out << "sequence,cluster";
    for (Eigen::Index k = 0; k < n; ++k) out << ",t" << k;
    out << '\n';
    for (Eigen::Index j = 0; j < r.aligned.rows(); ++j) {
      out << j << ',' << r.labels[static_cast<std::size_t>(j)];
      for (Eigen::Index k = 0; k < n; ++k) out << ',' << format_double(r.aligned(j, k));
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "warps.csv");
    out << "sequence,quantity";
    for (Eigen::Index k = 0; k < n; ++k) out << ",t" << k;
    out << '\n';
    for (Eigen::Index j = 0; j < r.aligned.rows(); ++j) {
      out << j << ",G";
      for (Eigen::Index k = 0; k < n; ++k) out << ',' << format_double(r.warped_inputs(j, k));
      out << '\n' << j << ",u";
      const auto& u = r.warps[static_cast<std::size_t>(j)].u;
      for (Eigen::Index k = 0; k < n; ++k) out << ',' << format_double(u[k]);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "trace.csv");
    out << "index,objective\n";
    for (std::size_t i = 0; i < r.objective_trace.size(); ++i) {
      out << i << ',' << format_double(r.objective_trace[i]) << '\n';
    }
  }
  if (plots) {
    const std::vector<int> input_labels = data.groups ? *data.groups : std::vector<int>{};
    plot_sequences(dir / "inputs.svg", "input sequences", data.x, data.y, input_labels);
    plot_sequences(dir / "aligned.svg", "aligned sequences by cluster", data.x, r.aligned, r.labels);
    plot_warps(dir / "warps.svg", data.x, r.warped_inputs, r.labels);
  }
}

Manifest fit_summary(const FitResult& r) {
  return {{"iterations", std::to_string(r.iterations)},
          {"converged", r.converged ? "true" : "false"},
          {"objective", format_double(r.final_terms.total)},
          {"beta", format_double(r.hyperparams.noise.beta())},
          {"alpha", format_double(r.dpmm.alpha)},
          {"base_var", format_double(r.dpmm.base_var)},
          {"n_clusters", std::to_string(r.n_clusters)}};
}

int cmd_synthetic(const SyntheticFlags& sf, const TrainFlags& tf, std::ostream& out) {
  const std::vector<double> severities =
      sf.sweep.empty() ? std::vector<double>{sf.severity} : parse_sweep(sf.sweep);
  const fs::path root(tf.out);
  fs::create_directories(root);

  Manifest manifest = {{"subcommand", "synthetic"}};
  std::string sev_list;
  for (double s : severities) sev_list += (sev_list.empty() ? "" : ",") + format_double(s);
  manifest.emplace_back("severities", sev_list);
  manifest.emplace_back("seeds", std::to_string(sf.seeds));
  manifest.emplace_back("first_seed", std::to_string(sf.first_seed));
  manifest.emplace_back("j", std::to_string(sf.j));
  manifest.emplace_back("n", std::to_string(sf.n));
  manifest.emplace_back("noise_std", format_double(sf.noise_std));
  for (auto& kv : train_manifest(tf)) manifest.push_back(kv);
  write_manifest(root / "manifest.txt", manifest);

  std::ofstream metrics(root / "metrics.csv");
  metrics << "severity,seed,mean_alignment_error,median_alignment_error,data_fit,warp_complexity,"
             "n_clusters,raw_mean_alignment_error,clusters_match_groups\n";
  const ModelConfig model = model_config(tf);
  for (double severity : severities) {
    for (int i = 0; i < sf.seeds; ++i) {
      const std::uint64_t seed = sf.first_seed + static_cast<std::uint64_t>(i);
      SyntheticConfig cfg;
      cfg.num_sequences = sf.j;
      cfg.length = sf.n;
      cfg.warp_severity = severity;
      cfg.noise_std = sf.noise_std;
      const Dataset data = generate_synthetic(cfg, seed);
      const FitResult r = fit(data, train_config(tf, seed), model);

      const double raw = alignment_error(data.y, *data.groups, AlignmentMode::kMean);
      const bool match = same_partition(r.labels, *data.groups);
      metrics << format_double(severity) << ',' << seed << ','
              << format_double(r.metrics.mean_alignment_error) << ','
              << format_double(r.metrics.median_alignment_error) << ','
              << format_double(r.metrics.data_fit) << ',' << format_double(r.metrics.warp_complexity)
              << ',' << r.n_clusters << ',' << format_double(raw) << ',' << (match ? 1 : 0) << '\n';
      metrics.flush();

      const fs::path dir = root / ("severity_" + format_double(severity) + "_seed_" + std::to_string(seed));
      write_run_outputs(dir, data, r, tf.plots);
      Manifest run = {{"subcommand", "synthetic"},
                      {"severity", format_double(severity)},
                      {"seed", std::to_string(seed)},
                      {"j", std::to_string(sf.j)},
                      {"n", std::to_string(sf.n)},
                      {"noise_std", format_double(sf.noise_std)}};
      for (auto& kv : train_manifest(tf)) run.push_back(kv);
      for (auto& kv : fit_summary(r)) run.push_back(kv);
      write_manifest(dir / "manifest.txt", run);

      out << "severity " << format_double(severity) << " seed " << seed << ": clusters "
          << r.n_clusters << ", mean alignment error " << r.metrics.mean_alignment_error
          << " (raw " << raw << "), data fit " << r.metrics.data_fit << ", warp complexity "
          << r.metrics.warp_complexity << '\n';
    }
  }
  return 0;
}

int cmd_fit(const FitFlags& ff, const TrainFlags& tf, std::ostream& out) {
  const Dataset data = load_csv(ff.input);
  const FitResult r = fit(data, train_config(tf, ff.seed), model_config(tf));
  const fs::path root(tf.out);
  write_run_outputs(root, data, r, tf.plots);

  const bool truth = data.groups.has_value();
  {
    std::ofstream metrics(root / "metrics.csv");
    metrics << (truth ? "mean_alignment_error,median_alignment_error," : "")
            << "data_fit,warp_complexity,n_clusters\n";
    if (truth) {
      metrics << format_double(r.metrics.mean_alignment_error) << ','
              << format_double(r.metrics.median_alignment_error) << ',';
    }
    metrics << format_double(r.metrics.data_fit) << ',' << format_double(r.metrics.warp_complexity)
            << ',' << r.n_clusters << '\n';
  }
  Manifest manifest = {{"subcommand", "fit"},
                       {"input", ff.input},
                       {"seed", std::to_string(ff.seed)},
                       {"sequences", std::to_string(data.num_sequences())},
                       {"length", std::to_string(data.length())}};
  for (auto& kv : train_manifest(tf)) manifest.push_back(kv);
  for (auto& kv : fit_summary(r)) manifest.push_back(kv);
  write_manifest(root / "manifest.txt", manifest);

  if (!truth) out << "notice: input has no group column; alignment error omitted\n";
  out << "clusters " << r.n_clusters << ", data fit " << r.metrics.data_fit
      << ", warp complexity " << r.metrics.warp_complexity << '\n';
  return 0;
}

int cmd_gradcheck(const GradcheckFlags& gf, std::ostream& out) {
  const GradCheckInstance inst =
      make_gradcheck_instance(gf.seed, gf.j, gf.n, true, parse_kernel_family(gf.kernel));
  const GradCheckReport report = check_gradients(inst, gf.tol);
  for (const auto& b : report.blocks) {
    out << b.name << ' ' << b.max_rel_error << ' ' << (b.passed ? "ok" : "FAIL") << '\n';
  }
  out << (report.passed() ? "gradient check passed" : "gradient check failed") << " (tol "
      << gf.tol << ")\n";
  return report.passed() ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint alignment and clustering of time-warped sequences", "dpalign"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  SyntheticFlags sf;
  TrainFlags synthetic_train;
  CLI::App* synthetic = app.add_subcommand("synthetic", "Fit generated sinc/cubic benchmark data");
  synthetic->add_option("--warp-severity", sf.severity, "Std of the random warp auxiliaries")
      ->check(CLI::NonNegativeNumber);
  synthetic->add_option("--sweep", sf.sweep, "Comma-separated severities, e.g. 0,0.25,0.5,1.0");
  synthetic->add_option("--seeds", sf.seeds, "Number of repeated trials")->check(CLI::PositiveNumber);
  synthetic->add_option("--first-seed", sf.first_seed, "Seed of the first trial");
  synthetic->add_option("--j", sf.j, "Number of sequences")->check(CLI::Range(2, 100000));
  synthetic->add_option("--n", sf.n, "Sequence length")->check(CLI::Range(4, 100000));
  synthetic->add_option("--noise-std", sf.noise_std, "Observation noise std")
      ->check(CLI::NonNegativeNumber);
  add_train_flags(synthetic, synthetic_train);

  FitFlags ff;
  TrainFlags fit_train;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit sequences from a CSV file");
  fit_cmd->add_option("--input", ff.input, "CSV file, one sequence per row")->required();
  fit_cmd->add_option("--seed", ff.seed, "Seed for the mixture warm start");
  add_train_flags(fit_cmd, fit_train);

  GradcheckFlags gf;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  gradcheck->add_option("--seed", gf.seed, "Instance seed");
  gradcheck->add_option("--tol", gf.tol, "Maximum relative error")->check(CLI::PositiveNumber);
  gradcheck->add_option("--kernel", gf.kernel, "Sequence GP kernel")
      ->check(CLI::IsMember({"se", "matern32"}));
  gradcheck->add_option("--j", gf.j, "Number of sequences")->check(CLI::Range(1, 4));
  gradcheck->add_option("--n", gf.n, "Sequence length")->check(CLI::Range(2, 10));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*synthetic) return cmd_synthetic(sf, synthetic_train, out);
    if (*fit_cmd) return cmd_fit(ff, fit_train, out);
    if (*gradcheck) return cmd_gradcheck(gf, out);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace dpalign
