// Command-line front end: rational-check, bilinear-curve, trace, calibrate-delta.
//
//   slq_cli trace --function log --n1 90 --n2 120 --N 100
//   slq_cli --config run.json trace --seed 7
//
// Exit status: 0 on success, 2 when a trace run has unconverged samples, 1 on errors.

#include <cstring>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "slq/slq.hpp"

namespace {

std::string config_path_from_argv(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
    if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
  }
  return {};
}

void add_config_options(CLI::App& app, slq::ExperimentConfig& c) {
  app.add_option("--testbed", c.testbed, "laplacian or matern")->capture_default_str();
  app.add_option("--n1", c.n1, "grid size along the first axis")->capture_default_str();
  app.add_option("--n2", c.n2, "grid size along the second axis")->capture_default_str();
  app.add_option("--sample-fraction", c.sample_fraction, "fraction of grid points used as Matern sites")
      ->capture_default_str();
  app.add_option("--ell-rule", c.ell_rule, "standard (0.4 n2, 0.4 n1) or explicit")->capture_default_str();
  app.add_option("--ell1", c.ell1, "explicit lengthscale along the first axis");
  app.add_option("--ell2", c.ell2, "explicit lengthscale along the second axis");
  app.add_option("--nu", c.nu, "Matern smoothness (0.5, 1.5 or 2.5)")->capture_default_str();
  app.add_option("--tau", c.tau, "nugget")->capture_default_str();
  app.add_option("--site-seed", c.site_seed, "seed of the Matern site sample")->capture_default_str();
  app.add_option("--function", c.function, "exp_neg, sqrt, log or tanh_sqrt")->capture_default_str();
  app.add_option("--N", c.N, "number of probe vectors")->capture_default_str();
  app.add_option("--alpha", c.alpha, "confidence multiplier")->capture_default_str();
  app.add_option("--beta", c.beta, "delta calibration factor")->capture_default_str();
  app.add_option("--delta", c.delta, "Lanczos tolerance (calibrated when omitted)");
  app.add_option("--pilot-N", c.pilot_N, "pilot sample count for calibration")->capture_default_str();
  app.add_option("--t", c.t, "lookback threshold")->capture_default_str();
  app.add_option("--reorth", c.reorth, "auto, none, full or partial")->capture_default_str();
  app.add_option("--m-max", c.m_max, "Lanczos step cap per sample")->capture_default_str();
  app.add_option("--K", c.K, "number of rational terms (0 = automatic)")->capture_default_str();
  app.add_option("--seed", c.seed, "master seed")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--k-min", c.k_min, "first K of the rational-check schedule")->capture_default_str();
  app.add_option("--k-max", c.k_max, "last K of the rational-check schedule")->capture_default_str();
  app.add_option("--a", c.interval_a, "lower end of the spectrum interval");
  app.add_option("--b", c.interval_b, "upper end of the spectrum interval");
  app.add_option("--output,-o", c.output, "output file (default: stdout)");
  app.add_option("--format", c.format, "json, text or csv")->capture_default_str();
}

void emit(const slq::ExperimentConfig& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw std::runtime_error("cannot open output file '" + c.output + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  slq::ExperimentConfig cfg;
  try {
    if (const std::string path = config_path_from_argv(argc, argv); !path.empty()) {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
      cfg = slq::config_from_json(nlohmann::json::parse(in));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{"Stochastic Lanczos quadrature with error certificates"};
  app.require_subcommand(1);
  std::string config_file;
  bool dump_config = false;
  app.add_option("--config", config_file, "JSON configuration file (flags override it)");
  app.add_flag("--dump-config", dump_config, "print the effective configuration and exit");

  auto* rational = app.add_subcommand("rational-check", "uniform error of the rational approximant over a K schedule");
  auto* curve = app.add_subcommand("bilinear-curve", "per-step bilinear error, incremental and cumulative estimates");
  auto* trace = app.add_subcommand("trace", "trace estimate with confidence interval");
  auto* calibrate = app.add_subcommand("calibrate-delta", "pilot-based choice of the Lanczos tolerance");
  for (CLI::App* sub : {rational, curve, trace, calibrate}) add_config_options(*sub, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (dump_config) {
      // the destination belongs to this invocation, not to the saved configuration
      slq::ExperimentConfig saved = cfg;
      saved.output.clear();
      emit(cfg, slq::to_json(saved).dump(2) + "\n");
      return 0;
    }
    if (rational->parsed()) {
      emit(cfg, slq::cmd_rational_check(cfg));
      return 0;
    }
    if (curve->parsed()) {
      emit(cfg, slq::cmd_bilinear_curve(cfg));
      return 0;
    }
    if (calibrate->parsed()) {
      emit(cfg, slq::cmd_calibrate_delta(cfg).dump(2) + "\n");
      return 0;
    }
    const slq::TraceReport report = slq::cmd_trace(cfg);
    emit(cfg, cfg.format == "text" ? slq::render_trace_text(report.json) : report.json.dump(2) + "\n");
    return report.certified ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
