// rmdshrink: robust Mahalanobis outlier detection with shrinkage estimators.
//
//   rmdshrink detect   --input data.csv --variant v6 --output report.json
//   rmdshrink simulate --config scenarios.json --output metrics.csv
//   rmdshrink boxplot  --input data.csv --output plot.json
//   rmdshrink bench    --config scenarios.json
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmdshrink/io.hpp"
#include "rmdshrink/rmdshrink.hpp"

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
};

const std::vector<std::string> kVariantNames{"v1", "v2", "v3", "v4", "v5", "v6"};

rmd::L1MedianMode parse_l1_mode(const std::string& s) {
  return s == "weiszfeld" ? rmd::L1MedianMode::Weiszfeld : rmd::L1MedianMode::Medoid;
}

void emit(const std::string& output, const std::string& content) {
  if (output.empty() || output == "-") {
    std::cout << content;
  } else {
    rmd::io::atomic_write(output, content);
  }
}

std::string infer_format(const std::string& format, const std::string& output) {
  if (!format.empty()) return format;
  return std::filesystem::path(output).extension() == ".csv" ? "csv" : "json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Mahalanobis distance outlier detection with shrinkage estimators"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Override the seed of every scenario (simulate, bench)");

  // detect
  std::string det_input, det_variant = "v6", det_format, det_output, det_l1 = "medoid";
  double det_quantile = 0.975;
  bool det_header = false;
  auto* det = app.add_subcommand("detect", "Flag outliers in a CSV file");
  det->add_option("--input", det_input, "Input CSV")->required()->check(CLI::ExistingFile);
  det->add_option("--variant", det_variant, "Distance variant v1..v6")->check(CLI::IsMember(kVariantNames));
  det->add_option("--quantile", det_quantile, "Chi-squared quantile for the threshold")
      ->check(CLI::Range(0.0, 1.0));
  det->add_option("--format", det_format, "json or csv (default: from --output extension)")
      ->check(CLI::IsMember({"json", "csv"}));
  det->add_option("--output", det_output, "Output path (default: stdout)");
  det->add_flag("--has-header", det_header, "First CSV row holds column names");
  det->add_option("--l1-mode", det_l1, "L1 median: medoid or weiszfeld")
      ->check(CLI::IsMember({"medoid", "weiszfeld"}));

  // simulate
  std::string sim_config, sim_output, sim_format;
  unsigned sim_threads = 0;
  auto* sim = app.add_subcommand("simulate", "Run Monte Carlo contamination scenarios");
  sim->add_option("--config", sim_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--output", sim_output, "Output path (default: stdout)");
  sim->add_option("--format", sim_format, "json or csv (default: from --output extension)")
      ->check(CLI::IsMember({"json", "csv"}));
  sim->add_option("--threads", sim_threads, "Worker threads (0: all cores)");

  // boxplot
  std::string box_input, box_variant = "v6", box_output;
  double box_quantile = 0.975;
  bool box_header = false;
  auto* box = app.add_subcommand("boxplot", "Detect, then emit L1-depth boxplot plot data");
  box->add_option("--input", box_input, "Input CSV")->required()->check(CLI::ExistingFile);
  box->add_option("--variant", box_variant, "Distance variant v1..v6")->check(CLI::IsMember(kVariantNames));
  box->add_option("--quantile", box_quantile, "Chi-squared quantile")->check(CLI::Range(0.0, 1.0));
  box->add_option("--output", box_output, "Output path (default: stdout)");
  box->add_flag("--has-header", box_header, "First CSV row holds column names");

  // bench
  std::string bench_config, bench_output;
  int bench_k = 5;
  bool bench_all = false;
  auto* bench = app.add_subcommand("bench", "Time detection per variant and scenario");
  bench->add_option("--config", bench_config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  bench->add_option("--measurements", bench_k, "Timed runs per entry (>= 3)")->check(CLI::Range(3, 1000));
  bench->add_flag("--all-variants", bench_all, "Time all six variants, not only each scenario's own");
  bench->add_option("--output", bench_output, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*det) {
      const auto table = rmd::io::load_csv(det_input, det_header);
      rmd::DetectOptions opts;
      opts.quantile = det_quantile;
      opts.l1_mode = parse_l1_mode(det_l1);
      const auto report = rmd::detect(table.data, *rmd::parse_variant(det_variant), opts);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      const auto fmt = infer_format(det_format, det_output);
      emit(det_output, fmt == "csv" ? rmd::io::detection_csv(report) : rmd::io::detection_json(report, table.columns));
      std::cerr << report.outlier_count() << " of " << report.flags.size() << " rows flagged (threshold "
                << rmd::io::format_double(report.threshold) << ")\n";
    } else if (*sim) {
      auto specs = rmd::io::load_config(sim_config);
      if (common.seed)
        for (auto& s : specs) s.seed = *common.seed;
      std::vector<rmd::MetricsReport> reports;
      rmd::RunOptions opts;
      opts.threads = sim_threads;
      for (const auto& s : specs) {
        reports.push_back(rmd::run_scenario(s, opts));
        const auto& r = reports.back();
        std::cerr << r.id << ": c=" << rmd::io::format_double(r.c_mean) << " f=" << rmd::io::format_double(r.f_mean)
                  << " F=" << rmd::io::format_double(r.fscore_mean) << "\n";
      }
      const auto fmt = infer_format(sim_format, sim_output);
      emit(sim_output, fmt == "csv" ? rmd::io::metrics_csv(reports) : rmd::io::metrics_json(reports));
    } else if (*box) {
      const auto table = rmd::io::load_csv(box_input, box_header);
      rmd::DetectOptions opts;
      opts.quantile = box_quantile;
      const auto report = rmd::detect(table.data, *rmd::parse_variant(box_variant), opts);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      const auto summary = rmd::boxplot_summary(table.data, report.flags);
      emit(box_output, rmd::io::boxplot_json(table.data, table.columns, report, summary));
      std::cerr << "flagged " << summary.flagged_total << ": " << summary.flagged_inside << " inside fences, "
                << summary.flagged_outside << " outside, " << summary.flagged_central << " in the central half\n";
    } else if (*bench) {
      auto specs = rmd::io::load_config(bench_config);
      if (common.seed)
        for (auto& s : specs) s.seed = *common.seed;
      std::vector<rmd::BenchResult> results;
      for (const auto& s : specs) {
        if (bench_all) {
          for (auto v : rmd::kAllVariants) results.push_back(rmd::bench_variant(s, v, bench_k));
        } else {
          results.push_back(rmd::bench_variant(s, s.variant, bench_k));
        }
      }
      emit(bench_output, rmd::io::bench_csv(results));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
