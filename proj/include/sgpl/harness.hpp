#pragma once

// Experiment orchestration: scenario grids with Monte-Carlo replication,
// metrics, timing, real-data fitting and file export.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgpl/dgp.hpp"
#include "sgpl/hexgrid.hpp"
#include "sgpl/pairsampler.hpp"
#include "sgpl/plcore.hpp"

namespace sgpl {

enum class BenchmarkKind { none, ml_oracle };

// fixed_dataset: one dataset per scenario cell, replicates differ only in
// pair sampling. fresh_dataset: a new dataset for every replicate.
enum class ReplicateMode { fixed_dataset, fresh_dataset };

struct ScenarioConfig {
  std::vector<std::size_t> n_values{5000};
  std::vector<double> lambda_values{0.0};
  std::vector<Pattern> patterns{Pattern::uniform};
  int reps = 100;
  ReplicateMode mode = ReplicateMode::fixed_dataset;
  BenchmarkKind benchmark = BenchmarkKind::none;
  std::uint64_t master_seed = 1;
  bool parallel = true;
  GridSpec grid;
  SamplerConfig sampler;  // seed is replaced per replicate
  DGPSpec dgp;            // n, pattern, lambda_sem and seed are set per scenario
  FitOptions fit;

  void validate() const;
};

// JSON; unknown keys are rejected. See README for the schema.
ScenarioConfig parse_scenario_config(std::string_view json_text);
ScenarioConfig load_scenario_config(const std::string& path);

struct ScenarioCell {
  int index = 0;
  std::size_t n = 0;
  double lambda_sem = 0.0;
  Pattern pattern = Pattern::uniform;
};

// Scenario cells in n-major, then lambda, then pattern order.
std::vector<ScenarioCell> expand_scenarios(const ScenarioConfig& cfg);

std::uint64_t dataset_seed(const ScenarioConfig& cfg, int scenario, int rep);
std::uint64_t replicate_seed(const ScenarioConfig& cfg, int scenario, int rep);

struct ReplicateRecord {
  int scenario = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string status;  // "ok" or the error message
  std::size_t q = 0;
  bool achieved_target = false;
  double beta1 = 0.0;
  double lambda = 0.0;
  double sigma2 = 0.0;
  int iterations = 0;
  bool converged = false;
  double time_sampling_ms = 0.0;
  double time_estimation_ms = 0.0;
};

struct BenchmarkRecord {
  bool ok = false;
  std::string note;
  double beta1 = 0.0;
  double lambda = 0.0;
  double sigma2 = 0.0;
  double time_ms = 0.0;
};

struct ParamMetrics {
  double mean = 0.0;
  double bias = 0.0;
  double mse = 0.0;
};

struct MetricsRow {
  ScenarioCell cell;
  ReplicateMode mode = ReplicateMode::fixed_dataset;
  int reps = 0;
  int n_ok = 0;
  int n_converged = 0;
  double mean_q = 0.0;
  ParamMetrics beta1, lambda, sigma2;
  // Benchmark columns are NaN when no benchmark ran.
  int bench_runs = 0;
  std::string bench_note;
  ParamMetrics bench_beta1, bench_lambda, bench_sigma2;
  double re_beta1 = 0.0, re_lambda = 0.0, re_sigma2 = 0.0;
  double time_grid_ms = 0.0;
  double mean_time_sampling_ms = 0.0;
  double mean_time_estimation_ms = 0.0;
  double mean_time_sgpl_ms = 0.0;
  double time_benchmark_ms = 0.0;
  double relative_time = 0.0;
};

struct Truth {
  double beta1 = 1.5;
  double lambda = 0.0;
  double sigma2 = 0.1;
};

// Aggregates replicate records (rep order) against the truth. Benchmark
// metrics average over the benchmark records that succeeded.
MetricsRow compute_metrics(const ScenarioCell& cell, ReplicateMode mode, const Truth& truth,
                           const std::vector<ReplicateRecord>& reps,
                           const std::vector<BenchmarkRecord>& bench, double time_grid_ms);

struct ScenarioResult {
  std::vector<MetricsRow> metrics;
  std::vector<ReplicateRecord> replicates;
  std::vector<BenchmarkRecord> benchmarks;  // parallel to benchmark_scenario
  std::vector<int> benchmark_scenario;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
void write_replicates_csv(std::ostream& os, const std::vector<ReplicateRecord>& reps);
std::vector<ReplicateRecord> read_replicates_csv(std::istream& in);

struct TimingRow {
  ScenarioCell cell;
  double mean_q = 0.0;
  double time_grid_ms = 0.0;
  double mean_time_sampling_ms = 0.0;
  double mean_time_estimation_ms = 0.0;
  double mean_time_sgpl_ms = 0.0;
  double time_benchmark_ms = 0.0;
  double relative_time = 0.0;
};

// Runs the scenarios serially with the ML oracle as benchmark. Throws
// InputError when any n exceeds the dense cap.
std::vector<TimingRow> timing_report(ScenarioConfig cfg);
void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows);

enum class CoordMode { planar, latlon };

struct FitFileOptions {
  std::string x_col = "x";
  std::string y_col = "y";
  CoordMode coord_mode = CoordMode::planar;
  std::string px_col = "px";
  std::string py_col = "py";
  std::string lat_col = "lat";
  std::string lon_col = "long";
  GridSpec grid;
  SamplerConfig sampler;
  int runs = 100;
  std::uint64_t master_seed = 1;
  FitOptions fit;
};

struct FitRun {
  int run = 0;
  std::uint64_t seed = 0;
  std::size_t q = 0;
  bool achieved_target = false;
  PLFit fit;
};

struct FitFileResult {
  std::size_t n_points = 0;
  double x_mean = 0.0;
  double y_mean = 0.0;
  std::vector<FitRun> runs;
  double mean_beta1 = 0.0;
  double mean_lambda = 0.0;
  double mean_sigma2 = 0.0;
  double mean_q = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0;

// Equirectangular projection around the mean latitude/longitude, in km.
std::vector<Point2> project_latlon(const std::vector<double>& lat, const std::vector<double>& lon);

// Loads points from a CSV: coordinates per opts, x and y demeaned by the
// full-sample means (reported in the result).
PointSet load_points_csv(const std::string& path, const FitFileOptions& opts, double* x_mean = nullptr,
                         double* y_mean = nullptr);

FitFileResult fit_points(const PointSet& demeaned, const FitFileOptions& opts);
FitFileResult fit_file(const std::string& path, const FitFileOptions& opts);
void write_fit_runs_csv(std::ostream& os, const FitFileResult& result);

// One sampling pass, written in the pair CSV schema.
PairSet export_pairs(const PointSet& points, const GridSpec& grid, const SamplerConfig& sampler,
                     const std::string& path);

}  // namespace sgpl
