#include "sgpl/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "sgpl/csv.hpp"
#include "sgpl/error.hpp"
#include "sgpl/oracle.hpp"
#include "sgpl/seeds.hpp"

namespace sgpl {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags for derive_seed.
constexpr std::uint64_t kDatasetStream = 0xD47A;
constexpr std::uint64_t kSamplerStream = 0x5A3B;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw InputError("config: '" + std::string(where) + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InputError("config: unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string to_string(ReplicateMode m) {
  return m == ReplicateMode::fixed_dataset ? "fixed_dataset" : "fresh_dataset";
}

PointSet demeaned(const PointSet& ps, double* x_mean = nullptr, double* y_mean = nullptr) {
  const double n = static_cast<double>(ps.size());
  const double mx = std::accumulate(ps.x.begin(), ps.x.end(), 0.0) / n;
  const double my = std::accumulate(ps.y.begin(), ps.y.end(), 0.0) / n;
  PointSet out = ps;
  for (auto& v : out.x) v -= mx;
  for (auto& v : out.y) v -= my;
  if (x_mean) *x_mean = mx;
  if (y_mean) *y_mean = my;
  return out;
}

ReplicateRecord run_replicate(const CellAssignment& assignment, const std::vector<CellId>& candidates,
                              const PointSet& centered, const ScenarioConfig& cfg, int scenario, int rep) {
  ReplicateRecord rec;
  rec.scenario = scenario;
  rec.rep = rep;
  rec.seed = replicate_seed(cfg, scenario, rep);
  try {
    SamplerConfig sc = cfg.sampler;
    sc.seed = rec.seed;
    const auto t0 = Clock::now();
    const PairSet pairs = sample_from_assignment(assignment, candidates, sc);
    rec.time_sampling_ms = ms_since(t0);
    rec.q = pairs.q();
    rec.achieved_target = pairs.achieved_target;
    if (pairs.q() < 2) throw NumericalError("fewer than 2 pairs sampled");

    const auto t1 = Clock::now();
    const PairData data = make_pair_data(centered, pairs);
    const PLFit fit = fit_pl(data, cfg.fit);
    rec.time_estimation_ms = ms_since(t1);

    rec.beta1 = fit.beta;
    rec.lambda = fit.lambda;
    rec.sigma2 = fit.sigma2;
    rec.iterations = fit.iterations;
    rec.converged = fit.converged;
    rec.ok = true;
    rec.status = "ok";
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.status = e.what();
  }
  return rec;
}

BenchmarkRecord run_benchmark(const PointSet& raw, const ScenarioConfig& cfg) {
  BenchmarkRecord b;
  if (raw.size() > kMaxDenseN) {
    b.note = "n=" + std::to_string(raw.size()) + " exceeds dense ML cap " + std::to_string(kMaxDenseN);
    return b;
  }
  try {
    const WeightsMatrix w = knn_weights(raw.coords, cfg.dgp.k_w);
    const DesignMatrix x = DesignMatrix::with_intercept(raw.x);
    const auto t0 = Clock::now();
    const MLFit fit = fit_ml_sem(w, x, raw.y);
    b.time_ms = ms_since(t0);
    b.ok = true;
    b.beta1 = fit.beta1;
    b.lambda = fit.lambda_ml;
    b.sigma2 = fit.sigma2_ml;
    b.note = fit.warning;
  } catch (const std::exception& e) {
    b.note = e.what();
  }
  return b;
}

ParamMetrics param_metrics(const std::vector<double>& est, double truth) {
  ParamMetrics m;
  if (est.empty()) return {kNaN, kNaN, kNaN};
  double s = 0.0, s2 = 0.0;
  for (double e : est) {
    s += e;
    s2 += (e - truth) * (e - truth);
  }
  const double n = static_cast<double>(est.size());
  m.mean = s / n;
  m.bias = m.mean - truth;
  m.mse = s2 / n;
  return m;
}

double ratio_or_nan(double num, double den) {
  if (!std::isfinite(num) || !std::isfinite(den) || den <= 0.0) return kNaN;
  return num / den;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (reps < 1) throw InputError("config: reps must be >= 1");
  if (n_values.empty() || lambda_values.empty() || patterns.empty()) {
    throw InputError("config: scenario grid is empty");
  }
  for (double l : lambda_values) {
    if (!(std::abs(l) < 1.0)) throw InputError("config: every lambda_sem must satisfy |lambda| < 1");
  }
  for (std::size_t n : n_values) {
    if (n <= static_cast<std::size_t>(dgp.k_w)) throw InputError("config: every n must exceed dgp.k_w");
  }
  if (!(grid.base_edge > 0.0) || grid.resolution < 0) throw InputError("config: bad grid");
  sampler.validate();
  fit.validate();
  DGPSpec probe = dgp;
  probe.n = n_values.front();
  probe.lambda_sem = lambda_values.front();
  probe.validate();
}

ScenarioConfig parse_scenario_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "config", {"n", "lambda_sem", "patterns", "reps", "mode", "benchmark", "master_seed",
                           "parallel", "grid", "sampler", "dgp", "fit"});
  ScenarioConfig c;
  read_opt(j, "n", c.n_values);
  read_opt(j, "lambda_sem", c.lambda_values);
  if (j.contains("patterns")) {
    std::vector<std::string> ps;
    read_opt(j, "patterns", ps);
    c.patterns.clear();
    for (const auto& p : ps) c.patterns.push_back(pattern_from_string(p));
  }
  read_opt(j, "reps", c.reps);
  if (j.contains("mode")) {
    std::string m;
    read_opt(j, "mode", m);
    if (m == "fixed_dataset") c.mode = ReplicateMode::fixed_dataset;
    else if (m == "fresh_dataset") c.mode = ReplicateMode::fresh_dataset;
    else throw InputError("config: mode must be fixed_dataset or fresh_dataset");
  }
  if (j.contains("benchmark")) {
    std::string b;
    read_opt(j, "benchmark", b);
    if (b == "none") c.benchmark = BenchmarkKind::none;
    else if (b == "ml_oracle") c.benchmark = BenchmarkKind::ml_oracle;
    else throw InputError("config: benchmark must be none or ml_oracle");
  }
  read_opt(j, "master_seed", c.master_seed);
  read_opt(j, "parallel", c.parallel);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, "grid", {"resolution", "base_edge"});
    read_opt(g, "resolution", c.grid.resolution);
    read_opt(g, "base_edge", c.grid.base_edge);
  }
  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    check_keys(s, "sampler", {"n_min_per_cell", "k_ring", "q_target"});
    read_opt(s, "n_min_per_cell", c.sampler.n_min_per_cell);
    read_opt(s, "k_ring", c.sampler.k_ring);
    read_opt(s, "q_target", c.sampler.q_target);
  }
  if (j.contains("dgp")) {
    const auto& d = j["dgp"];
    check_keys(d, "dgp", {"beta0", "beta1", "mu_x", "sigma_x", "sigma_eps2", "k_w", "k_taylor",
                          "lambda_c", "sigma_cluster"});
    read_opt(d, "beta0", c.dgp.beta0);
    read_opt(d, "beta1", c.dgp.beta1);
    read_opt(d, "mu_x", c.dgp.mu_x);
    read_opt(d, "sigma_x", c.dgp.sigma_x);
    read_opt(d, "sigma_eps2", c.dgp.sigma_eps2);
    read_opt(d, "k_w", c.dgp.k_w);
    read_opt(d, "k_taylor", c.dgp.k_taylor);
    read_opt(d, "lambda_c", c.dgp.lambda_c);
    read_opt(d, "sigma_cluster", c.dgp.sigma_cluster);
  }
  if (j.contains("fit")) {
    const auto& f = j["fit"];
    check_keys(f, "fit", {"tol", "max_iter", "lambda_clamp"});
    read_opt(f, "tol", c.fit.tol);
    read_opt(f, "max_iter", c.fit.max_iter);
    read_opt(f, "lambda_clamp", c.fit.lambda_clamp);
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_config(ss.str());
}

std::vector<ScenarioCell> expand_scenarios(const ScenarioConfig& cfg) {
  std::vector<ScenarioCell> cells;
  int idx = 0;
  for (std::size_t n : cfg.n_values) {
    for (double l : cfg.lambda_values) {
      for (Pattern p : cfg.patterns) cells.push_back({idx++, n, l, p});
    }
  }
  return cells;
}

std::uint64_t dataset_seed(const ScenarioConfig& cfg, int scenario, int rep) {
  return derive_seed(cfg.master_seed, {kDatasetStream, static_cast<std::uint64_t>(scenario),
                                       static_cast<std::uint64_t>(rep)});
}

std::uint64_t replicate_seed(const ScenarioConfig& cfg, int scenario, int rep) {
  return derive_seed(cfg.master_seed, {kSamplerStream, static_cast<std::uint64_t>(scenario),
                                       static_cast<std::uint64_t>(rep)});
}

MetricsRow compute_metrics(const ScenarioCell& cell, ReplicateMode mode, const Truth& truth,
                           const std::vector<ReplicateRecord>& reps,
                           const std::vector<BenchmarkRecord>& bench, double time_grid_ms) {
  MetricsRow m;
  m.cell = cell;
  m.mode = mode;
  m.reps = static_cast<int>(reps.size());
  m.time_grid_ms = time_grid_ms;

  std::vector<double> b, l, s;
  double q_sum = 0.0, t_samp = 0.0, t_est = 0.0;
  for (const auto& r : reps) {
    if (!r.ok) continue;
    ++m.n_ok;
    if (r.converged) ++m.n_converged;
    b.push_back(r.beta1);
    l.push_back(r.lambda);
    s.push_back(r.sigma2);
    q_sum += static_cast<double>(r.q);
    t_samp += r.time_sampling_ms;
    t_est += r.time_estimation_ms;
  }
  m.beta1 = param_metrics(b, truth.beta1);
  m.lambda = param_metrics(l, truth.lambda);
  m.sigma2 = param_metrics(s, truth.sigma2);
  const double n_ok = m.n_ok > 0 ? m.n_ok : kNaN;
  m.mean_q = q_sum / n_ok;
  m.mean_time_sampling_ms = t_samp / n_ok;
  m.mean_time_estimation_ms = t_est / n_ok;
  m.mean_time_sgpl_ms = (t_samp + t_est) / n_ok;

  std::vector<double> bb, bl, bs;
  double t_bench = 0.0;
  for (const auto& r : bench) {
    if (!r.ok) {
      if (m.bench_note.empty()) m.bench_note = r.note;
      continue;
    }
    if (m.bench_note.empty() && !r.note.empty()) m.bench_note = r.note;
    bb.push_back(r.beta1);
    bl.push_back(r.lambda);
    bs.push_back(r.sigma2);
    t_bench += r.time_ms;
  }
  m.bench_runs = static_cast<int>(bb.size());
  m.bench_beta1 = param_metrics(bb, truth.beta1);
  m.bench_lambda = param_metrics(bl, truth.lambda);
  m.bench_sigma2 = param_metrics(bs, truth.sigma2);
  m.time_benchmark_ms = m.bench_runs > 0 ? t_bench / m.bench_runs : kNaN;
  m.re_beta1 = ratio_or_nan(m.bench_beta1.mse, m.beta1.mse);
  m.re_lambda = ratio_or_nan(m.bench_lambda.mse, m.lambda.mse);
  m.re_sigma2 = ratio_or_nan(m.bench_sigma2.mse, m.sigma2.mse);
  m.relative_time = ratio_or_nan(m.time_benchmark_ms, m.mean_time_sgpl_ms);
  return m;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult result;
  const bool bench_on = cfg.benchmark == BenchmarkKind::ml_oracle;

  for (const ScenarioCell& cell : expand_scenarios(cfg)) {
    DGPSpec spec = cfg.dgp;
    spec.n = cell.n;
    spec.pattern = cell.pattern;
    spec.lambda_sem = cell.lambda_sem;
    const Truth truth{cfg.dgp.beta1, cell.lambda_sem, cfg.dgp.sigma_eps2};

    std::vector<ReplicateRecord> reps(static_cast<std::size_t>(cfg.reps));
    std::vector<BenchmarkRecord> bench;
    double time_grid_ms = 0.0;

    if (cfg.mode == ReplicateMode::fixed_dataset) {
      spec.seed = dataset_seed(cfg, cell.index, 0);
      const PointSet raw = gen_dataset(spec);
      const PointSet centered = demeaned(raw);

      const auto t0 = Clock::now();
      const CellAssignment assignment = assign_all(cfg.grid, centered.coords);
      const auto candidates = candidate_cells(assignment, cfg.sampler);
      time_grid_ms = ms_since(t0);
      if (candidates.empty()) {
        throw InputError("scenario " + std::to_string(cell.index) +
                         ": no cell reaches n_min_per_cell; lower resolution or n_min");
      }

#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
      for (int r = 0; r < cfg.reps; ++r) {
        reps[static_cast<std::size_t>(r)] = run_replicate(assignment, candidates, centered, cfg, cell.index, r);
      }
      if (bench_on) bench.push_back(run_benchmark(raw, cfg));
    } else {
      std::vector<double> grid_ms(static_cast<std::size_t>(cfg.reps), 0.0);
      if (bench_on) bench.resize(static_cast<std::size_t>(cfg.reps));
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
      for (int r = 0; r < cfg.reps; ++r) {
        const auto ur = static_cast<std::size_t>(r);
        DGPSpec local = spec;
        local.seed = dataset_seed(cfg, cell.index, r);
        try {
          const PointSet raw = gen_dataset(local);
          const PointSet centered = demeaned(raw);
          const auto t0 = Clock::now();
          const CellAssignment assignment = assign_all(cfg.grid, centered.coords);
          const auto candidates = candidate_cells(assignment, cfg.sampler);
          grid_ms[ur] = ms_since(t0);
          reps[ur] = run_replicate(assignment, candidates, centered, cfg, cell.index, r);
          if (bench_on) bench[ur] = run_benchmark(raw, cfg);
        } catch (const std::exception& e) {
          reps[ur].scenario = cell.index;
          reps[ur].rep = r;
          reps[ur].seed = replicate_seed(cfg, cell.index, r);
          reps[ur].status = e.what();
        }
      }
      time_grid_ms = std::accumulate(grid_ms.begin(), grid_ms.end(), 0.0) / cfg.reps;
    }

    result.metrics.push_back(compute_metrics(cell, cfg.mode, truth, reps, bench, time_grid_ms));
    result.replicates.insert(result.replicates.end(), reps.begin(), reps.end());
    for (auto& b : bench) {
      result.benchmarks.push_back(std::move(b));
      result.benchmark_scenario.push_back(cell.index);
    }
  }
  return result;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  os << "scenario,n,lambda_sem,pattern,mode,reps,n_ok,n_converged,mean_q,"
        "beta1_mean,beta1_bias,beta1_mse,lambda_mean,lambda_bias,lambda_mse,"
        "sigma2_mean,sigma2_bias,sigma2_mse,"
        "bench_runs,bench_note,bench_beta1_mean,bench_beta1_mse,bench_lambda_mean,bench_lambda_mse,"
        "bench_sigma2_mean,bench_sigma2_mse,re_beta1,re_lambda,re_sigma2,"
        "time_grid_ms,mean_time_sampling_ms,mean_time_estimation_ms,mean_time_sgpl_ms,"
        "time_benchmark_ms,relative_time\n";
  auto f = [](double v) { return format_double(v); };
  for (const auto& m : rows) {
    os << m.cell.index << ',' << m.cell.n << ',' << f(m.cell.lambda_sem) << ',' << to_string(m.cell.pattern)
       << ',' << to_string(m.mode) << ',' << m.reps << ',' << m.n_ok << ',' << m.n_converged << ','
       << f(m.mean_q) << ',' << f(m.beta1.mean) << ',' << f(m.beta1.bias) << ',' << f(m.beta1.mse) << ','
       << f(m.lambda.mean) << ',' << f(m.lambda.bias) << ',' << f(m.lambda.mse) << ','
       << f(m.sigma2.mean) << ',' << f(m.sigma2.bias) << ',' << f(m.sigma2.mse) << ',' << m.bench_runs
       << ',' << quote_csv(m.bench_note) << ',' << f(m.bench_beta1.mean) << ',' << f(m.bench_beta1.mse)
       << ',' << f(m.bench_lambda.mean) << ',' << f(m.bench_lambda.mse) << ',' << f(m.bench_sigma2.mean)
       << ',' << f(m.bench_sigma2.mse) << ',' << f(m.re_beta1) << ',' << f(m.re_lambda) << ','
       << f(m.re_sigma2) << ',' << f(m.time_grid_ms) << ',' << f(m.mean_time_sampling_ms) << ','
       << f(m.mean_time_estimation_ms) << ',' << f(m.mean_time_sgpl_ms) << ',' << f(m.time_benchmark_ms)
       << ',' << f(m.relative_time) << '\n';
  }
}

void write_replicates_csv(std::ostream& os, const std::vector<ReplicateRecord>& reps) {
  os << "scenario,rep,seed,status,q,achieved_target,beta1,lambda,sigma2,iterations,converged,"
        "time_sampling_ms,time_estimation_ms\n";
  for (const auto& r : reps) {
    os << r.scenario << ',' << r.rep << ',' << r.seed << ',' << quote_csv(r.status) << ',' << r.q << ','
       << (r.achieved_target ? 1 : 0) << ',' << format_double(r.beta1) << ',' << format_double(r.lambda)
       << ',' << format_double(r.sigma2) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
       << format_double(r.time_sampling_ms) << ',' << format_double(r.time_estimation_ms) << '\n';
  }
}

std::vector<ReplicateRecord> read_replicates_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t c_sc = t.column("scenario"), c_rep = t.column("rep"), c_seed = t.column("seed"),
                    c_st = t.column("status"), c_q = t.column("q"), c_ach = t.column("achieved_target"),
                    c_b = t.column("beta1"), c_l = t.column("lambda"), c_s = t.column("sigma2"),
                    c_it = t.column("iterations"), c_cv = t.column("converged"),
                    c_ts = t.column("time_sampling_ms"), c_te = t.column("time_estimation_ms");
  std::vector<ReplicateRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    ReplicateRecord r;
    r.scenario = static_cast<int>(t.number(i, c_sc));
    r.rep = static_cast<int>(t.number(i, c_rep));
    r.seed = std::stoull(t.rows[i][c_seed]);
    r.status = t.rows[i][c_st];
    r.ok = r.status == "ok";
    r.q = static_cast<std::size_t>(t.number(i, c_q));
    r.achieved_target = t.number(i, c_ach) != 0.0;
    r.beta1 = t.number(i, c_b);
    r.lambda = t.number(i, c_l);
    r.sigma2 = t.number(i, c_s);
    r.iterations = static_cast<int>(t.number(i, c_it));
    r.converged = t.number(i, c_cv) != 0.0;
    r.time_sampling_ms = t.number(i, c_ts);
    r.time_estimation_ms = t.number(i, c_te);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TimingRow> timing_report(ScenarioConfig cfg) {
  cfg.benchmark = BenchmarkKind::ml_oracle;
  cfg.parallel = false;
  for (std::size_t n : cfg.n_values) {
    if (n > kMaxDenseN) {
      throw InputError("timing: n=" + std::to_string(n) + " exceeds the dense ML cap of " +
                       std::to_string(kMaxDenseN));
    }
  }
  const ScenarioResult res = run_scenario(cfg);
  std::vector<TimingRow> rows;
  for (const auto& m : res.metrics) {
    if (m.bench_runs == 0) {
      throw NumericalError("timing: benchmark failed for scenario " + std::to_string(m.cell.index) +
                           ": " + m.bench_note);
    }
    rows.push_back({m.cell, m.mean_q, m.time_grid_ms, m.mean_time_sampling_ms, m.mean_time_estimation_ms,
                    m.mean_time_sgpl_ms, m.time_benchmark_ms, m.relative_time});
  }
  return rows;
}

void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows) {
  os << "scenario,n,lambda_sem,pattern,mean_q,time_grid_ms,mean_time_sampling_ms,"
        "mean_time_estimation_ms,mean_time_sgpl_ms,time_benchmark_ms,relative_time\n";
  for (const auto& r : rows) {
    os << r.cell.index << ',' << r.cell.n << ',' << format_double(r.cell.lambda_sem) << ','
       << to_string(r.cell.pattern) << ',' << format_double(r.mean_q) << ',' << format_double(r.time_grid_ms)
       << ',' << format_double(r.mean_time_sampling_ms) << ',' << format_double(r.mean_time_estimation_ms)
       << ',' << format_double(r.mean_time_sgpl_ms) << ',' << format_double(r.time_benchmark_ms) << ','
       << format_double(r.relative_time) << '\n';
  }
}

std::vector<Point2> project_latlon(const std::vector<double>& lat, const std::vector<double>& lon) {
  if (lat.size() != lon.size()) throw InputError("project_latlon: length mismatch");
  if (lat.empty()) return {};
  const double n = static_cast<double>(lat.size());
  const double lat_ref = std::accumulate(lat.begin(), lat.end(), 0.0) / n;
  const double lon_ref = std::accumulate(lon.begin(), lon.end(), 0.0) / n;
  const double deg = std::numbers::pi / 180.0;
  const double coslat = std::cos(lat_ref * deg);
  std::vector<Point2> out(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    out[i] = {kEarthRadiusKm * (lon[i] - lon_ref) * deg * coslat, kEarthRadiusKm * (lat[i] - lat_ref) * deg};
  }
  return out;
}

PointSet load_points_csv(const std::string& path, const FitFileOptions& opts, double* x_mean,
                         double* y_mean) {
  const CsvTable t = read_csv_file(path);
  const std::size_t cx = t.column(opts.x_col);
  const std::size_t cy = t.column(opts.y_col);
  const bool latlon = opts.coord_mode == CoordMode::latlon;
  const std::size_t c1 = t.column(latlon ? opts.lat_col : opts.px_col);
  const std::size_t c2 = t.column(latlon ? opts.lon_col : opts.py_col);
  if (t.rows.size() < 2) throw InputError("'" + path + "': need at least 2 data rows");

  PointSet ps;
  const std::size_t n = t.rows.size();
  ps.x.resize(n);
  ps.y.resize(n);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    ps.x[i] = t.number(i, cx);
    ps.y[i] = t.number(i, cy);
    a[i] = t.number(i, c1);
    b[i] = t.number(i, c2);
  }
  if (latlon) {
    ps.coords = project_latlon(a, b);
  } else {
    ps.coords.resize(n);
    for (std::size_t i = 0; i < n; ++i) ps.coords[i] = {a[i], b[i]};
  }
  return demeaned(ps, x_mean, y_mean);
}

FitFileResult fit_points(const PointSet& centered, const FitFileOptions& opts) {
  opts.sampler.validate();
  opts.fit.validate();
  if (opts.runs < 1) throw InputError("fit: runs must be >= 1");
  if (centered.size() < 2) throw InputError("fit: need at least 2 points");

  FitFileResult res;
  res.n_points = centered.size();
  const CellAssignment assignment = assign_all(opts.grid, centered.coords);
  const auto candidates = candidate_cells(assignment, opts.sampler);
  if (candidates.empty()) throw InputError("no cell reaches n_min_per_cell; lower resolution or n_min");

  for (int r = 0; r < opts.runs; ++r) {
    SamplerConfig sc = opts.sampler;
    sc.seed = derive_seed(opts.master_seed, {kSamplerStream, static_cast<std::uint64_t>(r)});
    const PairSet pairs = sample_from_assignment(assignment, candidates, sc);
    if (pairs.q() < 2) {
      throw InputError("fit: only " + std::to_string(pairs.q()) +
                       " pair(s) sampled; lower the resolution or k_ring");
    }
    FitRun run;
    run.run = r;
    run.seed = sc.seed;
    run.q = pairs.q();
    run.achieved_target = pairs.achieved_target;
    run.fit = fit_pl(make_pair_data(centered, pairs), opts.fit);
    res.runs.push_back(run);
  }
  const double nr = static_cast<double>(res.runs.size());
  for (const auto& r : res.runs) {
    res.mean_beta1 += r.fit.beta / nr;
    res.mean_lambda += r.fit.lambda / nr;
    res.mean_sigma2 += r.fit.sigma2 / nr;
    res.mean_q += static_cast<double>(r.q) / nr;
  }
  return res;
}

FitFileResult fit_file(const std::string& path, const FitFileOptions& opts) {
  double mx = 0.0, my = 0.0;
  const PointSet centered = load_points_csv(path, opts, &mx, &my);
  FitFileResult res = fit_points(centered, opts);
  res.x_mean = mx;
  res.y_mean = my;
  return res;
}

void write_fit_runs_csv(std::ostream& os, const FitFileResult& result) {
  os << "run,seed,q,achieved_target,beta1,lambda,sigma2,iterations,converged,loglik\n";
  for (const auto& r : result.runs) {
    os << r.run << ',' << r.seed << ',' << r.q << ',' << (r.achieved_target ? 1 : 0) << ','
       << format_double(r.fit.beta) << ',' << format_double(r.fit.lambda) << ','
       << format_double(r.fit.sigma2) << ',' << r.fit.iterations << ',' << (r.fit.converged ? 1 : 0)
       << ',' << format_double(r.fit.loglik) << '\n';
  }
}

PairSet export_pairs(const PointSet& points, const GridSpec& grid, const SamplerConfig& sampler,
                     const std::string& path) {
  const PairSet pairs = run_sgpl_sampling(points, grid, sampler);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_pairs_csv(out, pairs, points.coords);
  if (!out) throw InputError("write failed for '" + path + "'");
  return pairs;
}

}  // namespace sgpl
