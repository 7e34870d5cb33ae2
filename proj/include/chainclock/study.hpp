// Copyright 2026 The chainclock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chainclock/chain_model.hpp"
#include "chainclock/clock_metrics.hpp"
#include "chainclock/de_optimizer.hpp"
#include "chainclock/quench.hpp"
#include "chainclock/serialization.hpp"

namespace chainclock {

// ---- power-law fits -------------------------------------------------------

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const FitPoint&, const FitPoint&) = default;
};

struct ExcludedPoint {
  FitPoint point;
  std::string reason;
  friend bool operator==(const ExcludedPoint&, const ExcludedPoint&) = default;
};

// y = prefactor * x^exponent, least squares on (log x, log y).
struct FitResult {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  std::vector<FitPoint> points_used;
  std::vector<ExcludedPoint> excluded;
};

// Throws InvalidInput for fewer than 3 points or non-positive coordinates.
FitResult fit_power_law(const std::vector<FitPoint>& points);

// ---- sweep records --------------------------------------------------------

struct SweepRecord {
  std::size_t n_sites = 0;
  std::uint64_t seed = 0;
  std::size_t tail_count = 0;
  std::vector<double> params;  // tail couplings then J0
  double cost = 0.0;
  double nu = 0.0;
  double precision = 0.0;
  double prt_lower = 0.0;
  double prt_upper = 0.0;
  double j_last = 0.0;  // J_{N-1}
  double j_prev = 0.0;  // J_{N-2}
  double j_max = 0.0;
  double gamma = 1.0;
  // Kept out of records.csv so that sweep tables are reproducible byte for
  // byte; persisted in timings.csv next to it.
  double wall_time_s = 0.0;

  double j0() const { return params.back(); }
  ChainSpec spec() const;
  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

SweepRecord make_record(std::size_t n_sites, std::uint64_t seed, const DEConfig& config,
                        const OptimizationResult& result, double wall_time_s);

// CSV header of records.csv, in column order.
const std::vector<std::string>& record_columns();
std::string format_record(const SweepRecord& record);
SweepRecord parse_record(const std::string& line);

// Append-only store: <dir>/records.csv and <dir>/timings.csv.
class ResultStore {
 public:
  explicit ResultStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path records_path() const { return dir_ / "records.csv"; }
  std::filesystem::path timings_path() const { return dir_ / "timings.csv"; }

  std::vector<SweepRecord> load() const;
  void append(const SweepRecord& record) const;
  bool contains(std::size_t n_sites, std::uint64_t seed) const;

 private:
  std::filesystem::path dir_;
};

// Lowest-cost record for every N (ties: smallest seed), ordered by N.
std::vector<SweepRecord> best_per_size(const std::vector<SweepRecord>& records);

// ---- run configuration ----------------------------------------------------

struct ChainConfig {
  std::size_t n_sites = 0;
  double gamma = 1.0;
  CouplingProfile profile;

  ChainSpec spec() const { return expand_profile(profile, n_sites, gamma); }
};

struct AnalysisConfig {
  StatisticsWindow window;
  std::optional<double> t_end;  // series span; default: the statistics horizon
  double points_per_unit = 20.0;
  bool plot = true;
};

struct SweepConfig {
  std::vector<std::size_t> n_values = {10, 20, 30, 50, 80, 120, 200, 300};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::size_t exclude_at_most = 10;  // fits use N > this
};

struct QuenchConfig {
  std::optional<std::vector<double>> tdc;  // explicit grid
  double tdc_lo = 1e-2;
  std::optional<double> tdc_hi;  // default: baseline mean tick time
  std::size_t tdc_points = 60;
  double absorbed_floor = 1e-3;
  double plateau_fraction = 0.99;
  // Optimized chains to sweep: optimize result JSON files and/or the best
  // record per N of a sweep store. Without either, the inline chain is used.
  std::vector<std::string> results;
  std::optional<std::string> store;
};

struct FitConfig {
  std::string input;  // records.csv
  std::string x = "nu";
  std::string y = "precision";
  std::size_t exclude_at_most = 10;
};

struct PlotConfig {
  std::string input;  // a report JSON written by another command
};

struct RunConfig {
  static constexpr int kVersion = 1;
  std::optional<ChainConfig> chain;
  AnalysisConfig analysis;
  DEConfig optimizer;
  SweepConfig sweep;
  QuenchConfig quench;
  std::optional<FitConfig> fit;
  std::optional<PlotConfig> plot;
  std::string out = "out";
  std::size_t threads = 1;
};

// Throws ConfigError on any schema violation, including unknown keys and a
// missing or unsupported "version".
RunConfig parse_run_config(const io::Json& json);
RunConfig load_run_config(const std::filesystem::path& path);
io::Json to_json(const RunConfig& config);

io::Json to_json(const ChainConfig& chain);
ChainConfig chain_config_from_json(const io::Json& json, const std::string& context);

// ---- commands -------------------------------------------------------------

struct AnalysisReport {
  explicit AnalysisReport(ChainSpec s) : spec(std::move(s)) {}

  ChainSpec spec;
  std::optional<TickStatistics> statistics;
  std::optional<std::string> statistics_error;
  std::optional<PrtBounds> prt;
  TimeSeries survival;
  TimeSeries tick_pdf;
  TimeSeries fidelity;
  double fidelity_peak = 0.0;
  double fidelity_peak_time = 0.0;
  std::optional<double> t_pst;  // pi / (2 J0) for PST profiles
  std::optional<double> fidelity_at_t_pst;
};

AnalysisReport analyze(const ChainConfig& chain, const AnalysisConfig& config);
io::Json to_json(const AnalysisReport& report);

struct SweepOutcome {
  std::vector<SweepRecord> records;  // every (N, seed), store order
  std::vector<SweepRecord> best;     // best per N
  std::optional<FitResult> precision_vs_resolution;
  std::optional<FitResult> j0_vs_n;
  std::optional<FitResult> end_ratio_vs_n;  // J_{N-1} / J_max
  // (smallest N kept, exponent) for progressively stronger low-N exclusion.
  std::vector<std::pair<std::size_t, double>> exclusion_trace;
  bool prt_satisfied = true;
};

// Runs every missing (N, seed) job of `sweep` into `store`, then fits.
// Jobs run in parallel; records are appended in (N, seed) order so the CSV
// does not depend on the thread count.
SweepOutcome run_sweep(const SweepConfig& sweep, const DEConfig& optimizer,
                       const ResultStore& store, std::size_t threads,
                       const std::function<void(const SweepRecord&)>& on_record = {});
SweepOutcome fit_sweep(const std::vector<SweepRecord>& records, std::size_t exclude_at_most);
io::Json to_json(const FitResult& fit);
io::Json to_json(const SweepOutcome& outcome);

io::Json to_json(const QuenchSweep& sweep);

// ---- SVG ------------------------------------------------------------------

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;
  bool right_axis = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string y2_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
  std::vector<double> vertical_markers;
  // Small inset (e.g. a coupling profile) in the upper right corner.
  std::optional<PlotSeries> inset;
};

std::string render_svg(const PlotSpec& plot);

PlotSpec analysis_plot(const AnalysisReport& report);
PlotSpec sweep_plot(const SweepOutcome& outcome);
PlotSpec coupling_scaling_plot(const SweepOutcome& outcome);
PlotSpec quench_plot(const std::vector<QuenchSweep>& sweeps);

// Re-renders the plot of a report JSON written by analyze, sweep or quench.
std::string plot_from_report(const io::Json& report);

}  // namespace chainclock
