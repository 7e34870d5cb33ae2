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

#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "chainclock/errors.hpp"
#include "chainclock/spectral.hpp"
#include "chainclock/study.hpp"

namespace chainclock {

namespace {

using io::Json;

Json series_json(const TimeSeries& s) { return {{"t", s.times}, {"value", s.values}}; }

Json prt_json(const PrtBounds& b) { return {{"lower", b.lower}, {"upper", b.upper}}; }

std::optional<FitResult> try_fit(const std::vector<FitPoint>& points,
                                 std::vector<ExcludedPoint> excluded) {
  if (points.size() < 3) return std::nullopt;
  auto fit = fit_power_law(points);
  fit.excluded = std::move(excluded);
  return fit;
}

}  // namespace

AnalysisReport analyze(const ChainConfig& chain, const AnalysisConfig& config) {
  AnalysisReport report(chain.spec());
  const auto& spec = report.spec;
  try {
    report.statistics = tick_statistics(decompose_effective(spec), config.window);
    if (spec.gamma() > 0.0) report.prt = prt_bounds(spec.gamma(), report.statistics->resolution);
  } catch (const NumericalFailure& e) {
    report.statistics_error = e.what();
  }
  if (chain.profile.kind == ProfileKind::kPst) {
    report.t_pst = std::numbers::pi / (2.0 * chain.profile.j0);
    report.fidelity_at_t_pst = fidelity_direct(spec, *report.t_pst);
  }

  double t_end = 100.0;
  if (config.t_end) {
    t_end = *config.t_end;
  } else if (report.statistics && std::isfinite(report.statistics->horizon)) {
    t_end = report.statistics->horizon;
  } else if (report.statistics) {
    t_end = 4.0 * report.statistics->mu;
  } else if (report.t_pst) {
    t_end = 2.0 * *report.t_pst;
  }
  const auto grid = uniform_grid(t_end, config.points_per_unit);
  auto series = propagate_timeseries(Tridiagonal::effective(spec), 1, grid);
  report.survival = std::move(series.survival);
  report.tick_pdf = std::move(series.tick_pdf);

  // Transfer fidelity |<N|exp(-i H_XX t)|1>|^2 of the closed chain.
  const Propagator closed(spec.with_gamma(0.0));
  auto psi = closed.site_state(1);
  report.fidelity.kind = SeriesKind::kFidelity;
  report.fidelity.times = grid;
  double t = 0.0;
  for (double target : grid) {
    closed.advance(psi, target - t);
    t = target;
    const double f = std::norm(psi.back());
    report.fidelity.values.push_back(f);
    if (f > report.fidelity_peak) {
      report.fidelity_peak = f;
      report.fidelity_peak_time = target;
    }
  }
  if (report.fidelity_at_t_pst && *report.fidelity_at_t_pst >= report.fidelity_peak) {
    report.fidelity_peak = *report.fidelity_at_t_pst;
    report.fidelity_peak_time = *report.t_pst;
  }
  return report;
}

Json to_json(const AnalysisReport& r) {
  Json j = {{"kind", "analysis"},
            {"n_sites", r.spec.n_sites()},
            {"gamma", r.spec.gamma()},
            {"couplings", r.spec.couplings()},
            {"statistics", r.statistics ? io::to_json(*r.statistics) : Json(nullptr)},
            {"statistics_error", r.statistics_error ? Json(*r.statistics_error) : Json(nullptr)},
            {"prt", r.prt ? prt_json(*r.prt) : Json(nullptr)},
            {"prt_satisfied",
             r.prt && r.statistics ? Json(r.prt->contains(r.statistics->precision)) : Json(nullptr)},
            {"fidelity_peak", {{"value", r.fidelity_peak}, {"t", r.fidelity_peak_time}}},
            {"t_pst", r.t_pst ? Json(*r.t_pst) : Json(nullptr)},
            {"fidelity_at_t_pst", r.fidelity_at_t_pst ? Json(*r.fidelity_at_t_pst) : Json(nullptr)},
            {"survival", series_json(r.survival)},
            {"tick_pdf", series_json(r.tick_pdf)},
            {"fidelity", series_json(r.fidelity)}};
  return j;
}

SweepOutcome run_sweep(const SweepConfig& sweep, const DEConfig& optimizer,
                       const ResultStore& store, std::size_t threads,
                       const std::function<void(const SweepRecord&)>& on_record) {
  struct Job {
    std::size_t n;
    std::uint64_t seed;
  };
  auto sizes = sweep.n_values;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  const auto existing = store.load();
  std::vector<Job> jobs;
  for (auto n : sizes) {
    for (auto seed : sweep.seeds) {
      const bool done = std::any_of(existing.begin(), existing.end(), [&](const SweepRecord& r) {
        return r.n_sites == n && r.seed == seed;
      });
      if (!done) jobs.push_back({n, seed});
    }
  }
  for (const auto& job : jobs) {
    DEConfig c = optimizer;
    c.seed = job.seed;
    c.validate(job.n);
  }

  // Single serialized writer: results are appended in job order.
  std::vector<std::optional<SweepRecord>> finished(jobs.size());
  std::size_t next_to_write = 0;
  std::mutex writer;
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    DEConfig c = optimizer;
    c.seed = jobs[i].seed;
    const auto start = std::chrono::steady_clock::now();
    const auto result = optimize(jobs[i].n, c);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::lock_guard lock(writer);
    finished[i] = make_record(jobs[i].n, jobs[i].seed, c, result, wall);
    while (next_to_write < jobs.size() && finished[next_to_write]) {
      store.append(*finished[next_to_write]);
      if (on_record) on_record(*finished[next_to_write]);
      ++next_to_write;
    }
  });

  std::vector<SweepRecord> wanted;
  for (const auto& r : store.load()) {
    if (std::find(sizes.begin(), sizes.end(), r.n_sites) != sizes.end() &&
        std::find(sweep.seeds.begin(), sweep.seeds.end(), r.seed) != sweep.seeds.end()) {
      wanted.push_back(r);
    }
  }
  return fit_sweep(wanted, sweep.exclude_at_most);
}

SweepOutcome fit_sweep(const std::vector<SweepRecord>& records, std::size_t exclude_at_most) {
  SweepOutcome out;
  out.records = records;
  out.best = best_per_size(records);
  std::vector<FitPoint> pn, j0, ratio;
  std::vector<ExcludedPoint> xpn, xj0, xratio;
  const std::string reason = "N <= " + std::to_string(exclude_at_most);
  for (const auto& r : out.best) {
    const FitPoint a{r.nu, r.precision};
    const FitPoint b{static_cast<double>(r.n_sites), r.j0()};
    const FitPoint c{static_cast<double>(r.n_sites), r.j_last / r.j_max};
    if (r.n_sites > exclude_at_most) {
      pn.push_back(a);
      j0.push_back(b);
      ratio.push_back(c);
    } else {
      xpn.push_back({a, reason});
      xj0.push_back({b, reason});
      xratio.push_back({c, reason});
    }
    if (!(r.prt_lower <= r.precision && r.precision <= r.prt_upper)) out.prt_satisfied = false;
  }
  out.precision_vs_resolution = try_fit(pn, xpn);
  out.j0_vs_n = try_fit(j0, xj0);
  out.end_ratio_vs_n = try_fit(ratio, xratio);
  for (std::size_t k = 0; k < out.best.size(); ++k) {
    std::vector<FitPoint> tail;
    for (std::size_t i = k; i < out.best.size(); ++i) {
      tail.push_back({out.best[i].nu, out.best[i].precision});
    }
    if (tail.size() < 3) break;
    out.exclusion_trace.emplace_back(out.best[k].n_sites, fit_power_law(tail).exponent);
  }
  return out;
}

Json to_json(const FitResult& fit) {
  Json used = Json::array();
  for (const auto& p : fit.points_used) used.push_back({p.x, p.y});
  Json excluded = Json::array();
  for (const auto& e : fit.excluded) {
    excluded.push_back({{"x", e.point.x}, {"y", e.point.y}, {"reason", e.reason}});
  }
  return {{"exponent", fit.exponent},
          {"prefactor", fit.prefactor},
          {"r_squared", fit.r_squared},
          {"points_used", used},
          {"excluded", excluded}};
}

Json to_json(const SweepOutcome& o) {
  auto fit_or_null = [](const std::optional<FitResult>& f) {
    return f ? to_json(*f) : Json(nullptr);
  };
  Json best = Json::array();
  for (const auto& r : o.best) {
    best.push_back({{"n_sites", r.n_sites},
                    {"seed", r.seed},
                    {"nu", r.nu},
                    {"precision", r.precision},
                    {"prt_lower", r.prt_lower},
                    {"prt_upper", r.prt_upper},
                    {"j0", r.j0()},
                    {"j_last", r.j_last},
                    {"j_prev", r.j_prev},
                    {"j_max", r.j_max},
                    {"params", r.params}});
  }
  Json trace = Json::array();
  for (const auto& [n, b] : o.exclusion_trace) trace.push_back({{"n_min", n}, {"exponent", b}});
  return {{"kind", "sweep"},
          {"records", o.records.size()},
          {"best", best},
          {"precision_vs_resolution", fit_or_null(o.precision_vs_resolution)},
          {"j0_vs_n", fit_or_null(o.j0_vs_n)},
          {"end_ratio_vs_n", fit_or_null(o.end_ratio_vs_n)},
          {"exclusion_trace", trace},
          {"prt_satisfied", o.prt_satisfied}};
}

Json to_json(const QuenchSweep& s) {
  Json points = Json::array();
  for (const auto& p : s.points) {
    points.push_back({{"t_dc", p.t_dc},
                      {"n_eff", p.n_eff ? Json(*p.n_eff) : Json(nullptr)},
                      {"mu", p.mu},
                      {"absorbed", p.absorbed},
                      {"trapped", p.trapped}});
  }
  return {{"n_sites", s.n_sites},
          {"baseline", s.baseline},
          {"baseline_mu", s.baseline_mu},
          {"horizon", s.horizon},
          {"plateau_onset", s.plateau_onset ? Json(*s.plateau_onset) : Json(nullptr)},
          {"onset_ratio", s.plateau_onset ? Json(s.onset_ratio()) : Json(nullptr)},
          {"points", points}};
}

}  // namespace chainclock
