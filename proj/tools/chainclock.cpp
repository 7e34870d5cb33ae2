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

// chainclock: command-line driver for analysis, optimization, sweeps and
// quench studies of sink-terminated spin-chain clocks.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chainclock/errors.hpp"
#include "chainclock/spectral.hpp"
#include "chainclock/study.hpp"

namespace fs = std::filesystem;
using namespace chainclock;
using io::Json;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kNumerical = 3, kResume = 4 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::optional<std::string> resume;
  std::optional<std::string> input;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Long format: one row per sample of each series.
void write_series_csv(const fs::path& path, const AnalysisReport& report) {
  std::string text = "series,t,value\n";
  const auto add = [&](const char* name, const TimeSeries& ts) {
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
      text += std::string(name) + "," + num(ts.times[i]) + "," + num(ts.values[i]) + "\n";
    }
  };
  add("survival", report.survival);
  add("tick_pdf", report.tick_pdf);
  add("fidelity", report.fidelity);
  write_text(path, text);
}

void write_quench_csv(const fs::path& path, const std::vector<QuenchSweep>& sweeps) {
  std::string text = "n_sites,t_dc,n_eff,mu,absorbed,trapped,baseline\n";
  for (const auto& s : sweeps) {
    for (const auto& p : s.points) {
      text += std::to_string(s.n_sites) + "," + num(p.t_dc) + "," +
              (p.n_eff ? num(*p.n_eff) : std::string()) + "," + num(p.mu) + "," +
              num(p.absorbed) + "," + num(p.trapped) + "," + num(s.baseline) + "\n";
    }
  }
  write_text(path, text);
}

RunConfig load(const Globals& g) {
  RunConfig c;
  if (!g.config.empty()) {
    c = load_run_config(g.config);
  }
  if (g.seed) {
    c.optimizer.seed = *g.seed;
    c.sweep.seeds = {*g.seed};
  }
  if (g.out) c.out = *g.out;
  if (g.threads) c.threads = std::max<std::size_t>(1, *g.threads);
  fs::create_directories(c.out);
  io::write_json_file((fs::path(c.out) / "config.json").string(), to_json(c));
  return c;
}

const ChainConfig& need_chain(const RunConfig& c) {
  if (!c.chain) throw ConfigError("config.chain: required by this command");
  return *c.chain;
}

int cmd_analyze(const Globals& g) {
  const auto c = load(g);
  const auto report = analyze(need_chain(c), c.analysis);
  io::write_json_file((fs::path(c.out) / "analysis.json").string(), to_json(report));
  write_series_csv(fs::path(c.out) / "series.csv", report);
  if (c.analysis.plot) {
    write_text(fs::path(c.out) / "analysis.svg", render_svg(analysis_plot(report)));
  }
  if (report.statistics) {
    const auto& s = *report.statistics;
    std::printf("N=%zu nu=%.6g precision=%.6g mu=%.6g horizon=%.6g absorbed=%.6f\n",
                report.spec.n_sites(), s.resolution, s.precision, s.mu, s.horizon, s.absorbed);
    if (report.prt) {
      std::printf("PRT bounds [%.6g, %.6g] %s\n", report.prt->lower, report.prt->upper,
                  report.prt->contains(s.precision) ? "satisfied" : "VIOLATED");
    }
  } else {
    std::printf("N=%zu tick statistics unavailable: %s\n", report.spec.n_sites(),
                report.statistics_error->c_str());
  }
  std::printf("fidelity peak %.12f at t=%.6g\n", report.fidelity_peak, report.fidelity_peak_time);
  return kOk;
}

int cmd_optimize(const Globals& g) {
  const auto c = load(g);
  const std::size_t n = need_chain(c).n_sites;
  OptimizeOptions options;
  options.threads = c.threads;
  options.checkpoint_path = fs::path(c.out) / "checkpoint.json";
  if (g.resume) options.resume = read_checkpoint(*g.resume);
  options.on_generation = [](std::size_t gen, double best) {
    if (gen % 50 == 0) std::fprintf(stderr, "generation %zu best cost %.6g\n", gen, best);
  };
  const auto start = std::chrono::steady_clock::now();
  const auto result = optimize(n, c.optimizer, options);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto record = make_record(n, c.optimizer.seed, c.optimizer, result, wall);
  io::write_json_file((fs::path(c.out) / "optimize_result.json").string(),
                      {{"kind", "optimize"},
                       {"n_sites", n},
                       {"config", io::to_json(c.optimizer)},
                       {"result", io::to_json(result)}});
  const ResultStore store(c.out);
  if (store.contains(n, c.optimizer.seed)) {
    std::fprintf(stderr, "records.csv already holds (N=%zu, seed=%llu); not appended\n", n,
                 static_cast<unsigned long long>(c.optimizer.seed));
  } else {
    store.append(record);
  }
  ChainConfig best;
  best.n_sites = n;
  best.gamma = result.gamma;
  best.profile.kind = ProfileKind::kExplicit;
  best.profile.couplings = result.couplings;
  AnalysisConfig view;
  view.window = c.optimizer.statistics_window;
  write_text(fs::path(c.out) / "optimize.svg", render_svg(analysis_plot(analyze(best, view))));
  std::printf("N=%zu cost=%.8g nu=%.6g precision=%.6g params=", n, result.best.cost,
              record.nu, record.precision);
  for (double p : result.best.params) std::printf("%.6g ", p);
  std::printf("%s\n", result.complete ? "" : "(incomplete)");
  return kOk;
}

int cmd_sweep(const Globals& g) {
  const auto c = load(g);
  const ResultStore store(c.out);
  const auto outcome = run_sweep(c.sweep, c.optimizer, store, c.threads, [](const SweepRecord& r) {
    std::fprintf(stderr, "N=%zu seed=%llu nu=%.6g precision=%.6g (%.1fs)\n", r.n_sites,
                 static_cast<unsigned long long>(r.seed), r.nu, r.precision, r.wall_time_s);
  });
  io::write_json_file((fs::path(c.out) / "sweep.json").string(), to_json(outcome));
  write_text(fs::path(c.out) / "sweep.svg", render_svg(sweep_plot(outcome)));
  write_text(fs::path(c.out) / "couplings.svg", render_svg(coupling_scaling_plot(outcome)));
  auto show = [](const char* name, const std::optional<FitResult>& f) {
    if (f) {
      std::printf("%s exponent %.4f (r^2 %.4f, %zu points)\n", name, f->exponent, f->r_squared,
                  f->points_used.size());
    } else {
      std::printf("%s: fewer than 3 points\n", name);
    }
  };
  show("precision vs resolution", outcome.precision_vs_resolution);
  show("J0 vs N", outcome.j0_vs_n);
  show("J_{N-1}/J_max vs N", outcome.end_ratio_vs_n);
  std::printf("PRT region %s\n", outcome.prt_satisfied ? "satisfied" : "VIOLATED");
  return kOk;
}

int cmd_quench(const Globals& g) {
  const auto c = load(g);
  std::vector<ChainSpec> specs;
  for (const auto& path : c.quench.results) {
    const auto json = io::read_json_file(path);
    if (!json.contains("result")) throw ConfigError(path + ": not an optimize result");
    const auto r = io::optimization_result_from_json(json.at("result"), path + ".result");
    specs.push_back(r.spec());
  }
  if (c.quench.store) {
    for (const auto& r : best_per_size(ResultStore(*c.quench.store).load())) {
      specs.push_back(r.spec());
    }
  }
  if (specs.empty()) {
    if (!c.chain) throw ConfigError("config.quench: no results, store or chain to sweep");
    specs.push_back(c.chain->spec());
  }

  QuenchOptions options;
  options.absorbed_floor = c.quench.absorbed_floor;
  options.plateau_fraction = c.quench.plateau_fraction;
  options.threads = c.threads;
  options.window = c.analysis.window;
  std::vector<QuenchSweep> sweeps;
  for (const auto& spec : specs) {
    std::vector<double> grid;
    if (c.quench.tdc) {
      grid = *c.quench.tdc;
    } else {
      const double mu = tick_statistics(decompose_effective(spec), options.window).mu;
      grid = log_grid(c.quench.tdc_lo, c.quench.tdc_hi.value_or(mu), c.quench.tdc_points);
    }
    sweeps.push_back(sweep_quench(spec, grid, options));
    const auto& s = sweeps.back();
    std::printf("N=%zu baseline=%.6g mu=%.6g onset=%s onset/mu=%.4g\n", s.n_sites, s.baseline,
                s.baseline_mu,
                s.plateau_onset ? std::to_string(*s.plateau_onset).c_str() : "none",
                s.onset_ratio());
  }
  Json report = {{"kind", "quench"}, {"sweeps", Json::array()}, {"onset_fit", nullptr}};
  std::vector<FitPoint> onset;
  for (const auto& s : sweeps) {
    report["sweeps"].push_back(to_json(s));
    if (s.plateau_onset) onset.push_back({static_cast<double>(s.n_sites), s.onset_ratio()});
  }
  if (onset.size() >= 3) {
    const auto fit = fit_power_law(onset);
    report["onset_fit"] = to_json(fit);
    std::printf("onset/mu vs N exponent %.4f\n", fit.exponent);
  }
  io::write_json_file((fs::path(c.out) / "quench.json").string(), report);
  write_quench_csv(fs::path(c.out) / "quench.csv", sweeps);
  write_text(fs::path(c.out) / "quench.svg", render_svg(quench_plot(sweeps)));
  return kOk;
}

double record_field(const SweepRecord& r, const std::string& name) {
  if (name == "n_sites") return static_cast<double>(r.n_sites);
  if (name == "nu") return r.nu;
  if (name == "precision") return r.precision;
  if (name == "cost") return r.cost;
  if (name == "j0") return r.j0();
  if (name == "j_last") return r.j_last;
  if (name == "j_prev") return r.j_prev;
  if (name == "j_max") return r.j_max;
  if (name == "end_ratio") return r.j_last / r.j_max;
  if (name == "prt_lower") return r.prt_lower;
  if (name == "prt_upper") return r.prt_upper;
  throw ConfigError("config.fit: unknown column '" + name + "'");
}

int cmd_fit(const Globals& g) {
  auto c = load(g);
  FitConfig fc = c.fit.value_or(FitConfig{});
  if (g.input) fc.input = *g.input;
  if (fc.input.empty()) throw ConfigError("config.fit.input: required (or pass --input)");
  const fs::path input(fc.input);
  const fs::path dir = fs::is_directory(input) ? input : input.parent_path();
  const auto records = best_per_size(ResultStore(dir.empty() ? fs::path(".") : dir).load());
  std::vector<FitPoint> points;
  std::vector<ExcludedPoint> excluded;
  for (const auto& r : records) {
    const FitPoint p{record_field(r, fc.x), record_field(r, fc.y)};
    if (r.n_sites <= fc.exclude_at_most) {
      excluded.push_back({p, "N <= " + std::to_string(fc.exclude_at_most)});
    } else {
      points.push_back(p);
    }
  }
  auto fit = fit_power_law(points);
  fit.excluded = excluded;
  Json report = to_json(fit);
  report["kind"] = "fit";
  report["x"] = fc.x;
  report["y"] = fc.y;
  io::write_json_file((fs::path(c.out) / "fit.json").string(), report);
  std::printf("%s ~ %s^b: b=%.6f prefactor=%.6g r^2=%.6f (%zu points, %zu excluded)\n",
              fc.y.c_str(), fc.x.c_str(), fit.exponent, fit.prefactor, fit.r_squared,
              fit.points_used.size(), fit.excluded.size());
  return kOk;
}

int cmd_plot(const Globals& g) {
  const auto c = load(g);
  std::string input = c.plot ? c.plot->input : "";
  if (g.input) input = *g.input;
  if (input.empty()) throw ConfigError("config.plot.input: required (or pass --input)");
  const auto svg = plot_from_report(io::read_json_file(input));
  const fs::path target = fs::path(c.out) / (fs::path(input).stem().string() + ".svg");
  write_text(target, svg);
  std::printf("wrote %s\n", target.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate, optimize and analyze sink-terminated spin-chain clocks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration (schema version 1)");
  app.add_option("--seed", g.seed, "Optimizer seed (sweep: run only this seed)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads");
  app.add_option("--resume", g.resume, "Resume optimize from a checkpoint file");
  auto* analyze_cmd = app.add_subcommand("analyze", "Tick statistics, series and plot of one chain");
  auto* optimize_cmd = app.add_subcommand("optimize", "Differential-evolution optimization");
  auto* sweep_cmd = app.add_subcommand("sweep", "Optimize over chain lengths and fit scalings");
  auto* quench_cmd = app.add_subcommand("quench", "Effective precision vs decoupling time");
  auto* fit_cmd = app.add_subcommand("fit", "Power-law fit over a sweep result store");
  auto* plot_cmd = app.add_subcommand("plot", "Render the SVG of a report JSON");
  fit_cmd->add_option("--input", g.input, "records.csv or its directory");
  plot_cmd->add_option("--input", g.input, "Report JSON");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(g);
    if (*optimize_cmd) return cmd_optimize(g);
    if (*sweep_cmd) return cmd_sweep(g);
    if (*quench_cmd) return cmd_quench(g);
    if (*fit_cmd) return cmd_fit(g);
    if (*plot_cmd) return cmd_plot(g);
  } catch (const ResumeMismatch& e) {
    std::cerr << "resume mismatch: " << e.what() << '\n';
    return kResume;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
