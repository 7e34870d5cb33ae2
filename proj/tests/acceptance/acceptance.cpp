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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   acceptance [--group fast|batch|all] [--only NAME] [--threads N] [--work-dir DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracle.hpp"

#include "chainclock/errors.hpp"
#include "chainclock/quench.hpp"
#include "chainclock/spectral.hpp"
#include "chainclock/study.hpp"

using namespace chainclock;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  std::string group = "fast";
  std::string only;
  std::size_t threads = 1;
  fs::path work_dir = fs::temp_directory_path() / "chainclock_acceptance";
};

Options g_options;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ChainSpec reference_chain() {
  CouplingProfile p;
  p.kind = ProfileKind::kPstWithTailOverrides;
  p.j0 = 0.0172;
  p.tail_count = 4;
  p.tail_overrides = {0.245, 0.243, 0.255, 0.367};
  return expand_profile(p, 50, 1.0);
}

// ---------------------------------------------------------------------------

Outcome reference_chain_regression() {
  const auto start = std::chrono::steady_clock::now();
  const auto st = tick_statistics(decompose_effective(reference_chain()));
  const double wall = seconds_since(start);
  const double d_nu = rel(st.resolution, 1.22e-2);
  const double d_n = rel(st.precision, 361.62);
  return {d_nu <= 0.02 && d_n <= 0.02 && wall < 1.0,
          fmt("nu=%.6g (%.2f%% off 1.22e-2), precision=%.6g (%.2f%% off 361.62), %.3fs",
              st.resolution, 100 * d_nu, st.precision, 100 * d_n, wall)};
}

Outcome perfect_transfer_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 1.0;
  std::string per_n;
  for (std::size_t n : {4u, 6u, 10u, 50u}) {
    const double j0 = 1.0 / static_cast<double>(n);
    const ChainSpec spec(pst_couplings(n, j0), 0.0);
    const double t = std::numbers::pi / (2.0 * j0);
    const double spectral = fidelity(decompose_hermitian(build_xx_matrix(spec)), t);
    const double direct = fidelity_direct(spec, t);
    worst = std::min({worst, spectral, direct});
    per_n += fmt(" N=%zu:1-F=%.1e", n, 1.0 - std::min(spectral, direct));
  }
  const double wall = seconds_since(start);
  return {worst >= 1.0 - 1e-8 && wall < 1.0, fmt("min F=%.12f;%s, %.3fs", worst, per_n.c_str(), wall)};
}

Outcome moment_quadrature_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  struct Case {
    std::string name;
    ChainSpec spec;
  };
  std::vector<Case> cases;
  for (std::size_t n : {2u, 10u, 50u, 100u}) {
    cases.push_back({fmt("pst%zu", n), ChainSpec(pst_couplings(n, 1.0 / n), 1.0)});
    cases.push_back({fmt("uniform%zu", n), ChainSpec(std::vector<double>(n - 1, 0.5), 1.0)});
  }
  cases.push_back({"reference50", reference_chain()});

  double worst = 0.0;
  std::string worst_case;
  std::size_t asymptotic_checked = 0;
  for (const auto& c : cases) {
    const auto s = decompose_effective(c.spec);
    if (s.degenerate) return {false, c.name + ": degenerate spectrum, no closed form"};
    oracle::DenseEvolution ev(c.spec.couplings(), c.spec.gamma());
    auto track = [&](double got, double want, const std::string& what) {
      const double e = rel(got, want);
      if (e > worst) {
        worst = e;
        worst_case = c.name + " " + what;
      }
    };
    // Windowed moments at the default horizon 2 mu_inf.
    const double horizon = 2.0 * survival_moment(s, 1);
    const auto ref = oracle::windowed_moments(ev, horizon);
    track(moment(s, 1, horizon), ref.mu, "mu(H)");
    track(moment(s, 2, horizon), ref.t2, "t2(H)");
    // Unconditional moments where the slowest mode decays fast enough to be
    // integrated out: 2 min |Im eps| >= 1e-3.
    const double slowest = 2.0 * s.eigenvalues.imag().cwiseAbs().minCoeff();
    if (slowest >= 1e-3) {
      const auto inf = oracle::asymptotic_moments(ev);
      track(survival_moment(s, 1), inf.mu, "mu(inf)");
      track(survival_moment(s, 2), inf.t2, "t2(inf)");
      ++asymptotic_checked;
    }
  }
  const double wall = seconds_since(start);
  return {worst <= 1e-6 && wall < 30.0,
          fmt("%zu specs (%zu also unwindowed), max rel err %.2e at %s, %.1fs", cases.size(),
              asymptotic_checked, worst, worst_case.c_str(), wall)};
}

Outcome paired_pdf_equivalence() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 1.5);
  double worst = 0.0;
  std::size_t specs = 0, overdamped = 0;
  for (std::size_t n : {10u, 50u}) {
    // PST at j0 = 1/N is overdamped and carries self-paired imaginary modes.
    std::vector<ChainSpec> list = {ChainSpec(pst_couplings(n, 1.0 / n), 1.0),
                                   ChainSpec(std::vector<double>(n - 1, 0.5), 1.0)};
    std::vector<double> random(n - 1);
    for (auto& x : random) x = u(rng);
    list.emplace_back(random, 1.0);
    if (n == 50) list.push_back(reference_chain());
    for (const auto& spec : list) {
      const auto s = decompose_effective(spec);
      const PairedTickPdf paired(s);
      if (pair_modes(s, 1e-8, true).size() * 2 != s.size()) ++overdamped;
      double t_end = 4.0 * static_cast<double>(n);
      try {
        t_end = 2.0 * survival_moment(s, 1);
      } catch (const ImproperDistribution&) {
        // Localized slow modes: no finite mean, use a fixed horizon.
      }
      for (int i = 0; i < 1000; ++i) {
        const double t = t_end * i / 999.0;
        worst = std::max(worst, std::abs(paired(t, spec.gamma()) - tick_pdf(s, t, spec.gamma())));
      }
      ++specs;
    }
  }
  std::size_t refused = 0;
  for (std::size_t n : {9u, 51u}) {
    const auto s = decompose_effective(ChainSpec(pst_couplings(n, 1.0 / n), 1.0));
    try {
      tick_pdf_paired(s, 1.0, 1.0);
    } catch (const UnsupportedInput&) {
      ++refused;
    }
  }
  return {worst <= 1e-8 && refused == 2,
          fmt("%zu even specs x 1000 points (%zu with overdamped modes), max |paired - full| = "
              "%.2e; odd N refused %zu/2",
              specs, overdamped, worst, refused)};
}

Outcome spectral_symmetry() {
  std::mt19937_64 rng(20260);
  std::uniform_int_distribution<std::size_t> size(2, 60);
  std::uniform_real_distribution<double> coupling(0.1, 2.0);
  std::uniform_real_distribution<double> log_gamma(std::log(0.1), std::log(10.0));
  double eig = 0, bio = 0, vec = 0, residue = 0;
  std::size_t degenerate = 0, improper = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = size(rng);
    std::vector<double> j(n - 1);
    for (auto& x : j) x = coupling(rng);
    const ChainSpec spec(j, std::exp(log_gamma(rng)));
    const auto s = decompose_effective(spec);
    if (s.degenerate) {
      ++degenerate;
      continue;
    }
    eig = std::max(eig, eigenvalue_pairing_defect(s));
    bio = std::max(bio, biorthogonality_defect(s));
    vec = std::max(vec, eigenvector_pairing_defect(s));
    // Localized modes can decay too slowly for the unwindowed moments to
    // exist; those specs are checked at a finite horizon only.
    const double gamma = spec.gamma();
    double horizon = 4.0 * static_cast<double>(n) * std::max(gamma, 1.0 / gamma);
    std::vector<double> horizons;
    try {
      horizon = 2.0 * survival_moment(s, 1);
      horizons.push_back(std::numeric_limits<double>::infinity());
    } catch (const ImproperDistribution&) {
      ++improper;
    }
    horizons.push_back(horizon);
    for (int m : {1, 2}) {
      for (double h : horizons) {
        const auto z = survival_moment_sum(s, m, h);
        residue = std::max(residue, std::abs(z.imag()) / std::max(1.0, std::abs(z.real())));
      }
    }
  }
  return {eig <= 1e-8 && bio <= 1e-8 && vec <= 1e-7 && residue < 1e-10 && degenerate == 0,
          fmt("50 specs: eigenvalue pairing %.1e, biorthogonality %.1e, eigenvector pairing "
              "%.1e, moment imaginary residue %.1e (relative), degenerate %zu, windowed-only %zu",
              eig, bio, vec, residue, degenerate, improper)};
}

// ---- optimization batch ---------------------------------------------------

const std::vector<std::size_t> kSweepSizes = {20, 30, 50, 80, 120, 200, 300};
const std::vector<std::uint64_t> kSeeds = {1, 2, 3};

const SweepOutcome& scaling_sweep() {
  static std::optional<SweepOutcome> cached;
  if (cached) return *cached;
  const auto dir = g_options.work_dir / "sweep";
  fs::remove_all(dir);
  fs::create_directories(dir);
  SweepConfig sweep;
  sweep.n_values = kSweepSizes;
  sweep.seeds = kSeeds;
  sweep.exclude_at_most = 10;
  cached = run_sweep(sweep, DEConfig{}, ResultStore(dir), g_options.threads,
                     [](const SweepRecord& r) {
                       std::fprintf(stderr, "  sweep N=%zu seed=%llu nu=%.6g precision=%.6g (%.0fs)\n",
                                    r.n_sites, static_cast<unsigned long long>(r.seed), r.nu,
                                    r.precision, r.wall_time_s);
                     });
  return *cached;
}

// Best of the three seeds for (N, o), optimized in parallel.
std::vector<SweepRecord> best_runs(const std::vector<std::pair<std::size_t, std::size_t>>& jobs) {
  struct Run {
    std::size_t n, tail;
    std::uint64_t seed;
  };
  std::vector<Run> runs;
  for (auto [n, tail] : jobs) {
    for (auto seed : kSeeds) runs.push_back({n, tail, seed});
  }
  std::vector<SweepRecord> records(runs.size());
  parallel_for(runs.size(), g_options.threads, [&](std::size_t i) {
    DEConfig c;
    c.tail_count = runs[i].tail;
    c.seed = runs[i].seed;
    const auto start = std::chrono::steady_clock::now();
    const auto r = optimize(runs[i].n, c);
    records[i] = make_record(runs[i].n, runs[i].seed, c, r, seconds_since(start));
  });
  std::vector<SweepRecord> best;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto first = records.begin() + static_cast<std::ptrdiff_t>(3 * k);
    best.push_back(*std::min_element(first, first + 3, [](const auto& a, const auto& b) {
      return a.cost < b.cost;
    }));
  }
  return best;
}

Outcome precision_resolution_scaling() {
  const auto start = std::chrono::steady_clock::now();
  const auto& o = scaling_sweep();
  if (!o.precision_vs_resolution) return {false, "fit needs at least 3 sizes"};
  const double b = o.precision_vs_resolution->exponent;
  bool all_records_prt = true;
  for (const auto& r : o.records) {
    if (!(r.prt_lower <= r.precision && r.precision <= r.prt_upper)) all_records_prt = false;
  }
  std::string points;
  for (const auto& r : o.best) points += fmt(" %zu:(%.4g,%.4g)", r.n_sites, r.nu, r.precision);
  return {std::abs(b + 2.0) <= 0.3 && o.prt_satisfied,
          fmt("b=%.4f (r^2 %.4f), PRT region: best points %s, all %zu runs %s;%s, %.0fs", b,
              o.precision_vs_resolution->r_squared, o.prt_satisfied ? "inside" : "OUTSIDE",
              o.records.size(), all_records_prt ? "inside" : "OUTSIDE", points.c_str(),
              seconds_since(start))};
}

Outcome coupling_scaling() {
  const auto& o = scaling_sweep();
  if (!o.j0_vs_n || !o.end_ratio_vs_n) return {false, "fit needs at least 3 sizes"};
  const double a = o.j0_vs_n->exponent;
  const double c = o.end_ratio_vs_n->exponent;
  std::size_t ordered = 0;
  for (const auto& r : o.best) ordered += r.j_last > r.j_prev ? 1 : 0;
  std::size_t ordered_all = 0;
  for (const auto& r : o.records) ordered_all += r.j_last > r.j_prev ? 1 : 0;
  return {std::abs(a + 0.49) <= 0.1 && std::abs(c + 0.50) <= 0.1 && ordered == o.best.size(),
          fmt("J0 ~ N^%.4f, J_{N-1}/J_max ~ N^%.4f, J_{N-1} > J_{N-2} in %zu/%zu best "
              "(%zu/%zu runs)",
              a, c, ordered, o.best.size(), ordered_all, o.records.size())};
}

Outcome tail_count_trend() {
  const auto start = std::chrono::steady_clock::now();
  const auto best = best_runs({{40, 1}, {40, 2}, {40, 3}, {40, 4}});
  std::vector<double> late, nu, prec;
  std::string detail;
  for (std::size_t o = 0; o < 4; ++o) {
    const auto st = tick_statistics(decompose_effective(best[o].spec()));
    late.push_back(survival(decompose_effective(best[o].spec()), 2.0 * st.mu));
    nu.push_back(st.resolution);
    prec.push_back(st.precision);
    detail += fmt(" o=%zu: S(2mu)=%.3e nu=%.5f prec=%.2f;", o + 1, late.back(), nu.back(),
                  prec.back());
  }
  bool decreasing = true;
  for (std::size_t o = 1; o < 4; ++o) decreasing = decreasing && late[o] < late[o - 1];
  const double ratio = nu[3] / nu[2] - 1.0;
  return {decreasing && prec[3] > prec[2] && std::abs(ratio) < 0.15,
          fmt("%s S(2mu) %s, nu(4)/nu(3)-1=%.4f, %.0fs", detail.c_str(),
              decreasing ? "decreasing" : "NOT decreasing", ratio, seconds_since(start))};
}

Outcome quench_plateau() {
  const auto start = std::chrono::steady_clock::now();
  QuenchOptions options;
  options.threads = g_options.threads;
  const auto ref = sweep_quench(reference_chain(), options);
  const bool early = ref.plateau_onset && *ref.plateau_onset < ref.baseline_mu / 3.0;

  std::map<std::size_t, ChainSpec> specs;
  for (const auto& r : scaling_sweep().best) {
    if (r.n_sites == 20 || r.n_sites == 50 || r.n_sites == 200) specs.emplace(r.n_sites, r.spec());
  }
  for (const auto& r : best_runs({{100, 4}})) specs.emplace(r.n_sites, r.spec());

  std::vector<FitPoint> points;
  std::string detail;
  for (const auto& [n, spec] : specs) {
    const auto s = sweep_quench(spec, options);
    if (!s.plateau_onset) return {false, fmt("N=%zu: no plateau onset on the grid", n)};
    points.push_back({static_cast<double>(n), s.onset_ratio()});
    detail += fmt(" N=%zu:%.4f", n, s.onset_ratio());
  }
  if (points.size() < 4) return {false, "missing optimized chains for the onset fit"};
  const auto fit = fit_power_law(points);
  return {early && std::abs(fit.exponent + 0.5) <= 0.15,
          fmt("reference chain onset %.4g vs mu/3 = %.4g (plateau %s); onset/mu:%s -> exponent "
              "%.4f, %.0fs",
              ref.plateau_onset.value_or(std::nan("")), ref.baseline_mu / 3.0,
              early ? "reached" : "NOT reached", detail.c_str(), fit.exponent,
              seconds_since(start))};
}

// ---- fast properties ------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  DEConfig c;
  c.population = 12;
  c.generations = 30;
  c.seed = 77;
  const std::size_t n = 12;
  const auto reference = optimize(n, c);
  bool threads_equal = true;
  for (std::size_t t : {2u, 4u}) {
    OptimizeOptions o;
    o.threads = t;
    threads_equal = threads_equal && optimize(n, c, o) == reference;
  }

  const auto dir = g_options.work_dir / "determinism";
  fs::remove_all(dir);
  SweepConfig sweep;
  sweep.n_values = {8, 10};
  sweep.seeds = {1, 2};
  DEConfig small = c;
  small.generations = 10;
  const ResultStore one(dir / "t1"), four(dir / "t4");
  fs::create_directories(one.dir());
  fs::create_directories(four.dir());
  run_sweep(sweep, small, one, 1);
  run_sweep(sweep, small, four, 4);
  const bool csv_equal = slurp(one.records_path()) == slurp(four.records_path());

  bool resume_equal = true;
  for (std::size_t stop : {1u, 13u, 29u}) {
    OptimizeOptions first;
    first.checkpoint_path = dir / fmt("checkpoint_%zu.json", stop);
    first.stop_after = stop;
    optimize(n, c, first);
    OptimizeOptions second;
    second.resume = read_checkpoint(*first.checkpoint_path);
    second.threads = 3;
    resume_equal = resume_equal && optimize(n, c, second) == reference;
  }
  return {threads_equal && csv_equal && resume_equal,
          fmt("OptimizationResult identical at 1/2/4 threads: %s; sweep CSV identical at 1/4 "
              "threads: %s; resume after 1/13/29 generations equals uninterrupted: %s",
              threads_equal ? "yes" : "NO", csv_equal ? "yes" : "NO",
              resume_equal ? "yes" : "NO")};
}

Outcome de_monotonicity() {
  std::mt19937_64 rng(31337);
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto integer = [&](std::size_t a, std::size_t b) {
    return std::uniform_int_distribution<std::size_t>(a, b)(rng);
  };
  std::size_t monotone = 0, checked_generations = 0;
  for (int run = 0; run < 20; ++run) {
    const std::size_t n = integer(5, 14);
    DEConfig c;
    c.population = integer(5, 16);
    c.mutation_factor = uniform(0.2, 1.2);
    c.crossover_rate = uniform(0.0, 1.0);
    c.generations = integer(5, 20);
    c.tail_count = integer(1, std::min<std::size_t>(4, n - 2));
    c.seed = rng();
    const auto r = optimize(n, c);
    bool ok = r.cost_trace.size() == c.generations + 1;
    for (std::size_t g = 1; g < r.cost_trace.size(); ++g) {
      ok = ok && r.cost_trace[g] <= r.cost_trace[g - 1];
      ++checked_generations;
    }
    monotone += ok ? 1 : 0;
  }

  std::size_t ties_kept = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double cost = i % 10 == 0 ? inf : uniform(0.0, 100.0);
    const Candidate incumbent{{uniform(0, 1)}, cost};
    const Candidate trial{{uniform(0, 1)}, cost};
    ties_kept += &select(trial, incumbent) == &incumbent ? 1 : 0;
  }
  return {monotone == 20 && ties_kept == 100,
          fmt("%zu/20 runs non-increasing over %zu generations; %zu/100 ties kept the incumbent",
              monotone, checked_generations, ties_kept)};
}

struct Criterion {
  const char* name;
  bool batch;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"reference_chain_regression", false, reference_chain_regression},
    {"perfect_transfer_fidelity", false, perfect_transfer_fidelity},
    {"moment_quadrature_equivalence", false, moment_quadrature_equivalence},
    {"paired_pdf_equivalence", false, paired_pdf_equivalence},
    {"spectral_symmetry", false, spectral_symmetry},
    {"precision_resolution_scaling", true, precision_resolution_scaling},
    {"coupling_scaling", true, coupling_scaling},
    {"tail_count_trend", true, tail_count_trend},
    {"quench_plateau", true, quench_plateau},
    {"determinism", false, determinism},
    {"de_monotonicity", false, de_monotonicity},
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "%s needs a value\n", arg.c_str());
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--group") {
      g_options.group = value();
    } else if (arg == "--only") {
      g_options.only = value();
    } else if (arg == "--threads") {
      g_options.threads = std::stoul(value());
    } else if (arg == "--work-dir") {
      g_options.work_dir = value();
    } else {
      std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
      return 2;
    }
  }
  if (g_options.threads == 0) g_options.threads = std::max(1u, std::thread::hardware_concurrency());
  fs::create_directories(g_options.work_dir);

  int failures = 0, ran = 0;
  for (std::size_t k = 0; k < std::size(kCriteria); ++k) {
    const auto& c = kCriteria[k];
    if (!g_options.only.empty() && g_options.only != c.name) continue;
    if (g_options.only.empty() && g_options.group == "fast" && c.batch) continue;
    if (g_options.only.empty() && g_options.group == "batch" && !c.batch) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ++ran;
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 && ran > 0 ? 0 : 1;
}
