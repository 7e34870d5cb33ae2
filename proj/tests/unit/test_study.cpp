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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

#include "chainclock/errors.hpp"
#include "chainclock/study.hpp"

using namespace chainclock;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "chainclock_test_study" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

io::Json minimal_config() {
  return io::Json::parse(R"({
    "version": 1,
    "chain": {"n_sites": 12, "gamma": 1.0, "profile": {"kind": "pst", "j0": 0.1}}
  })");
}

}  // namespace

TEST_CASE("power-law fit") {
  std::vector<FitPoint> exact;
  for (int i = 1; i <= 10; ++i) exact.push_back({double(i), 3.0 * std::pow(double(i), -2.0)});
  const auto f = fit_power_law(exact);
  CHECK(std::abs(f.exponent + 2.0) < 1e-12);
  CHECK(std::abs(f.prefactor - 3.0) < 1e-11);
  CHECK(std::abs(f.r_squared - 1.0) < 1e-12);
  CHECK(f.points_used == exact);

  CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, 0.5}}), InvalidInput);
  CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(fit_power_law({{-1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}}), InvalidInput);
}

TEST_CASE("power-law fit recovers the exponent under 5% multiplicative noise") {
  // 200 synthetic datasets over two decades of x; the OLS slope is unbiased
  // with standard error ~ 0.05 / sqrt(sum (log x - mean)^2) ~ 0.02.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.05);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<FitPoint> pts;
    for (double n : {20.0, 30.0, 50.0, 80.0, 120.0, 200.0, 300.0, 600.0, 1000.0, 2000.0}) {
      const double nu = 1.0 / n;
      pts.push_back({nu, 0.3 * std::pow(nu, -2.0) * (1.0 + noise(rng))});
    }
    worst = std::max(worst, std::abs(fit_power_law(pts).exponent + 2.0));
  }
  CHECK(worst < 0.1);
}

TEST_CASE("sweep records survive a csv round trip") {
  DEConfig c;
  c.population = 6;
  c.generations = 3;
  c.tail_count = 2;
  c.seed = 5;
  const auto result = optimize(8, c);
  const auto record = make_record(8, 5, c, result, 1.25);
  CHECK(record.n_sites == 8);
  CHECK(record.j_last == result.couplings.back());
  CHECK(record.j_prev == result.couplings[result.couplings.size() - 2]);
  CHECK(record.spec() == result.spec());

  auto parsed = parse_record(format_record(record));
  parsed.wall_time_s = record.wall_time_s;
  CHECK(parsed == record);

  CHECK_THROWS_AS(parse_record("1,2,3"), ConfigError);
  auto line = format_record(record);
  line.replace(line.find(','), 1, ",x");
  CHECK_THROWS_AS(parse_record(line), ConfigError);

  SUBCASE("store appends, reloads and deduplicates by (N, seed)") {
    const auto dir = fresh_dir("store");
    const ResultStore store(dir);
    CHECK(store.load().empty());
    store.append(record);
    auto other = record;
    other.seed = 6;
    other.cost = record.cost * 0.5;
    store.append(other);
    const auto loaded = store.load();
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0] == record);
    CHECK(loaded[1] == other);
    CHECK(store.contains(8, 5));
    CHECK_FALSE(store.contains(8, 7));
    const auto best = best_per_size(loaded);
    REQUIRE(best.size() == 1);
    CHECK(best[0].seed == 6);
    const auto header = slurp(store.records_path()).substr(0, 60);
    CHECK(header.rfind("n_sites,seed,tail_count,cost,nu,precision", 0) == 0);
  }
}

TEST_CASE("run config parsing is strict and versioned") {
  const auto c = parse_run_config(minimal_config());
  REQUIRE(c.chain);
  CHECK(c.chain->n_sites == 12);
  CHECK(c.optimizer == DEConfig{});
  CHECK(c.threads == 1);

  auto j = minimal_config();
  j.erase("version");
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
  j = minimal_config();
  j["version"] = 2;
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
  j = minimal_config();
  j["colour"] = "blue";
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
  j = minimal_config();
  j["chain"]["profile"]["jO"] = 1.0;
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
  j = minimal_config();
  j["optimizer"] = {{"populaton", 10}};
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
  j = minimal_config();
  j["optimizer"] = {{"population", "ten"}};
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
  j = minimal_config();
  j["chain"]["profile"] = {{"kind", "pst_tail"}, {"j0", 0.1}, {"tail", io::Json::array()}};
  CHECK_NOTHROW(parse_run_config(j));
  j["chain"]["profile"]["kind"] = "spiral";
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
  CHECK_THROWS_AS(parse_run_config(io::Json::array()), ConfigError);

  SUBCASE("round trip") {
    auto full = minimal_config();
    full["optimizer"] = {{"population", 12}, {"seed", 9}, {"window", 30.0}};
    full["sweep"] = {{"n_values", {10, 20}}, {"seeds", {1, 2}}};
    full["quench"] = {{"tdc_points", 20}};
    full["analysis"] = {{"window", {{"mode", "absolute"}, {"value", 50.0}}}};
    full["threads"] = 2;
    const auto parsed = parse_run_config(full);
    const auto again = parse_run_config(to_json(parsed));
    CHECK(to_json(again) == to_json(parsed));
    CHECK(again.optimizer == parsed.optimizer);
    CHECK(again.optimizer.window == 30.0);
    CHECK(again.sweep.n_values == std::vector<std::size_t>{10, 20});
  }
}

TEST_CASE("serialized optimization results are lossless") {
  DEConfig c;
  c.population = 6;
  c.generations = 2;
  c.tail_count = 1;
  const auto r = optimize(6, c);
  const auto text = io::to_json(r).dump();
  CHECK(io::optimization_result_from_json(io::Json::parse(text), "r") == r);
  CHECK(io::de_config_from_json(io::to_json(c), "c") == c);
}

TEST_CASE("sweep tables do not depend on the thread count") {
  SweepConfig sweep;
  sweep.n_values = {6, 8};
  sweep.seeds = {1, 2};
  sweep.exclude_at_most = 0;
  DEConfig c;
  c.population = 8;
  c.generations = 6;
  c.tail_count = 2;
  const ResultStore one(fresh_dir("threads1")), three(fresh_dir("threads3"));
  const auto a = run_sweep(sweep, c, one, 1);
  const auto b = run_sweep(sweep, c, three, 3);
  CHECK(slurp(one.records_path()) == slurp(three.records_path()));
  CHECK(a.records.size() == 4);
  CHECK(a.best.size() == 2);

  SUBCASE("rerunning skips completed jobs") {
    int calls = 0;
    run_sweep(sweep, c, one, 1, [&](const SweepRecord&) { ++calls; });
    CHECK(calls == 0);
    CHECK(one.load().size() == 4);
  }
}

TEST_CASE("svg output") {
  PlotSpec p;
  p.title = "survival <&>";
  p.log_y = true;
  p.series.push_back({"S(t)", {0.0, 1.0, 2.0}, {1.0, 0.5, 0.25}});
  p.vertical_markers = {1.5};
  const auto svg = render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("survival &lt;&amp;&gt;") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);

  ChainConfig chain;
  chain.n_sites = 6;
  chain.profile.j0 = 0.3;
  const auto report = analyze(chain, AnalysisConfig{});
  REQUIRE(report.statistics);
  const auto json = to_json(report);
  CHECK(json["kind"] == "analysis");
  CHECK(plot_from_report(json) == render_svg(analysis_plot(report)));
  CHECK_THROWS_AS(plot_from_report(io::Json{{"kind", "nothing"}}), ConfigError);
}
