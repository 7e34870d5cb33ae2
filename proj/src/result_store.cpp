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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "chainclock/errors.hpp"
#include "chainclock/study.hpp"

namespace chainclock {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, const char* column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty()) {
    throw ConfigError(std::string("records.csv: bad value '") + field + "' in column " + column);
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& field, const char* column) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty() || field.front() == '-') {
    throw ConfigError(std::string("records.csv: bad integer '") + field + "' in column " + column);
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string join_header(const std::vector<std::string>& columns) {
  std::string h;
  for (std::size_t i = 0; i < columns.size(); ++i) h += (i ? "," : "") + columns[i];
  return h;
}

const std::string kTimingHeader = "n_sites,seed,wall_time_s";

}  // namespace

FitResult fit_power_law(const std::vector<FitPoint>& points) {
  if (points.size() < 3) throw InvalidInput("fit_power_law: need at least 3 points");
  double sx = 0, sy = 0;
  for (const auto& p : points) {
    if (!(p.x > 0.0) || !(p.y > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InvalidInput("fit_power_law: coordinates must be finite and > 0");
    }
    sx += std::log(p.x);
    sy += std::log(p.y);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : points) {
    const double dx = std::log(p.x) - mx, dy = std::log(p.y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InvalidInput("fit_power_law: x values must not all coincide");
  FitResult fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double r = std::log(p.y) - (my + fit.exponent * (std::log(p.x) - mx));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.points_used = points;
  return fit;
}

ChainSpec SweepRecord::spec() const {
  DEConfig config;
  config.tail_count = tail_count;
  config.gamma = gamma;
  return spec_from_params(params, n_sites, config);
}

SweepRecord make_record(std::size_t n_sites, std::uint64_t seed, const DEConfig& config,
                        const OptimizationResult& result, double wall_time_s) {
  SweepRecord r;
  r.n_sites = n_sites;
  r.seed = seed;
  r.tail_count = config.tail_count;
  r.params = result.best.params;
  r.cost = result.best.cost;
  r.nu = result.statistics.resolution;
  r.precision = result.statistics.precision;
  const auto prt = prt_bounds(result.gamma, r.nu);
  r.prt_lower = prt.lower;
  r.prt_upper = prt.upper;
  const auto& j = result.couplings;
  r.j_last = j.back();
  r.j_prev = j.size() >= 2 ? j[j.size() - 2] : 0.0;
  r.j_max = *std::max_element(j.begin(), j.end());
  r.gamma = result.gamma;
  r.wall_time_s = wall_time_s;
  return r;
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> columns = {
      "n_sites", "seed",   "tail_count", "cost",   "nu",    "precision", "prt_lower",
      "prt_upper", "j0",   "j_last",     "j_prev", "j_max", "gamma",     "params"};
  return columns;
}

std::string format_record(const SweepRecord& r) {
  std::string params;
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    params += (i ? ";" : "") + format_double(r.params[i]);
  }
  std::ostringstream out;
  out << r.n_sites << ',' << r.seed << ',' << r.tail_count << ',' << format_double(r.cost) << ','
      << format_double(r.nu) << ',' << format_double(r.precision) << ','
      << format_double(r.prt_lower) << ',' << format_double(r.prt_upper) << ','
      << format_double(r.j0()) << ',' << format_double(r.j_last) << ','
      << format_double(r.j_prev) << ',' << format_double(r.j_max) << ','
      << format_double(r.gamma) << ',' << params;
  return out.str();
}

SweepRecord parse_record(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != record_columns().size()) {
    throw ConfigError("records.csv: expected " + std::to_string(record_columns().size()) +
                      " columns, got " + std::to_string(f.size()));
  }
  SweepRecord r;
  r.n_sites = parse_unsigned(f[0], "n_sites");
  r.seed = parse_unsigned(f[1], "seed");
  r.tail_count = parse_unsigned(f[2], "tail_count");
  r.cost = parse_double(f[3], "cost");
  r.nu = parse_double(f[4], "nu");
  r.precision = parse_double(f[5], "precision");
  r.prt_lower = parse_double(f[6], "prt_lower");
  r.prt_upper = parse_double(f[7], "prt_upper");
  r.j_last = parse_double(f[9], "j_last");
  r.j_prev = parse_double(f[10], "j_prev");
  r.j_max = parse_double(f[11], "j_max");
  r.gamma = parse_double(f[12], "gamma");
  for (const auto& p : split(f[13], ';')) r.params.push_back(parse_double(p, "params"));
  if (r.params.size() != r.tail_count + 1) {
    throw ConfigError("records.csv: params do not match tail_count");
  }
  if (parse_double(f[8], "j0") != r.j0()) {
    throw ConfigError("records.csv: j0 column disagrees with params");
  }
  return r;
}

ResultStore::ResultStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::vector<SweepRecord> ResultStore::load() const {
  std::vector<SweepRecord> records;
  std::ifstream in(records_path());
  if (!in) return records;
  std::string line;
  if (!std::getline(in, line) || line != join_header(record_columns())) {
    throw ConfigError(records_path().string() + ": unexpected header");
  }
  while (std::getline(in, line)) {
    if (!line.empty()) records.push_back(parse_record(line));
  }
  std::map<std::pair<std::size_t, std::uint64_t>, double> timings;
  std::ifstream tin(timings_path());
  if (tin && std::getline(tin, line)) {
    while (std::getline(tin, line)) {
      const auto f = split(line, ',');
      if (f.size() != 3) throw ConfigError(timings_path().string() + ": malformed line");
      timings[{parse_unsigned(f[0], "n_sites"), parse_unsigned(f[1], "seed")}] =
          parse_double(f[2], "wall_time_s");
    }
  }
  for (auto& r : records) {
    const auto it = timings.find({r.n_sites, r.seed});
    if (it != timings.end()) r.wall_time_s = it->second;
  }
  return records;
}

void ResultStore::append(const SweepRecord& record) const {
  const bool fresh = !std::filesystem::exists(records_path());
  {
    std::ofstream out(records_path(), std::ios::app);
    if (!out) throw InvalidInput("cannot append to " + records_path().string());
    if (fresh) out << join_header(record_columns()) << '\n';
    out << format_record(record) << '\n';
  }
  const bool fresh_timing = !std::filesystem::exists(timings_path());
  std::ofstream out(timings_path(), std::ios::app);
  if (!out) throw InvalidInput("cannot append to " + timings_path().string());
  if (fresh_timing) out << kTimingHeader << '\n';
  out << record.n_sites << ',' << record.seed << ',' << format_double(record.wall_time_s) << '\n';
}

bool ResultStore::contains(std::size_t n_sites, std::uint64_t seed) const {
  for (const auto& r : load()) {
    if (r.n_sites == n_sites && r.seed == seed) return true;
  }
  return false;
}

std::vector<SweepRecord> best_per_size(const std::vector<SweepRecord>& records) {
  std::map<std::size_t, SweepRecord> best;
  for (const auto& r : records) {
    auto it = best.find(r.n_sites);
    if (it == best.end() || r.cost < it->second.cost ||
        (r.cost == it->second.cost && r.seed < it->second.seed)) {
      best.insert_or_assign(r.n_sites, r);
    }
  }
  std::vector<SweepRecord> out;
  for (auto& [n, r] : best) out.push_back(r);
  return out;
}

}  // namespace chainclock
