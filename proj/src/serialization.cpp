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

#include "chainclock/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace chainclock::io {

StrictObject::StrictObject(const Json& json, std::string context)
    : json_(json), context_(std::move(context)) {
  if (!json_.is_object()) throw ConfigError(context_ + ": expected an object");
}

const Json& StrictObject::at(const std::string& key) {
  if (!json_.contains(key)) throw ConfigError(path(key) + ": missing required key");
  seen_.insert(key);
  return json_.at(key);
}

std::string StrictObject::path(const std::string& key) const {
  return context_.empty() ? key : context_ + "." + key;
}

void StrictObject::finish() const {
  for (const auto& [key, value] : json_.items()) {
    if (!seen_.contains(key)) throw ConfigError(path(key) + ": unknown key");
  }
}

Json number_or_null(double value) {
  if (std::isfinite(value)) return value;
  if (std::isnan(value)) throw InvalidInput("cannot serialize NaN");
  if (value < 0) throw InvalidInput("cannot serialize -inf");
  return nullptr;
}

double number_or_infinity(const Json& value, const std::string& context) {
  if (value.is_null()) return std::numeric_limits<double>::infinity();
  if (!value.is_number()) throw ConfigError(context + ": expected a number or null");
  return value.get<double>();
}

Json to_json(const StatisticsWindow& window) {
  switch (window.mode) {
    case StatisticsWindow::Mode::kAsymptotic:
      return {{"mode", "asymptotic"}};
    case StatisticsWindow::Mode::kRelative:
      return {{"mode", "relative"}, {"value", window.value}};
    case StatisticsWindow::Mode::kAbsolute:
      return {{"mode", "absolute"}, {"value", window.value}};
  }
  throw InvalidInput("unknown statistics window mode");
}

StatisticsWindow statistics_window_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  const auto mode = obj.required<std::string>("mode");
  StatisticsWindow window;
  if (mode == "asymptotic") {
    window = StatisticsWindow::asymptotic();
  } else if (mode == "relative") {
    window = StatisticsWindow::relative(obj.required<double>("value"));
  } else if (mode == "absolute") {
    window = StatisticsWindow::absolute(obj.required<double>("value"));
  } else {
    throw ConfigError(obj.path("mode") + ": expected asymptotic, relative or absolute");
  }
  obj.finish();
  if (window.mode != StatisticsWindow::Mode::kAsymptotic && !(window.value > 0.0)) {
    throw ConfigError(obj.path("value") + ": must be > 0");
  }
  return window;
}

Json to_json(const TickStatistics& s) {
  return {{"mu", s.mu},
          {"t2", s.t2},
          {"variance", s.variance},
          {"precision", s.precision},
          {"resolution", s.resolution},
          {"horizon", number_or_null(s.horizon)},
          {"absorbed", s.absorbed},
          {"mu_asymptotic", std::isnan(s.mu_asymptotic) ? Json(nullptr) : Json(s.mu_asymptotic)},
          {"used_fallback", s.used_fallback}};
}

TickStatistics tick_statistics_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  TickStatistics s;
  s.mu = obj.required<double>("mu");
  s.t2 = obj.required<double>("t2");
  s.variance = obj.required<double>("variance");
  s.precision = obj.required<double>("precision");
  s.resolution = obj.required<double>("resolution");
  s.horizon = number_or_infinity(obj.at("horizon"), obj.path("horizon"));
  s.absorbed = obj.required<double>("absorbed");
  const auto& mu_inf = obj.at("mu_asymptotic");
  s.mu_asymptotic =
      mu_inf.is_null() ? std::numeric_limits<double>::quiet_NaN() : mu_inf.get<double>();
  s.used_fallback = obj.required<bool>("used_fallback");
  obj.finish();
  return s;
}

Json to_json(const DEConfig& c) {
  Json bounds = Json::array();
  for (const auto& b : c.bounds) bounds.push_back({b.low, b.high});
  return {{"population", c.population},
          {"mutation_factor", c.mutation_factor},
          {"crossover_rate", c.crossover_rate},
          {"generations", c.generations},
          {"lambda", c.lambda},
          {"window", c.window ? Json(*c.window) : Json(nullptr)},
          {"window_factor", c.window_factor},
          {"tail_count", c.tail_count},
          {"bounds", bounds},
          {"seed", c.seed},
          {"grid_step", c.grid_step},
          {"gamma", c.gamma},
          {"statistics_window", to_json(c.statistics_window)}};
}

DEConfig de_config_from_json(const Json& json, const std::string& context,
                             const DEConfig& defaults) {
  StrictObject obj(json, context);
  DEConfig c = defaults;
  c.population = obj.optional<std::size_t>("population", c.population);
  c.mutation_factor = obj.optional<double>("mutation_factor", c.mutation_factor);
  c.crossover_rate = obj.optional<double>("crossover_rate", c.crossover_rate);
  c.generations = obj.optional<std::size_t>("generations", c.generations);
  c.lambda = obj.optional<double>("lambda", c.lambda);
  if (obj.has("window")) {
    const auto& w = obj.at("window");
    if (w.is_null()) {
      c.window.reset();
    } else if (w.is_number()) {
      c.window = w.get<double>();
    } else {
      throw ConfigError(obj.path("window") + ": expected a number or null");
    }
  }
  c.window_factor = obj.optional<double>("window_factor", c.window_factor);
  c.tail_count = obj.optional<std::size_t>("tail_count", c.tail_count);
  if (obj.has("bounds")) {
    const auto& b = obj.at("bounds");
    if (!b.is_array()) throw ConfigError(obj.path("bounds") + ": expected an array");
    c.bounds.clear();
    for (const auto& pair : b) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        throw ConfigError(obj.path("bounds") + ": each entry must be [low, high]");
      }
      c.bounds.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
  }
  c.seed = obj.optional<std::uint64_t>("seed", c.seed);
  c.grid_step = obj.optional<double>("grid_step", c.grid_step);
  c.gamma = obj.optional<double>("gamma", c.gamma);
  if (obj.has("statistics_window")) {
    c.statistics_window =
        statistics_window_from_json(obj.at("statistics_window"), obj.path("statistics_window"));
  }
  obj.finish();
  return c;
}

Json to_json(const Candidate& candidate) {
  return {{"params", candidate.params}, {"cost", number_or_null(candidate.cost)}};
}

Candidate candidate_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  Candidate c;
  c.params = obj.required<std::vector<double>>("params");
  c.cost = number_or_infinity(obj.at("cost"), obj.path("cost"));
  obj.finish();
  return c;
}

Json to_json(const OptimizationResult& r) {
  return {{"best", to_json(r.best)},
          {"cost_trace", r.cost_trace},
          {"evaluations", r.evaluations},
          {"generations_completed", r.generations_completed},
          {"complete", r.complete},
          {"statistics", to_json(r.statistics)},
          {"couplings", r.couplings},
          {"gamma", r.gamma}};
}

OptimizationResult optimization_result_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  OptimizationResult r;
  r.best = candidate_from_json(obj.at("best"), obj.path("best"));
  r.cost_trace = obj.required<std::vector<double>>("cost_trace");
  r.evaluations = obj.required<std::size_t>("evaluations");
  r.generations_completed = obj.required<std::size_t>("generations_completed");
  r.complete = obj.required<bool>("complete");
  r.statistics = tick_statistics_from_json(obj.at("statistics"), obj.path("statistics"));
  r.couplings = obj.required<std::vector<double>>("couplings");
  r.gamma = obj.required<double>("gamma");
  obj.finish();
  return r;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& json) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp);
    out << json.dump(2) << '\n';
    if (!out) throw InvalidInput("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace chainclock::io
