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

#include "chainclock/errors.hpp"
#include "chainclock/study.hpp"

namespace chainclock {

namespace {

using io::Json;
using io::StrictObject;

std::string profile_kind_name(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::kPst: return "pst";
    case ProfileKind::kPstWithTailOverrides: return "pst_tail";
    case ProfileKind::kUniform: return "uniform";
    case ProfileKind::kExplicit: return "explicit";
  }
  throw InvalidInput("unknown profile kind");
}

AnalysisConfig analysis_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  AnalysisConfig c;
  if (obj.has("window")) {
    c.window = io::statistics_window_from_json(obj.at("window"), obj.path("window"));
  }
  if (obj.has("t_end") && !obj.at("t_end").is_null()) {
    c.t_end = obj.required<double>("t_end");
    if (!(*c.t_end > 0.0)) throw ConfigError(obj.path("t_end") + ": must be > 0");
  }
  c.points_per_unit = obj.optional<double>("points_per_unit", c.points_per_unit);
  if (!(c.points_per_unit > 0.0)) throw ConfigError(obj.path("points_per_unit") + ": must be > 0");
  c.plot = obj.optional<bool>("plot", c.plot);
  obj.finish();
  return c;
}

Json to_json(const AnalysisConfig& c) {
  return {{"window", io::to_json(c.window)},
          {"t_end", c.t_end ? Json(*c.t_end) : Json(nullptr)},
          {"points_per_unit", c.points_per_unit},
          {"plot", c.plot}};
}

SweepConfig sweep_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  SweepConfig c;
  c.n_values = obj.optional<std::vector<std::size_t>>("n_values", c.n_values);
  c.seeds = obj.optional<std::vector<std::uint64_t>>("seeds", c.seeds);
  c.exclude_at_most = obj.optional<std::size_t>("exclude_at_most", c.exclude_at_most);
  obj.finish();
  if (c.n_values.empty() || c.seeds.empty()) {
    throw ConfigError(context + ": n_values and seeds must be non-empty");
  }
  for (auto n : c.n_values) {
    if (n < 3) throw ConfigError(obj.path("n_values") + ": every N must be >= 3");
  }
  return c;
}

Json to_json(const SweepConfig& c) {
  return {{"n_values", c.n_values}, {"seeds", c.seeds}, {"exclude_at_most", c.exclude_at_most}};
}

QuenchConfig quench_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  QuenchConfig c;
  if (obj.has("tdc") && !obj.at("tdc").is_null()) c.tdc = obj.required<std::vector<double>>("tdc");
  c.tdc_lo = obj.optional<double>("tdc_lo", c.tdc_lo);
  if (obj.has("tdc_hi") && !obj.at("tdc_hi").is_null()) c.tdc_hi = obj.required<double>("tdc_hi");
  c.tdc_points = obj.optional<std::size_t>("tdc_points", c.tdc_points);
  c.absorbed_floor = obj.optional<double>("absorbed_floor", c.absorbed_floor);
  c.plateau_fraction = obj.optional<double>("plateau_fraction", c.plateau_fraction);
  c.results = obj.optional<std::vector<std::string>>("results", c.results);
  if (obj.has("store") && !obj.at("store").is_null()) c.store = obj.required<std::string>("store");
  obj.finish();
  if (!(c.tdc_lo > 0.0) || c.tdc_points < 2) {
    throw ConfigError(context + ": tdc_lo must be > 0 and tdc_points >= 2");
  }
  if (!(c.absorbed_floor >= 0.0 && c.absorbed_floor < 1.0)) {
    throw ConfigError(obj.path("absorbed_floor") + ": must be in [0, 1)");
  }
  if (!(c.plateau_fraction > 0.0 && c.plateau_fraction <= 1.0)) {
    throw ConfigError(obj.path("plateau_fraction") + ": must be in (0, 1]");
  }
  return c;
}

Json to_json(const QuenchConfig& c) {
  return {{"tdc", c.tdc ? Json(*c.tdc) : Json(nullptr)},
          {"tdc_lo", c.tdc_lo},
          {"tdc_hi", c.tdc_hi ? Json(*c.tdc_hi) : Json(nullptr)},
          {"tdc_points", c.tdc_points},
          {"absorbed_floor", c.absorbed_floor},
          {"plateau_fraction", c.plateau_fraction},
          {"results", c.results},
          {"store", c.store ? Json(*c.store) : Json(nullptr)}};
}

FitConfig fit_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  FitConfig c;
  c.input = obj.required<std::string>("input");
  c.x = obj.optional<std::string>("x", c.x);
  c.y = obj.optional<std::string>("y", c.y);
  c.exclude_at_most = obj.optional<std::size_t>("exclude_at_most", c.exclude_at_most);
  obj.finish();
  return c;
}

Json to_json(const FitConfig& c) {
  return {{"input", c.input}, {"x", c.x}, {"y", c.y}, {"exclude_at_most", c.exclude_at_most}};
}

}  // namespace

ChainConfig chain_config_from_json(const Json& json, const std::string& context) {
  StrictObject obj(json, context);
  ChainConfig c;
  c.gamma = obj.optional<double>("gamma", c.gamma);
  StrictObject profile(obj.at("profile"), obj.path("profile"));
  const auto kind = profile.required<std::string>("kind");
  auto& p = c.profile;
  if (kind == "pst") {
    p.kind = ProfileKind::kPst;
    p.j0 = profile.required<double>("j0");
  } else if (kind == "pst_tail") {
    p.kind = ProfileKind::kPstWithTailOverrides;
    p.j0 = profile.required<double>("j0");
    p.tail_overrides = profile.required<std::vector<double>>("tail");
    p.tail_count = profile.optional<std::size_t>("tail_count", p.tail_overrides.size());
  } else if (kind == "uniform") {
    p.kind = ProfileKind::kUniform;
    p.j0 = profile.required<double>("j0");
  } else if (kind == "explicit") {
    p.kind = ProfileKind::kExplicit;
    p.couplings = profile.required<std::vector<double>>("couplings");
  } else {
    throw ConfigError(profile.path("kind") + ": expected pst, pst_tail, uniform or explicit");
  }
  profile.finish();
  if (p.kind == ProfileKind::kExplicit) {
    c.n_sites = obj.optional<std::size_t>("n_sites", p.couplings.size() + 1);
  } else {
    c.n_sites = obj.required<std::size_t>("n_sites");
  }
  obj.finish();
  try {
    c.spec();
  } catch (const InvalidInput& e) {
    throw ConfigError(context + ": " + e.what());
  }
  return c;
}

Json to_json(const ChainConfig& c) {
  Json profile = {{"kind", profile_kind_name(c.profile.kind)}};
  switch (c.profile.kind) {
    case ProfileKind::kPstWithTailOverrides:
      profile["tail"] = c.profile.tail_overrides;
      profile["tail_count"] = c.profile.tail_count;
      [[fallthrough]];
    case ProfileKind::kPst:
    case ProfileKind::kUniform:
      profile["j0"] = c.profile.j0;
      break;
    case ProfileKind::kExplicit:
      profile["couplings"] = c.profile.couplings;
      break;
  }
  return {{"n_sites", c.n_sites}, {"gamma", c.gamma}, {"profile", profile}};
}

RunConfig parse_run_config(const Json& json) {
  StrictObject obj(json, "config");
  if (!obj.has("version")) throw ConfigError("config.version: missing required key");
  const int version = obj.required<int>("version");
  if (version != RunConfig::kVersion) {
    throw ConfigError("config.version: unsupported schema version " + std::to_string(version));
  }
  RunConfig c;
  if (obj.has("chain")) c.chain = chain_config_from_json(obj.at("chain"), "config.chain");
  if (obj.has("analysis")) c.analysis = analysis_from_json(obj.at("analysis"), "config.analysis");
  if (obj.has("optimizer")) {
    c.optimizer = io::de_config_from_json(obj.at("optimizer"), "config.optimizer");
  }
  if (obj.has("sweep")) c.sweep = sweep_from_json(obj.at("sweep"), "config.sweep");
  if (obj.has("quench")) c.quench = quench_from_json(obj.at("quench"), "config.quench");
  if (obj.has("fit")) c.fit = fit_from_json(obj.at("fit"), "config.fit");
  if (obj.has("plot")) {
    StrictObject plot(obj.at("plot"), "config.plot");
    c.plot = PlotConfig{plot.required<std::string>("input")};
    plot.finish();
  }
  c.out = obj.optional<std::string>("out", c.out);
  c.threads = obj.optional<std::size_t>("threads", c.threads);
  obj.finish();
  if (c.threads == 0) throw ConfigError("config.threads: must be >= 1");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(io::read_json_file(path.string()));
}

Json to_json(const RunConfig& c) {
  Json j = {{"version", RunConfig::kVersion},
            {"analysis", to_json(c.analysis)},
            {"optimizer", io::to_json(c.optimizer)},
            {"sweep", to_json(c.sweep)},
            {"quench", to_json(c.quench)},
            {"out", c.out},
            {"threads", c.threads}};
  if (c.chain) j["chain"] = to_json(*c.chain);
  if (c.fit) j["fit"] = to_json(*c.fit);
  if (c.plot) j["plot"] = {{"input", c.plot->input}};
  return j;
}

}  // namespace chainclock
