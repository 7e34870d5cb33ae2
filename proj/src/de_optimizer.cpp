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

#include "chainclock/de_optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "chainclock/errors.hpp"
#include "chainclock/propagation.hpp"
#include "chainclock/serialization.hpp"
#include "chainclock/spectral.hpp"

namespace chainclock {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr const char* kCheckpointFormat = "chainclock-de-checkpoint";

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Index of the grid point count and of the last point in the first half.
struct CostGrid {
  std::size_t points = 0;
  std::size_t first_half = 0;
};

CostGrid cost_grid(double window, double step) {
  // The small slack keeps T/dt = 200 from becoming 199.99999.
  return {static_cast<std::size_t>(std::floor(window / step + 1e-9)),
          static_cast<std::size_t>(std::floor(0.5 * window / step + 1e-9))};
}

std::size_t best_index(std::span<const Candidate> population) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (population[i].cost < population[best].cost) best = i;
  }
  return best;
}

}  // namespace

void DEConfig::validate(std::size_t n_sites) const {
  if (n_sites < 2) throw InvalidInput("DEConfig: n_sites must be >= 2");
  if (population < 4) throw InvalidInput("DEConfig: population must be >= 4");
  if (!(mutation_factor >= 0.0 && mutation_factor <= 2.0)) {
    throw InvalidInput("DEConfig: mutation_factor must be in [0, 2]");
  }
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw InvalidInput("DEConfig: crossover_rate must be in [0, 1]");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("DEConfig: lambda must be > 0");
  if (window && !(*window > 0.0 && std::isfinite(*window))) {
    throw InvalidInput("DEConfig: window must be > 0");
  }
  if (!(window_factor > 0.0) || !std::isfinite(window_factor)) {
    throw InvalidInput("DEConfig: window_factor must be > 0");
  }
  if (tail_count >= n_sites - 1) {
    throw InvalidInput("DEConfig: tail_count must leave at least one PST bond");
  }
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw InvalidInput("DEConfig: grid_step must be > 0");
  }
  if (resolved_window(n_sites) < grid_step) {
    throw InvalidInput("DEConfig: window shorter than grid_step");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("DEConfig: gamma must be > 0");
  if (!bounds.empty() && bounds.size() != dimension()) {
    throw InvalidInput("DEConfig: need " + std::to_string(dimension()) + " bounds, got " +
                       std::to_string(bounds.size()));
  }
  for (const auto& b : bounds) {
    if (!(b.low > 0.0 && b.low < b.high && std::isfinite(b.high))) {
      throw InvalidInput("DEConfig: bounds must satisfy 0 < low < high");
    }
  }
}

double DEConfig::resolved_window(std::size_t n_sites) const {
  return window ? *window : window_factor * std::sqrt(static_cast<double>(n_sites));
}

std::vector<ParameterBounds> DEConfig::resolved_bounds(std::size_t n_sites) const {
  if (!bounds.empty()) return bounds;
  std::vector<ParameterBounds> out(tail_count, ParameterBounds{0.01, 2.0});
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_sites));
  out.push_back({0.1 * scale, 10.0 * scale});
  return out;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t generation, std::uint64_t member) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state);
  state = key ^ generation;
  key = splitmix64(state);
  state = key ^ member;
  engine_.seed(splitmix64(state));
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RandomStream::index(std::size_t bound) {
  if (bound == 0) throw InvalidInput("RandomStream::index: bound must be > 0");
  const std::uint64_t b = bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % b);
}

double RandomStream::uniform(double low, double high) {
  return low + (high - low) * uniform();
}

ChainSpec spec_from_params(std::span<const double> params, std::size_t n_sites,
                           const DEConfig& config) {
  if (params.size() != config.dimension()) {
    throw InvalidInput("spec_from_params: expected " + std::to_string(config.dimension()) +
                       " parameters");
  }
  CouplingProfile profile;
  profile.j0 = params.back();
  if (config.tail_count > 0) {
    profile.kind = ProfileKind::kPstWithTailOverrides;
    profile.tail_count = config.tail_count;
    profile.tail_overrides.assign(params.begin(), params.end() - 1);
  }
  return expand_profile(profile, n_sites, config.gamma);
}

double cost_bounded(std::span<const double> params, std::size_t n_sites, const DEConfig& config,
                    double limit) {
  try {
    RealChainPropagator propagator(spec_from_params(params, n_sites, config));
    const auto grid = cost_grid(config.resolved_window(n_sites), config.grid_step);
    double sum = 0.0;
    for (std::size_t m = 1; m <= grid.points; ++m) {
      propagator.advance(config.grid_step);
      const double s = propagator.survival();
      sum += m <= grid.first_half ? (1.0 - s) * (1.0 - s) : config.lambda * s * s;
      if (!std::isfinite(sum)) return kInfinity;
      if (sum >= limit) return sum;
    }
    return sum;
  } catch (const std::exception&) {
    return kInfinity;
  }
}

double cost(std::span<const double> params, std::size_t n_sites, const DEConfig& config) {
  return cost_bounded(params, n_sites, config, kInfinity);
}

void reflect_into_bounds(std::vector<double>& v, std::span<const ParameterBounds> bounds) {
  if (v.size() != bounds.size()) throw InvalidInput("reflect_into_bounds: size mismatch");
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double lo = bounds[j].low;
    const double width = bounds[j].high - lo;
    if (!std::isfinite(v[j])) {
      v[j] = lo + 0.5 * width;
      continue;
    }
    if (v[j] >= lo && v[j] <= bounds[j].high) continue;
    // Mirror images of the interval repeat with period 2 * width.
    double u = std::fmod(v[j] - lo, 2.0 * width);
    if (u < 0.0) u += 2.0 * width;
    v[j] = std::clamp(lo + (u <= width ? u : 2.0 * width - u), lo, bounds[j].high);
  }
}

std::vector<double> mutate(std::span<const Candidate> population, std::size_t target_index,
                           double mutation_factor, std::span<const ParameterBounds> bounds,
                           RandomStream& rng) {
  const std::size_t m = population.size();
  if (m < 4) throw InvalidInput("mutate: population must have at least 4 members");
  if (target_index >= m) throw InvalidInput("mutate: target index out of range");
  std::size_t a, b, c;
  do a = rng.index(m); while (a == target_index);
  do b = rng.index(m); while (b == target_index || b == a);
  do c = rng.index(m); while (c == target_index || c == a || c == b);

  const auto& xa = population[a].params;
  const auto& xb = population[b].params;
  const auto& xc = population[c].params;
  std::vector<double> v(xa.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = xa[j] + mutation_factor * (xb[j] - xc[j]);
  reflect_into_bounds(v, bounds);
  return v;
}

CrossoverDraw draw_crossover(std::size_t dimension, double crossover_rate, RandomStream& rng) {
  if (dimension == 0) throw InvalidInput("crossover: empty vectors");
  CrossoverDraw draw;
  draw.forced = rng.index(dimension);
  draw.from_mutant.resize(dimension);
  for (std::size_t j = 0; j < dimension; ++j) draw.from_mutant[j] = rng.uniform() < crossover_rate;
  return draw;
}

std::vector<double> crossover(std::span<const double> mutant, std::span<const double> target,
                              double crossover_rate, RandomStream& rng) {
  if (mutant.size() != target.size()) throw InvalidInput("crossover: length mismatch");
  const auto draw = draw_crossover(mutant.size(), crossover_rate, rng);
  std::vector<double> trial(target.begin(), target.end());
  for (std::size_t j = 0; j < trial.size(); ++j) {
    if (draw.from_mutant[j] || j == draw.forced) trial[j] = mutant[j];
  }
  return trial;
}

const Candidate& select(const Candidate& trial, const Candidate& target) {
  // NaN compares false, so a NaN trial never wins.
  return trial.cost < target.cost ? trial : target;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointState& state) {
  io::Json population = io::Json::array();
  for (const auto& c : state.population) population.push_back(io::to_json(c));
  io::Json trace = io::Json::array();
  for (double c : state.cost_trace) trace.push_back(io::number_or_null(c));
  const io::Json json = {
      {"format", kCheckpointFormat},
      {"version", CheckpointState::kVersion},
      {"n_sites", state.n_sites},
      {"config", io::to_json(state.config)},
      {"generation", state.generation},
      {"rng", {{"scheme", "splitmix64 -> mt19937_64 per (seed, generation, member)"},
               {"seed", state.config.seed},
               {"next_generation", state.generation + 1}}},
      {"population", population},
      {"cost_trace", trace},
      {"evaluations", state.evaluations}};
  io::write_json_file(path.string(), json);
}

CheckpointState read_checkpoint(const std::filesystem::path& path) {
  const auto json = io::read_json_file(path.string());
  io::StrictObject obj(json, "checkpoint");
  if (obj.required<std::string>("format") != kCheckpointFormat) {
    throw ConfigError("checkpoint: not a chainclock DE checkpoint");
  }
  const int version = obj.required<int>("version");
  if (version != CheckpointState::kVersion) {
    throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
  }
  CheckpointState state;
  state.n_sites = obj.required<std::size_t>("n_sites");
  state.config = io::de_config_from_json(obj.at("config"), "checkpoint.config");
  state.generation = obj.required<std::size_t>("generation");
  {
    io::StrictObject rng(obj.at("rng"), "checkpoint.rng");
    rng.required<std::string>("scheme");
    if (rng.required<std::uint64_t>("seed") != state.config.seed ||
        rng.required<std::size_t>("next_generation") != state.generation + 1) {
      throw ConfigError("checkpoint.rng: inconsistent with config seed or generation");
    }
    rng.finish();
  }
  const auto& population = obj.at("population");
  if (!population.is_array()) throw ConfigError("checkpoint.population: expected an array");
  for (std::size_t i = 0; i < population.size(); ++i) {
    state.population.push_back(
        io::candidate_from_json(population[i], "checkpoint.population[" + std::to_string(i) + "]"));
  }
  const auto& trace = obj.at("cost_trace");
  if (!trace.is_array()) throw ConfigError("checkpoint.cost_trace: expected an array");
  for (const auto& c : trace) state.cost_trace.push_back(io::number_or_infinity(c, "cost_trace"));
  state.evaluations = obj.required<std::size_t>("evaluations");
  obj.finish();
  if (state.population.size() != state.config.population ||
      state.cost_trace.size() != state.generation + 1) {
    throw ConfigError("checkpoint: population or trace size inconsistent with header");
  }
  return state;
}

OptimizationResult optimize(std::size_t n_sites, const DEConfig& config,
                            const OptimizeOptions& options) {
  config.validate(n_sites);
  const auto bounds = config.resolved_bounds(n_sites);
  const std::size_t m = config.population;

  CheckpointState state;
  if (options.resume) {
    state = *options.resume;
    if (state.n_sites != n_sites || !(state.config == config)) {
      throw ResumeMismatch("checkpoint was written for a different chain or optimizer config");
    }
    if (state.population.size() != m || state.generation > config.generations) {
      throw ResumeMismatch("checkpoint population or generation index inconsistent with config");
    }
  } else {
    state.n_sites = n_sites;
    state.config = config;
    state.population.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      RandomStream rng(config.seed, 0, i);
      auto& params = state.population[i].params;
      params.resize(bounds.size());
      for (std::size_t j = 0; j < bounds.size(); ++j) {
        params[j] = rng.uniform(bounds[j].low, bounds[j].high);
      }
    }
    parallel_for(m, options.threads, [&](std::size_t i) {
      state.population[i].cost = cost(state.population[i].params, n_sites, config);
    });
    state.evaluations = m;
    const double best = state.population[best_index(state.population)].cost;
    if (std::isinf(best)) {
      throw NumericalFailure(
          "optimize: every initial candidate has infinite cost; widen the parameter bounds");
    }
    state.cost_trace.push_back(best);
  }

  auto save = [&] {
    if (options.checkpoint_path) write_checkpoint(*options.checkpoint_path, state);
  };

  std::vector<Candidate> trials(m);
  while (state.generation < config.generations) {
    if (options.stop_after && state.generation >= *options.stop_after) break;
    const std::size_t g = state.generation + 1;
    parallel_for(m, options.threads, [&](std::size_t i) {
      RandomStream rng(config.seed, g, i);
      const auto mutant = mutate(state.population, i, config.mutation_factor, bounds, rng);
      trials[i].params = crossover(mutant, state.population[i].params, config.crossover_rate, rng);
      trials[i].cost = cost_bounded(trials[i].params, n_sites, config, state.population[i].cost);
    });
    for (std::size_t i = 0; i < m; ++i) {
      if (&select(trials[i], state.population[i]) == &trials[i]) {
        state.population[i] = trials[i];
      }
    }
    state.evaluations += m;
    state.generation = g;
    state.cost_trace.push_back(state.population[best_index(state.population)].cost);
    if (options.on_generation) options.on_generation(g, state.cost_trace.back());
    if (options.checkpoint_every > 0 && g % options.checkpoint_every == 0) save();
  }
  save();

  OptimizationResult result;
  result.best = state.population[best_index(state.population)];
  result.cost_trace = state.cost_trace;
  result.evaluations = state.evaluations;
  result.generations_completed = state.generation;
  result.complete = state.generation == config.generations;
  const auto spec = spec_from_params(result.best.params, n_sites, config);
  result.couplings = spec.couplings();
  result.gamma = spec.gamma();
  result.statistics = tick_statistics(decompose_effective(spec), config.statistics_window);
  return result;
}

}  // namespace chainclock
