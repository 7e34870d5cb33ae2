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
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "chainclock/chain_model.hpp"
#include "chainclock/clock_metrics.hpp"

namespace chainclock {

struct ParameterBounds {
  double low = 0.0;
  double high = 0.0;

  friend bool operator==(const ParameterBounds&, const ParameterBounds&) = default;
};

// Differential evolution (rand/1/bin) over the search vector
// [J_{N-o}, ..., J_{N-1}, J0]: o tail couplings followed by the PST scale.
struct DEConfig {
  std::size_t population = 40;
  double mutation_factor = 0.7;
  double crossover_rate = 0.9;
  std::size_t generations = 400;
  double lambda = 1.0;
  // Cost window T; unset means window_factor * sqrt(N).
  std::optional<double> window;
  double window_factor = 10.0;
  std::size_t tail_count = 4;
  // One entry per search parameter; empty selects the defaults
  // (tail in [0.01, 2], J0 in [0.1, 10] / sqrt(N)).
  std::vector<ParameterBounds> bounds;
  std::uint64_t seed = 0;
  double grid_step = 0.05;
  double gamma = 1.0;
  StatisticsWindow statistics_window;

  // Throws InvalidInput.
  void validate(std::size_t n_sites) const;
  double resolved_window(std::size_t n_sites) const;
  std::vector<ParameterBounds> resolved_bounds(std::size_t n_sites) const;
  std::size_t dimension() const { return tail_count + 1; }

  friend bool operator==(const DEConfig&, const DEConfig&) = default;
};

struct Candidate {
  std::vector<double> params;
  double cost = std::numeric_limits<double>::infinity();

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct OptimizationResult {
  Candidate best;
  std::vector<double> cost_trace;  // entry 0: initial population, then one per generation
  std::size_t evaluations = 0;
  std::size_t generations_completed = 0;
  bool complete = false;
  TickStatistics statistics;
  std::vector<double> couplings;  // expanded best chain, J_1..J_{N-1}
  double gamma = 1.0;

  ChainSpec spec() const { return ChainSpec(couplings, gamma); }
  friend bool operator==(const OptimizationResult&, const OptimizationResult&) = default;
};

// Deterministic random stream. Streams are keyed by (seed, generation,
// member) so results do not depend on evaluation order or thread count.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t generation, std::uint64_t member);
  explicit RandomStream(std::uint64_t seed) : RandomStream(seed, 0, 0) {}

  double uniform();                                // [0, 1)
  std::size_t index(std::size_t bound);            // [0, bound)
  double uniform(double low, double high);

 private:
  std::mt19937_64 engine_;
};

// PST profile with scale params.back() and the last o bonds replaced by the
// leading o params.
ChainSpec spec_from_params(std::span<const double> params, std::size_t n_sites,
                           const DEConfig& config);

// Sum over t in {dt, 2dt, ..., T}: (1 - S)^2 for t <= T/2, lambda S^2 after.
// Returns +infinity when the candidate cannot be evaluated.
double cost(std::span<const double> params, std::size_t n_sites, const DEConfig& config);

// Same sum, abandoned as soon as the partial sum reaches `limit`; the return
// value is then some number >= limit. Used by selection, where only
// cost < incumbent matters.
double cost_bounded(std::span<const double> params, std::size_t n_sites, const DEConfig& config,
                    double limit);

// Reflects each component back into its interval.
void reflect_into_bounds(std::vector<double>& v, std::span<const ParameterBounds> bounds);

// v = x_a + F (x_b - x_c), with a, b, c distinct and != target_index.
std::vector<double> mutate(std::span<const Candidate> population, std::size_t target_index,
                           double mutation_factor, std::span<const ParameterBounds> bounds,
                           RandomStream& rng);

struct CrossoverDraw {
  std::vector<bool> from_mutant;  // r_j < CR, before the forced component
  std::size_t forced = 0;         // component always taken from the mutant
};
CrossoverDraw draw_crossover(std::size_t dimension, double crossover_rate, RandomStream& rng);

std::vector<double> crossover(std::span<const double> mutant, std::span<const double> target,
                              double crossover_rate, RandomStream& rng);

// Trial wins only on strictly lower cost; NaN counts as +infinity.
const Candidate& select(const Candidate& trial, const Candidate& target);

// Resumable optimizer state. Random streams are a pure function of
// (seed, generation, member), so the seed and the generation index are the
// whole RNG state.
struct CheckpointState {
  static constexpr int kVersion = 1;
  std::size_t n_sites = 0;
  DEConfig config;
  std::size_t generation = 0;  // completed generations
  std::vector<Candidate> population;
  std::vector<double> cost_trace;
  std::size_t evaluations = 0;

  friend bool operator==(const CheckpointState&, const CheckpointState&) = default;
};

void write_checkpoint(const std::filesystem::path& path, const CheckpointState& state);
// Throws ConfigError on schema violations.
CheckpointState read_checkpoint(const std::filesystem::path& path);

struct OptimizeOptions {
  std::size_t threads = 1;
  std::optional<std::filesystem::path> checkpoint_path;
  std::size_t checkpoint_every = 10;
  // Stop after this many completed generations (simulates an interruption).
  std::optional<std::size_t> stop_after;
  std::optional<CheckpointState> resume;
  std::function<void(std::size_t generation, double best_cost)> on_generation;
};

// Throws ResumeMismatch if options.resume was produced for a different
// (n_sites, config), NumericalFailure if every initial candidate is infeasible.
OptimizationResult optimize(std::size_t n_sites, const DEConfig& config,
                            const OptimizeOptions& options = {});

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace chainclock
