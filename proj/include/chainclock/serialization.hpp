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

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainclock/clock_metrics.hpp"
#include "chainclock/de_optimizer.hpp"
#include "chainclock/errors.hpp"

namespace chainclock::io {

using Json = nlohmann::json;

// Reads fields from a JSON object; finish() rejects every key that was never
// asked for. Type mismatches become ConfigError with the dotted key path.
class StrictObject {
 public:
  StrictObject(const Json& json, std::string context);

  bool has(const std::string& key) const { return json_.contains(key); }
  const Json& at(const std::string& key);

  template <class T>
  T required(const std::string& key) {
    if (!json_.contains(key)) throw ConfigError(path(key) + ": missing required key");
    return convert<T>(at(key), key);
  }

  template <class T>
  T optional(const std::string& key, T fallback) {
    if (!json_.contains(key)) return fallback;
    return convert<T>(at(key), key);
  }

  std::string path(const std::string& key) const;
  void finish() const;

 private:
  template <class T>
  T convert(const Json& value, const std::string& key) const {
    try {
      return value.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path(key) + ": " + e.what());
    }
  }

  const Json& json_;
  std::string context_;
  std::set<std::string> seen_;
};

// JSON has no infinity; infinite costs are stored as null.
Json number_or_null(double value);
double number_or_infinity(const Json& value, const std::string& context);

Json to_json(const StatisticsWindow& window);
StatisticsWindow statistics_window_from_json(const Json& json, const std::string& context);

Json to_json(const TickStatistics& stats);
TickStatistics tick_statistics_from_json(const Json& json, const std::string& context);

// Missing keys keep the values of `defaults`.
Json to_json(const DEConfig& config);
DEConfig de_config_from_json(const Json& json, const std::string& context,
                             const DEConfig& defaults = {});

Json to_json(const Candidate& candidate);
Candidate candidate_from_json(const Json& json, const std::string& context);

Json to_json(const OptimizationResult& result);
OptimizationResult optimization_result_from_json(const Json& json, const std::string& context);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& json);

}  // namespace chainclock::io
