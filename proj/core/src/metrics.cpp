// Copyright 2026 The logllm Authors
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
#include <cstdio>

#include "logllm/error.hpp"
#include "logllm/eval.hpp"

namespace logllm {

ConfusionCounts accumulate(ConfusionCounts counts, bool predicted, bool actual) {
  if (predicted && actual) {
    ++counts.tp;
  } else if (predicted) {
    ++counts.fp;
  } else if (actual) {
    ++counts.fn;
  } else {
    ++counts.tn;
  }
  return counts;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  Metrics m;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5 + 1e-9) / scale;
}

std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", round_half_up(value, 3));
  return buf;
}

const char* to_string(UnparsablePolicy policy) {
  switch (policy) {
    case UnparsablePolicy::kAnomalous: return "anomalous";
    case UnparsablePolicy::kNormal: return "normal";
    case UnparsablePolicy::kExclude: return "exclude";
  }
  return "anomalous";
}

std::optional<UnparsablePolicy> parse_unparsable_policy(std::string_view text) {
  if (text == "anomalous") return UnparsablePolicy::kAnomalous;
  if (text == "normal") return UnparsablePolicy::kNormal;
  if (text == "exclude" || text == "excluded") return UnparsablePolicy::kExclude;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (window_sizes.empty()) throw Error(ErrorCode::kConfig, "window_sizes is empty");
  for (auto w : window_sizes) {
    if (w == 0) throw Error(ErrorCode::kConfig, "window sizes must be >= 1");
  }
  if (mode == ShotMode::kFewShot && shot_count == 0) {
    throw Error(ErrorCode::kConfig, "few-shot runs need shot_count >= 1");
  }
  if (parallelism == 0) throw Error(ErrorCode::kConfig, "parallelism must be >= 1");
  if (request.max_output_tokens == 0) {
    throw Error(ErrorCode::kConfig, "max_output_tokens must be >= 1");
  }
  if (!(request.temperature >= 0.0)) {
    throw Error(ErrorCode::kConfig, "temperature must be >= 0");
  }
}

}  // namespace logllm
