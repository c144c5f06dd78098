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

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logllm/ingest.hpp"
#include "logllm/sequencer.hpp"

namespace logllm {

enum class PromptId { kP1, kP2 };
enum class ShotMode { kZeroShot, kFewShot };
enum class InjectionType { kNormal, kAbnormal, kMixed };
/// Whether a shot is one log line or a whole labeled window.
enum class ShotGranularity { kSingleLog, kSequence };

const char* to_string(PromptId id);
const char* to_string(ShotMode mode);
const char* to_string(InjectionType type);
const char* to_string(ShotGranularity granularity);
std::optional<PromptId> parse_prompt_id(std::string_view text);
std::optional<ShotMode> parse_shot_mode(std::string_view text);
std::optional<InjectionType> parse_injection_type(std::string_view text);
std::optional<ShotGranularity> parse_shot_granularity(std::string_view text);

/// The three keys every verdict must carry, in prompt order.
inline constexpr std::string_view kVerdictKeys[] = {"is_anomaly", "reports",
                                                    "preventive_measures"};

struct PromptTemplate {
  PromptId id = PromptId::kP2;
  int version = 1;
  std::string task_description;
  std::string format_statement;

  /// Throws Error(kInvalidTemplate) unless the format statement names each
  /// verdict key exactly once.
  void validate() const;
  bool operator==(const PromptTemplate&) const = default;
};

/// P1 asks indirectly ("Output your thought process"); P2 directly requests
/// an anomaly report and preventive measures. Both share one format statement.
std::pair<PromptTemplate, PromptTemplate> canonical_templates();
const PromptTemplate& canonical_template(PromptId id);

/// Template file: "@@ <section>" header lines (version, id, task_description,
/// format_statement), each followed by its body. Bodies are taken verbatim
/// with interior newlines preserved.
PromptTemplate parse_prompt_template(std::string_view text);
std::string format_prompt_template(const PromptTemplate& tmpl);
PromptTemplate load_prompt_template(const std::filesystem::path& path);

struct Shot {
  std::vector<std::string> items;
  Label label = Label::kNormal;
  bool operator==(const Shot&) const = default;
};

struct InjectionConfig {
  ShotMode mode = ShotMode::kZeroShot;
  InjectionType injection_type = InjectionType::kNormal;
  std::vector<Shot> shots;
  std::size_t shot_count = 5;

  /// Mixed injection carries shot_count shots of each class.
  std::size_t expected_shots() const;
  /// Throws Error(kInvalidInjection).
  void validate() const;
};

struct PromptRequest {
  std::string text;
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.0;
  std::size_t max_output_tokens = 100;
  std::size_t top_choices = 1;

  void validate() const;
};

/// Model parameters shared by every request of a run.
struct RequestParams {
  std::string model_id = "gpt-3.5-turbo";
  double temperature = 0.0;
  std::size_t max_output_tokens = 100;
};

/// ["a", "b"] with '"' and '\' escaped by a backslash; [] when empty.
std::string render_list_literal(std::span<const std::string> items);

std::string injection_block(const InjectionConfig& injection);

/// task, format statement, injection block (few-shot only) and the
/// "Log sequence: " line, separated by single newlines.
PromptRequest build_prompt(const PromptTemplate& tmpl,
                           const InjectionConfig& injection,
                           const LogSequence& sequence,
                           const RequestParams& params = {});

struct PromptAuditEntry {
  std::string digest;
  PromptId prompt_id = PromptId::kP2;
  ShotMode mode = ShotMode::kZeroShot;
  InjectionType injection_type = InjectionType::kNormal;
  SequenceView view = SequenceView::kContent;
  std::size_t window_size = 0;
  std::size_t window_index = 0;
  std::size_t byte_length = 0;
  bool operator==(const PromptAuditEntry&) const = default;
};

std::string format_audit_line(const PromptAuditEntry& entry);

}  // namespace logllm
