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

#include "logllm/prompts.hpp"

#include "json_util.hpp"
#include "logllm/error.hpp"
#include "logllm/io.hpp"

namespace logllm {

const char* to_string(PromptId id) { return id == PromptId::kP1 ? "P1" : "P2"; }

const char* to_string(ShotMode mode) {
  return mode == ShotMode::kZeroShot ? "zero_shot" : "few_shot";
}

const char* to_string(InjectionType type) {
  switch (type) {
    case InjectionType::kNormal: return "normal";
    case InjectionType::kAbnormal: return "abnormal";
    case InjectionType::kMixed: return "mixed";
  }
  return "normal";
}

const char* to_string(ShotGranularity granularity) {
  return granularity == ShotGranularity::kSingleLog ? "single_log" : "sequence";
}

std::optional<PromptId> parse_prompt_id(std::string_view text) {
  if (text == "P1" || text == "p1") return PromptId::kP1;
  if (text == "P2" || text == "p2") return PromptId::kP2;
  return std::nullopt;
}

std::optional<ShotMode> parse_shot_mode(std::string_view text) {
  if (text == "zero" || text == "zero_shot") return ShotMode::kZeroShot;
  if (text == "few" || text == "few_shot") return ShotMode::kFewShot;
  return std::nullopt;
}

std::optional<InjectionType> parse_injection_type(std::string_view text) {
  if (text == "normal") return InjectionType::kNormal;
  if (text == "abnormal") return InjectionType::kAbnormal;
  if (text == "mixed") return InjectionType::kMixed;
  return std::nullopt;
}

std::optional<ShotGranularity> parse_shot_granularity(std::string_view text) {
  if (text == "single_log" || text == "log") return ShotGranularity::kSingleLog;
  if (text == "sequence") return ShotGranularity::kSequence;
  return std::nullopt;
}

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

constexpr std::string_view kFormatStatement =
    "Output format: Please note that return back in following json format, "
    "include keys: is_anomaly, reports, preventive_measures";

constexpr std::string_view kP1Task =
    "You are an experienced system administrator who analyzes logs from "
    "large-scale computer systems. Read the following log sequence and decide "
    "whether it contains any anomaly. Output your thought process: point out "
    "the log messages that look abnormal and explain why.";

constexpr std::string_view kP2Task =
    "You are an experienced system administrator who analyzes logs from "
    "large-scale computer systems. Read the following log sequence and decide "
    "whether it contains any anomaly. If it does, write an anomaly report that "
    "names the abnormal events and their likely cause, and give preventive "
    "measures that would stop them from happening again.";

}  // namespace

void PromptTemplate::validate() const {
  if (task_description.empty()) {
    throw Error(ErrorCode::kInvalidTemplate, "empty task description");
  }
  for (auto key : kVerdictKeys) {
    if (count_occurrences(format_statement, key) != 1) {
      throw Error(ErrorCode::kInvalidTemplate,
                  std::string("format statement must name key '") + std::string(key) +
                      "' exactly once");
    }
  }
}

std::pair<PromptTemplate, PromptTemplate> canonical_templates() {
  PromptTemplate p1{PromptId::kP1, 1, std::string(kP1Task), std::string(kFormatStatement)};
  PromptTemplate p2{PromptId::kP2, 1, std::string(kP2Task), std::string(kFormatStatement)};
  return {std::move(p1), std::move(p2)};
}

const PromptTemplate& canonical_template(PromptId id) {
  static const auto both = canonical_templates();
  return id == PromptId::kP1 ? both.first : both.second;
}

PromptTemplate parse_prompt_template(std::string_view text) {
  PromptTemplate tmpl;
  bool seen_id = false;
  bool seen_task = false;
  bool seen_format = false;
  std::string section;
  std::vector<std::string> body;

  auto flush = [&]() {
    if (section.empty()) return;
    std::string joined;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) joined += '\n';
      joined += body[i];
    }
    if (section == "version") {
      try {
        tmpl.version = std::stoi(joined);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidTemplate, "bad version: " + joined);
      }
    } else if (section == "id") {
      const auto id = parse_prompt_id(joined);
      if (!id) throw Error(ErrorCode::kInvalidTemplate, "unknown prompt id: " + joined);
      tmpl.id = *id;
      seen_id = true;
    } else if (section == "task_description") {
      tmpl.task_description = joined;
      seen_task = true;
    } else if (section == "format_statement") {
      tmpl.format_statement = joined;
      seen_format = true;
    } else {
      throw Error(ErrorCode::kInvalidTemplate, "unknown section: " + section);
    }
    body.clear();
  };

  for (const auto& line : split_lines(text)) {
    if (line.rfind("@@ ", 0) == 0) {
      flush();
      section = line.substr(3);
      continue;
    }
    if (section.empty()) {
      if (line.empty() || line[0] == '#') continue;
      throw Error(ErrorCode::kInvalidTemplate, "text before the first section");
    }
    body.push_back(line);
  }
  flush();
  if (!seen_id || !seen_task || !seen_format) {
    throw Error(ErrorCode::kInvalidTemplate,
                "template needs id, task_description and format_statement sections");
  }
  tmpl.validate();
  return tmpl;
}

std::string format_prompt_template(const PromptTemplate& tmpl) {
  std::string out;
  out += "@@ version\n" + std::to_string(tmpl.version) + "\n";
  out += std::string("@@ id\n") + to_string(tmpl.id) + "\n";
  out += "@@ task_description\n" + tmpl.task_description + "\n";
  out += "@@ format_statement\n" + tmpl.format_statement + "\n";
  return out;
}

PromptTemplate load_prompt_template(const std::filesystem::path& path) {
  try {
    return parse_prompt_template(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::size_t InjectionConfig::expected_shots() const {
  return injection_type == InjectionType::kMixed ? 2 * shot_count : shot_count;
}

void InjectionConfig::validate() const {
  if (mode == ShotMode::kZeroShot) {
    if (!shots.empty()) {
      throw Error(ErrorCode::kInvalidInjection, "zero-shot prompts carry no shots");
    }
    return;
  }
  if (shots.empty()) {
    throw Error(ErrorCode::kInvalidInjection, "few-shot prompt without shots");
  }
  if (shots.size() != expected_shots()) {
    throw Error(ErrorCode::kInvalidInjection,
                "expected " + std::to_string(expected_shots()) + " shots, got " +
                    std::to_string(shots.size()));
  }
  std::size_t anomalous = 0;
  for (const auto& s : shots) {
    if (s.items.empty()) throw Error(ErrorCode::kInvalidInjection, "empty shot");
    if (s.label == Label::kAnomalous) ++anomalous;
  }
  const std::size_t normal = shots.size() - anomalous;
  const bool ok = (injection_type == InjectionType::kNormal && anomalous == 0) ||
                  (injection_type == InjectionType::kAbnormal && normal == 0) ||
                  (injection_type == InjectionType::kMixed && normal == shot_count &&
                   anomalous == shot_count);
  if (!ok) {
    throw Error(ErrorCode::kInvalidInjection,
                std::string("shot labels do not match injection type ") +
                    to_string(injection_type));
  }
}

void PromptRequest::validate() const {
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  if (max_output_tokens < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_output_tokens must be >= 1");
  }
  if (top_choices != 1) {
    throw Error(ErrorCode::kInvalidArgument, "only the top-1 choice is supported");
  }
  if (model_id.empty()) throw Error(ErrorCode::kInvalidArgument, "empty model id");
}

std::string render_list_literal(std::span<const std::string> items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += '"';
    for (char c : items[i]) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
  }
  out += ']';
  return out;
}

std::string injection_block(const InjectionConfig& injection) {
  if (injection.mode == ShotMode::kZeroShot) return {};
  std::string out = "Here are some historical logs with their labels:";
  for (const auto& shot : injection.shots) {
    out += '\n';
    out += render_list_literal(shot.items);
    out += " \xE2\x86\x92 ";  // U+2192 RIGHTWARDS ARROW
    out += to_string(shot.label);
  }
  return out;
}

PromptRequest build_prompt(const PromptTemplate& tmpl,
                           const InjectionConfig& injection,
                           const LogSequence& sequence,
                           const RequestParams& params) {
  injection.validate();
  PromptRequest request;
  request.model_id = params.model_id;
  request.temperature = params.temperature;
  request.max_output_tokens = params.max_output_tokens;
  request.text.reserve(tmpl.task_description.size() + tmpl.format_statement.size() + 256);
  request.text += tmpl.task_description;
  request.text += '\n';
  request.text += tmpl.format_statement;
  request.text += '\n';
  request.text += injection_block(injection);
  request.text += '\n';
  request.text += "Log sequence: ";
  request.text += render_list_literal(sequence.items);
  request.validate();
  return request;
}

std::string format_audit_line(const PromptAuditEntry& entry) {
  nlohmann::ordered_json j;
  j["digest"] = entry.digest;
  j["prompt_id"] = to_string(entry.prompt_id);
  j["mode"] = to_string(entry.mode);
  j["injection"] = to_string(entry.injection_type);
  j["view"] = to_string(entry.view);
  j["window_size"] = entry.window_size;
  j["window_index"] = entry.window_index;
  j["byte_length"] = entry.byte_length;
  return detail::dump_compact(j);
}

}  // namespace logllm
