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

#include "logllm/responses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json_util.hpp"
#include "logllm/diagnostics.hpp"
#include "logllm/error.hpp"

namespace logllm {

const char* to_string(ParsePath path) {
  switch (path) {
    case ParsePath::kDirect: return "direct";
    case ParsePath::kExtracted: return "extracted";
    case ParsePath::kReformatted: return "reformatted";
  }
  return "direct";
}

std::optional<ParsePath> parse_parse_path(std::string_view text) {
  if (text == "direct") return ParsePath::kDirect;
  if (text == "extracted") return ParsePath::kExtracted;
  if (text == "reformatted") return ParsePath::kReformatted;
  return std::nullopt;
}

namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// is_anomaly, isAnomaly and is-anomaly all fold to "isanomaly".
std::string fold_key(std::string_view key) {
  std::string out;
  for (unsigned char c : key) {
    if (c == '_' || c == '-' || c == ' ') continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

const json* find_key(const json& obj, std::string_view folded) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (fold_key(it.key()) == folded) return &it.value();
  }
  return nullptr;
}

std::string text_of(const json& value) {
  if (value.is_null()) return {};
  if (value.is_string()) return value.get<std::string>();
  if (value.is_array()) {
    std::string out;
    for (const auto& item : value) {
      if (!out.empty()) out += '\n';
      out += item.is_string() ? item.get<std::string>() : detail::dump_compact(item);
    }
    return out;
  }
  return detail::dump_compact(value);
}

std::optional<FlagValue> flag_of(const json& value) {
  if (value.is_boolean()) return FlagValue{value.get<bool>()};
  if (value.is_string()) return FlagValue{value.get<std::string>()};
  if (value.is_number()) return FlagValue{value.get<double>()};
  return std::nullopt;
}

enum class Extract { kFound, kBadFlag, kNoKey };

// Depth-first search for the first object carrying an is_anomaly key.
Extract verdict_from(const json& value, Verdict& out, int depth = 0) {
  if (depth > 8) return Extract::kNoKey;
  if (value.is_object()) {
    if (const json* flag = find_key(value, "isanomaly")) {
      const auto fv = flag_of(*flag);
      const auto normalized = fv ? try_normalize_flag(*fv) : std::nullopt;
      if (!normalized) return Extract::kBadFlag;
      out.is_anomaly = *normalized;
      const json* reports = find_key(value, "reports");
      if (reports == nullptr) reports = find_key(value, "report");
      const json* measures = find_key(value, "preventivemeasures");
      if (reports == nullptr || measures == nullptr) {
        warn("verdict is missing reports or preventive_measures; defaulting to empty");
      }
      out.reports = reports ? text_of(*reports) : std::string{};
      out.preventive_measures = measures ? text_of(*measures) : std::string{};
      return Extract::kFound;
    }
    for (const auto& [k, v] : value.items()) {
      const auto r = verdict_from(v, out, depth + 1);
      if (r != Extract::kNoKey) return r;
    }
  } else if (value.is_array()) {
    for (const auto& v : value) {
      const auto r = verdict_from(v, out, depth + 1);
      if (r != Extract::kNoKey) return r;
    }
  }
  return Extract::kNoKey;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Rewrites Python-ish / sloppy JSON into strict JSON: single-quoted strings,
// True/False/None, bare keys and trailing commas. A string left open at the
// end stays open; repair_truncated closes it.
std::string normalize_lenient(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 16);
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '"') {
      out += c;
      ++i;
      while (i < s.size()) {
        const char d = s[i];
        if (d == '\\' && i + 1 < s.size()) {
          out += d;
          out += s[i + 1];
          i += 2;
          continue;
        }
        if (d == '\n') {
          out += "\\n";
          ++i;
          continue;
        }
        out += d;
        ++i;
        if (d == '"') break;
      }
      continue;
    }
    if (c == '\'') {
      out += '"';
      ++i;
      while (i < s.size()) {
        const char d = s[i];
        if (d == '\\' && i + 1 < s.size()) {
          if (s[i + 1] == '\'') {
            out += '\'';
          } else {
            out += d;
            out += s[i + 1];
          }
          i += 2;
          continue;
        }
        ++i;
        if (d == '\'') {
          out += '"';
          break;
        }
        if (d == '"') {
          out += "\\\"";
        } else if (d == '\n') {
          out += "\\n";
        } else {
          out += d;
        }
      }
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      const std::string word(s.substr(i, j - i));
      std::size_t k = j;
      while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
      if (word == "True") {
        out += "true";
      } else if (word == "False") {
        out += "false";
      } else if (word == "None") {
        out += "null";
      } else if (word != "true" && word != "false" && word != "null" && k < s.size() &&
                 s[k] == ':') {
        out += '"' + word + '"';
      } else {
        out += word;
      }
      i = j;
      continue;
    }
    if (c == ',') {
      std::size_t k = i + 1;
      while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
      if (k < s.size() && (s[k] == '}' || s[k] == ']')) {
        ++i;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return out;
}

// Closes an unterminated string and any open brackets of strict-ish JSON.
std::string close_open(std::string s) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (char c : s) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      stack.push_back(c);
    } else if ((c == '}' || c == ']') && !stack.empty()) {
      stack.pop_back();
    }
  }
  if (in_string) {
    if (escaped) s.pop_back();
    s += '"';
  }
  auto tail = s.find_last_not_of(" \t\r\n");
  s.resize(tail == std::string::npos ? 0 : tail + 1);
  if (!s.empty() && s.back() == ',') s.pop_back();
  if (!s.empty() && s.back() == ':') s += "null";
  while (!stack.empty()) {
    s += stack.back() == '{' ? '}' : ']';
    stack.pop_back();
  }
  return s;
}

// Last ',' outside any string, or npos.
std::size_t last_top_comma(std::string_view s) {
  std::size_t found = std::string_view::npos;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') in_string = true;
    if (c == ',') found = i;
  }
  return found;
}

std::optional<json> parse_strict(std::string_view s) {
  auto j = json::parse(s, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

// Lenient parse with progressive cut-back for truncated tails.
std::optional<json> parse_tolerant(std::string_view candidate, bool truncated) {
  std::string normalized = normalize_lenient(candidate);
  if (auto j = parse_strict(normalized)) return j;
  if (!truncated) return std::nullopt;
  for (int attempt = 0; attempt < 16 && !normalized.empty(); ++attempt) {
    if (auto j = parse_strict(close_open(normalized))) return j;
    const auto comma = last_top_comma(normalized);
    if (comma == std::string::npos) break;
    normalized.resize(comma);
  }
  return std::nullopt;
}

struct BraceSpan {
  std::size_t begin;
  std::size_t end;  // one past the closing brace, or text size when open
  bool closed;
};

// Balanced span starting at `begin` (a '{'), aware of both quote styles.
BraceSpan span_from(std::string_view text, std::size_t begin) {
  int depth = 0;
  char quote = 0;
  bool escaped = false;
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char c = text[i];
    if (quote) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"') {
      quote = c;
    } else if (c == '\'') {
      // Apostrophes inside prose ("it's") are not string delimiters; only
      // treat a quote as one when it follows JSON punctuation.
      std::size_t k = i;
      while (k > begin && std::isspace(static_cast<unsigned char>(text[k - 1]))) --k;
      const char prev = k > begin ? text[k - 1] : '{';
      if (prev == '{' || prev == ',' || prev == ':' || prev == '[') quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return {begin, i + 1, true};
    }
  }
  return {begin, text.size(), false};
}

}  // namespace

std::optional<bool> try_normalize_flag(const FlagValue& value) noexcept {
  if (const bool* b = std::get_if<bool>(&value)) return *b;
  if (const double* d = std::get_if<double>(&value)) {
    if (*d == 1.0) return true;
    if (*d == 0.0) return false;
    return std::nullopt;
  }
  try {
    const auto s = lower(trim(std::get<std::string>(value)));
    if (s == "true" || s == "yes" || s == "anomaly" || s == "anomalous") return true;
    if (s == "false" || s == "no" || s == "normal") return false;
  } catch (...) {
  }
  return std::nullopt;
}

bool normalize_flag(const FlagValue& value) {
  if (auto b = try_normalize_flag(value)) return *b;
  std::string shown;
  if (const auto* s = std::get_if<std::string>(&value)) {
    shown = '"' + *s + '"';
  } else if (const auto* d = std::get_if<double>(&value)) {
    shown = std::to_string(*d);
  }
  throw Error(ErrorCode::kUnrecognizedFlag, "cannot read is_anomaly value " + shown);
}

ResponseParse parse_response(std::string_view text) {
  try {
    const std::string raw(text);
    Verdict verdict;
    verdict.raw_text = raw;
    bool bad_flag = false;

    if (auto whole = parse_strict(trim(text)); whole && whole->is_object()) {
      const auto r = verdict_from(*whole, verdict);
      if (r == Extract::kFound) {
        verdict.parse_path = find_key(*whole, "isanomaly") != nullptr
                                 ? ParsePath::kDirect
                                 : ParsePath::kExtracted;
        return verdict;
      }
      bad_flag = bad_flag || r == Extract::kBadFlag;
    }

    std::size_t pos = text.find('{');
    int spans_tried = 0;
    while (pos != std::string_view::npos && spans_tried < 32) {
      ++spans_tried;
      const auto span = span_from(text, pos);
      const auto candidate = text.substr(span.begin, span.end - span.begin);
      if (auto j = parse_tolerant(candidate, !span.closed)) {
        const auto r = verdict_from(*j, verdict);
        if (r == Extract::kFound) {
          verdict.parse_path = ParsePath::kExtracted;
          return verdict;
        }
        bad_flag = bad_flag || r == Extract::kBadFlag;
      }
      pos = text.find('{', pos + 1);
    }
    return NeedsReformat{raw, bad_flag ? "unrecognized is_anomaly value"
                                       : "no object with an is_anomaly key"};
  } catch (...) {
    return NeedsReformat{std::string(text), "parser failure"};
  }
}

std::string reformat_prompt_text(std::string_view raw_text,
                                 std::span<const std::string_view> keys) {
  std::string out(kReformatInstruction);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) out += ", ";
    out += keys[i];
  }
  out += '\n';
  out += raw_text;
  return out;
}

PromptRequest reformat_request(std::string_view raw_text,
                               std::span<const std::string_view> keys,
                               const RequestParams& params) {
  PromptRequest request;
  request.text = reformat_prompt_text(raw_text, keys);
  request.model_id = params.model_id;
  request.temperature = params.temperature;
  request.max_output_tokens = params.max_output_tokens;
  return request;
}

Verdict reformat_flow(CompletionBackend& backend, std::string_view raw_text,
                      std::span<const std::string_view> keys,
                      const RequestParams& params) {
  if (trim(raw_text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "nothing to reformat");
  }
  const auto reply = backend.complete(reformat_request(raw_text, keys, params));
  auto parsed = parse_response(reply.text);
  if (auto* verdict = std::get_if<Verdict>(&parsed)) {
    verdict->parse_path = ParsePath::kReformatted;
    verdict->raw_text = std::string(raw_text);
    return *verdict;
  }
  throw UnparsableResponse(std::string(raw_text), reply.text);
}

Resolution resolve_verdict(CompletionBackend& backend, std::string_view response_text,
                           const RequestParams& params) {
  Resolution out;
  out.raw_text = std::string(response_text);
  auto parsed = parse_response(response_text);
  if (auto* verdict = std::get_if<Verdict>(&parsed)) {
    out.verdict = std::move(*verdict);
    return out;
  }
  // An empty reply gives the reformat prompt nothing to work with.
  if (trim(response_text).empty()) return out;
  const auto request = reformat_request(response_text, kVerdictKeys, params);
  out.reformat_digest = request_digest(request);
  try {
    out.verdict = reformat_flow(backend, response_text, kVerdictKeys, params);
  } catch (const UnparsableResponse& e) {
    out.reformatted_text = e.reformatted_text();
  }
  return out;
}

}  // namespace logllm
