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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "logllm/llm.hpp"
#include "logllm/prompts.hpp"

namespace logllm {

enum class ParsePath { kDirect, kExtracted, kReformatted };

const char* to_string(ParsePath path);
std::optional<ParsePath> parse_parse_path(std::string_view text);

struct Verdict {
  bool is_anomaly = false;
  std::string reports;
  std::string preventive_measures;
  ParsePath parse_path = ParsePath::kDirect;
  std::string raw_text;
  bool operator==(const Verdict&) const = default;
};

struct NeedsReformat {
  std::string raw_text;
  std::string reason;
};

using ResponseParse = std::variant<Verdict, NeedsReformat>;

/// Total over arbitrary bytes. Tries, in order: the whole text as a strict
/// JSON object (direct); then each brace-delimited span, tolerating Python
/// literals, single quotes, bare keys, trailing commas and truncation
/// (extracted). Keys match case-insensitively with '_' and '-' ignored, and
/// objects nested inside others are searched too.
ResponseParse parse_response(std::string_view text);

using FlagValue = std::variant<bool, std::string, double>;

std::optional<bool> try_normalize_flag(const FlagValue& value) noexcept;

/// true/yes/anomaly/anomalous/1 and false/no/normal/0, case-insensitive for
/// strings. Anything else throws Error(kUnrecognizedFlag).
bool normalize_flag(const FlagValue& value);

inline constexpr std::string_view kReformatInstruction =
    "Please format the following text in json format, which include the keys: ";

/// The instruction, keys joined by ", ", a newline and the raw text.
std::string reformat_prompt_text(std::string_view raw_text,
                                 std::span<const std::string_view> keys = kVerdictKeys);

PromptRequest reformat_request(std::string_view raw_text,
                               std::span<const std::string_view> keys,
                               const RequestParams& params);

/// One backend round-trip asking the model to restate `raw_text` as JSON.
/// Throws UnparsableResponse if the reply still does not parse.
Verdict reformat_flow(CompletionBackend& backend, std::string_view raw_text,
                      std::span<const std::string_view> keys = kVerdictKeys,
                      const RequestParams& params = {});

struct Resolution {
  std::optional<Verdict> verdict;  // empty when terminally unparsable
  std::string raw_text;
  std::string reformatted_text;
  std::optional<std::string> reformat_digest;
};

/// parse_response, then at most one reformat round-trip. Never throws for
/// unparsable text; backend errors propagate.
Resolution resolve_verdict(CompletionBackend& backend, std::string_view response_text,
                           const RequestParams& params = {});

}  // namespace logllm
