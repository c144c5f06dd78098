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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logllm/ingest.hpp"

namespace logllm {

inline constexpr std::string_view kWildcard = "<*>";

inline bool is_wildcard(std::string_view token) { return token == kWildcard; }

using TemplateId = std::uint32_t;

/// Reserved id for records whose content masks down to zero tokens.
inline constexpr TemplateId kEmptyTemplateId = 0;

/// Regex substitution applied inside each whitespace-delimited token. Matches
/// never span whitespace and the replacement contains none, so masking keeps
/// the token count unchanged.
class MaskRule {
 public:
  /// `needs_digit` skips tokens without a decimal digit before running the
  /// regex; set it only when every match of `pattern` contains one.
  MaskRule(std::string name, std::string pattern,
           std::string replacement = std::string(kWildcard), bool needs_digit = false);

  const std::string& name() const noexcept { return name_; }
  const std::string& pattern() const noexcept { return pattern_; }
  const std::string& replacement() const noexcept { return replacement_; }
  bool needs_digit() const noexcept { return needs_digit_; }

  /// Returns true and rewrites `token` when the rule fires.
  bool apply(std::string& token) const;

 private:
  std::string name_;
  std::string pattern_;
  std::string replacement_;
  bool needs_digit_ = false;
  struct Compiled;
  std::shared_ptr<const Compiled> compiled_;
};

/// Numbers, hex literals, IPv4 (with optional port) and "core.N" ids.
std::vector<MaskRule> default_mask_rules();

std::vector<std::string> tokenize_and_mask(std::string_view content,
                                           std::span<const MaskRule> rules);

struct ParseTreeConfig {
  std::size_t depth = 4;
  double similarity_threshold = 0.4;
  std::size_t max_children = 100;

  void validate() const;
};

struct Template {
  TemplateId id = 0;
  std::vector<std::string> tokens;
  std::size_t match_count = 0;

  std::size_t wildcard_count() const;
  std::string str() const;  // tokens joined by single spaces
  bool operator==(const Template&) const = default;
};

struct ParsedRecord {
  std::size_t line_no = 0;
  TemplateId template_id = kEmptyTemplateId;
  std::vector<std::string> parameters;
  bool operator==(const ParsedRecord&) const = default;
};

struct ParseOutcome {
  TemplateId template_id = kEmptyTemplateId;
  std::vector<std::string> parameters;
  /// Shape revision of the template right after this parse; see
  /// TemplateMiner::revision_tokens.
  std::size_t revision = 0;
};

/// Fixed-depth prefix tree over token sequences. Level one splits on token
/// count, the next depth-2 levels on leading tokens, and leaves hold
/// candidate templates compared by positional similarity.
///
/// Routing creates internal nodes on first sight of a token, so a token
/// sequence always descends the same path once it has been seen. Digit
/// tokens and tokens arriving at a full node take the wildcard branch.
class TemplateMiner {
 public:
  explicit TemplateMiner(ParseTreeConfig config = {});
  ~TemplateMiner();
  TemplateMiner(TemplateMiner&&) noexcept;
  TemplateMiner& operator=(TemplateMiner&&) noexcept;

  /// Throws Error(kEmptyMessage) for an empty token list.
  ParseOutcome parse(std::span<const std::string> tokens);

  const ParseTreeConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return templates_.size(); }
  /// Null for unknown ids (including kEmptyTemplateId).
  const Template* find(TemplateId id) const;
  /// All templates ordered by id.
  std::vector<Template> templates() const;
  /// Token list of template `id` as it stood at `revision`. Revision 0 is
  /// the creating line; each merge that adds a wildcard bumps it by one.
  std::span<const std::string> revision_tokens(TemplateId id,
                                               std::size_t revision) const;

 private:
  struct Node;

  Node& route(std::span<const std::string> tokens);

  ParseTreeConfig config_;
  std::unordered_map<std::size_t, std::unique_ptr<Node>> by_length_;
  std::vector<Template> templates_;  // templates_[id - 1]
  std::vector<std::vector<std::vector<std::string>>> history_;
};

/// Parameters at the template's wildcard positions, in order.
std::vector<std::string> extract_parameters(const Template& tmpl,
                                            std::span<const std::string> tokens);

struct CorpusParse {
  std::vector<ParsedRecord> records;  // aligned with the input
  std::vector<Template> templates;    // ordered by id
  std::size_t empty_count = 0;
};

/// Parses every record's content. Parameters are extracted against each
/// template's final form, so arity matches the returned templates.
CorpusParse parse_corpus(std::span<const LogRecord> records,
                         const ParseTreeConfig& config,
                         std::span<const MaskRule> rules);

/// Template lookup by id for a template list ordered by id.
const Template* find_template(std::span<const Template> templates, TemplateId id);

/// JSON lines: {"id", "match_count", "template"}.
std::string format_template_dump(std::span<const Template> templates);
std::vector<Template> parse_template_dump(std::string_view text);
/// JSON lines: {"line_no", "template_id", "parameters"}.
std::string format_parsed_dump(std::span<const ParsedRecord> records);
std::vector<ParsedRecord> parse_parsed_dump(std::string_view text);

}  // namespace logllm
