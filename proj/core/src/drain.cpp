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

#include "logllm/drain.hpp"

#include <algorithm>
#include <cctype>

#include <boost/regex.hpp>

#include "json_util.hpp"
#include "logllm/error.hpp"

namespace logllm {

struct MaskRule::Compiled {
  boost::regex re;
};

MaskRule::MaskRule(std::string name, std::string pattern, std::string replacement,
                   bool needs_digit)
    : name_(std::move(name)),
      pattern_(std::move(pattern)),
      replacement_(std::move(replacement)),
      needs_digit_(needs_digit) {
  if (replacement_.empty() ||
      std::any_of(replacement_.begin(), replacement_.end(),
                  [](unsigned char c) { return std::isspace(c) != 0; })) {
    throw Error(ErrorCode::kConfig,
                "mask rule " + name_ + ": replacement must be non-empty without whitespace");
  }
  try {
    compiled_ = std::make_shared<const Compiled>(Compiled{boost::regex(pattern_)});
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::kConfig, "mask rule " + name_ + ": " + e.what());
  }
}

bool MaskRule::apply(std::string& token) const {
  if (needs_digit_ && std::none_of(token.begin(), token.end(), [](unsigned char c) {
        return c >= '0' && c <= '9';
      })) {
    return false;
  }
  const auto& re = compiled_->re;
  if (!boost::regex_search(token, re)) return false;
  token = boost::regex_replace(token, re, replacement_);
  return true;
}

std::vector<MaskRule> default_mask_rules() {
  std::vector<MaskRule> rules;
  const std::string wildcard(kWildcard);
  rules.emplace_back("ipv4", R"((\d{1,3}\.){3}\d{1,3}(:\d+)?)", wildcard, true);
  rules.emplace_back("hex", R"(0[xX][0-9a-fA-F]+)", wildcard, true);
  rules.emplace_back("core_id", R"(core\.\d+)", wildcard, true);
  // A number bounded by non-alphanumerics; the leading boundary is captured
  // and kept because ECMAScript has no lookbehind.
  rules.emplace_back("decimal", R"((^|[^A-Za-z0-9.])[-+]?\d+(\.\d+)?(?=[^A-Za-z0-9]|$))",
                     "$1<*>", true);
  return rules;
}

namespace {

bool has_digit(std::string_view token) {
  return std::any_of(token.begin(), token.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::vector<std::string> tokenize_and_mask(std::string_view content,
                                           std::span<const MaskRule> rules) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < content.size()) {
    while (i < content.size() && is_space(content[i])) ++i;
    if (i >= content.size()) break;
    const std::size_t start = i;
    while (i < content.size() && !is_space(content[i])) ++i;
    std::string token(content.substr(start, i - start));
    for (const auto& rule : rules) rule.apply(token);
    tokens.push_back(std::move(token));
  }
  return tokens;
}

void ParseTreeConfig::validate() const {
  if (depth < 3) throw Error(ErrorCode::kConfig, "parse tree depth must be >= 3");
  if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "similarity_threshold must lie in (0, 1]");
  }
  if (max_children < 1) throw Error(ErrorCode::kConfig, "max_children must be >= 1");
}

std::size_t Template::wildcard_count() const {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(),
                    [](const std::string& t) { return is_wildcard(t); }));
}

std::string Template::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

struct TemplateMiner::Node {
  std::unordered_map<std::string, std::unique_ptr<Node>> children;
  std::vector<TemplateId> templates;  // ascending: appended at creation
};

TemplateMiner::TemplateMiner(ParseTreeConfig config) : config_(config) {
  config_.validate();
}

TemplateMiner::~TemplateMiner() = default;
TemplateMiner::TemplateMiner(TemplateMiner&&) noexcept = default;
TemplateMiner& TemplateMiner::operator=(TemplateMiner&&) noexcept = default;

TemplateMiner::Node& TemplateMiner::route(std::span<const std::string> tokens) {
  auto& root = by_length_[tokens.size()];
  if (!root) root = std::make_unique<Node>();
  Node* node = root.get();
  const std::size_t levels = std::min(config_.depth - 2, tokens.size());
  const std::string wildcard(kWildcard);
  for (std::size_t i = 0; i < levels; ++i) {
    const std::string& token = tokens[i];
    auto& children = node->children;
    if (auto it = children.find(token); it != children.end()) {
      node = it->second.get();
      continue;
    }
    const bool has_wildcard_child = children.count(wildcard) > 0;
    const std::string* key = &wildcard;
    if (!has_digit(token)) {
      if (has_wildcard_child) {
        if (children.size() < config_.max_children) key = &token;
      } else if (children.size() + 1 < config_.max_children) {
        key = &token;
      }
    }
    auto& child = children[*key];
    if (!child) child = std::make_unique<Node>();
    node = child.get();
  }
  return *node;
}

namespace {

// Every literal position equals the input token.
bool fits(const std::vector<std::string>& tmpl, std::span<const std::string> tokens) {
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (!is_wildcard(tmpl[i]) && tmpl[i] != tokens[i]) return false;
  }
  return true;
}

// Share of positions whose literal template token equals the input token.
double similarity(const std::vector<std::string>& tmpl,
                  std::span<const std::string> tokens) {
  std::size_t equal = 0;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (!is_wildcard(tmpl[i]) && tmpl[i] == tokens[i]) ++equal;
  }
  return static_cast<double>(equal) / static_cast<double>(tmpl.size());
}

}  // namespace

ParseOutcome TemplateMiner::parse(std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(ErrorCode::kEmptyMessage, "no tokens to parse");
  Node& leaf = route(tokens);

  // A template that already covers the line wins outright; among the rest
  // the highest similarity wins, ties going to the lowest id.
  const Template* best = nullptr;
  double best_similarity = -1.0;
  for (TemplateId id : leaf.templates) {
    const auto& candidate = templates_[id - 1];
    if (fits(candidate.tokens, tokens)) {
      best = &candidate;
      best_similarity = 2.0;
      break;
    }
    const double sim = similarity(candidate.tokens, tokens);
    if (sim > best_similarity) {
      best = &candidate;
      best_similarity = sim;
    }
  }

  ParseOutcome outcome;
  if (best != nullptr && best_similarity >= config_.similarity_threshold) {
    auto& tmpl = templates_[best->id - 1];
    bool changed = false;
    for (std::size_t i = 0; i < tmpl.tokens.size(); ++i) {
      if (!is_wildcard(tmpl.tokens[i]) && tmpl.tokens[i] != tokens[i]) {
        tmpl.tokens[i] = std::string(kWildcard);
        changed = true;
      }
    }
    ++tmpl.match_count;
    auto& revisions = history_[tmpl.id - 1];
    if (changed) revisions.push_back(tmpl.tokens);
    outcome.template_id = tmpl.id;
    outcome.revision = revisions.size() - 1;
    outcome.parameters = extract_parameters(tmpl, tokens);
    return outcome;
  }

  const auto id = static_cast<TemplateId>(templates_.size() + 1);
  Template created;
  created.id = id;
  created.tokens.assign(tokens.begin(), tokens.end());
  created.match_count = 1;
  history_.push_back({created.tokens});
  templates_.push_back(std::move(created));
  leaf.templates.push_back(id);
  outcome.template_id = id;
  outcome.parameters = extract_parameters(templates_.back(), tokens);
  return outcome;
}

const Template* TemplateMiner::find(TemplateId id) const {
  if (id == kEmptyTemplateId || id > templates_.size()) return nullptr;
  return &templates_[id - 1];
}

std::vector<Template> TemplateMiner::templates() const { return templates_; }

std::span<const std::string> TemplateMiner::revision_tokens(
    TemplateId id, std::size_t revision) const {
  if (id == kEmptyTemplateId || id > history_.size() ||
      revision >= history_[id - 1].size()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown template revision");
  }
  return history_[id - 1][revision];
}

std::vector<std::string> extract_parameters(const Template& tmpl,
                                            std::span<const std::string> tokens) {
  std::vector<std::string> params;
  const auto n = std::min(tmpl.tokens.size(), tokens.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (is_wildcard(tmpl.tokens[i])) params.push_back(tokens[i]);
  }
  return params;
}

CorpusParse parse_corpus(std::span<const LogRecord> records,
                         const ParseTreeConfig& config,
                         std::span<const MaskRule> rules) {
  TemplateMiner miner(config);
  CorpusParse result;
  result.records.resize(records.size());
  std::vector<std::size_t> revisions(records.size(), 0);

  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& parsed = result.records[i];
    parsed.line_no = records[i].line_no;
    const auto tokens = tokenize_and_mask(records[i].content, rules);
    if (tokens.empty()) {
      parsed.template_id = kEmptyTemplateId;
      ++result.empty_count;
      continue;
    }
    auto outcome = miner.parse(tokens);
    parsed.template_id = outcome.template_id;
    parsed.parameters = std::move(outcome.parameters);
    revisions[i] = outcome.revision;
  }

  // Templates may have gained wildcards after a record was parsed. The
  // record's tokens are its revision's literals plus its stored parameters,
  // so the final parameter list can be rebuilt without re-tokenizing.
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& parsed = result.records[i];
    if (parsed.template_id == kEmptyTemplateId) continue;
    const Template* final_tmpl = miner.find(parsed.template_id);
    const auto seen = miner.revision_tokens(parsed.template_id, revisions[i]);
    if (seen.size() == final_tmpl->tokens.size() &&
        std::equal(seen.begin(), seen.end(), final_tmpl->tokens.begin())) {
      continue;
    }
    std::vector<std::string> rebuilt;
    rebuilt.reserve(final_tmpl->wildcard_count());
    std::size_t next_param = 0;
    for (std::size_t pos = 0; pos < seen.size(); ++pos) {
      const bool was_wild = is_wildcard(seen[pos]);
      if (is_wildcard(final_tmpl->tokens[pos])) {
        rebuilt.push_back(was_wild ? parsed.parameters[next_param] : seen[pos]);
      }
      if (was_wild) ++next_param;
    }
    parsed.parameters = std::move(rebuilt);
  }

  result.templates = miner.templates();
  return result;
}

const Template* find_template(std::span<const Template> templates, TemplateId id) {
  if (id == kEmptyTemplateId) return nullptr;
  if (id <= templates.size() && templates[id - 1].id == id) return &templates[id - 1];
  auto it = std::lower_bound(
      templates.begin(), templates.end(), id,
      [](const Template& t, TemplateId value) { return t.id < value; });
  if (it != templates.end() && it->id == id) return &*it;
  return nullptr;
}

std::string format_template_dump(std::span<const Template> templates) {
  std::string out;
  for (const auto& t : templates) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["match_count"] = t.match_count;
    j["template"] = t.str();
    out += detail::dump_compact(j);
    out += '\n';
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_json_line(std::string_view text, std::string_view what, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kIo, std::string(what) + " line " +
                                      std::to_string(line_no) + " is not a JSON object");
    }
    try {
      fn(j);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo, std::string(what) + " line " +
                                      std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<Template> parse_template_dump(std::string_view text) {
  std::vector<Template> out;
  for_each_json_line(text, "template dump", [&](const nlohmann::json& j) {
    Template t;
    t.id = j.at("id").get<TemplateId>();
    t.match_count = j.at("match_count").get<std::size_t>();
    const auto joined = j.at("template").get<std::string>();
    t.tokens = tokenize_and_mask(joined, {});
    out.push_back(std::move(t));
  });
  std::sort(out.begin(), out.end(),
            [](const Template& a, const Template& b) { return a.id < b.id; });
  return out;
}

std::string format_parsed_dump(std::span<const ParsedRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["line_no"] = r.line_no;
    j["template_id"] = r.template_id;
    j["parameters"] = r.parameters;
    out += detail::dump_compact(j);
    out += '\n';
  }
  return out;
}

std::vector<ParsedRecord> parse_parsed_dump(std::string_view text) {
  std::vector<ParsedRecord> out;
  for_each_json_line(text, "parsed-record dump", [&](const nlohmann::json& j) {
    ParsedRecord r;
    r.line_no = j.at("line_no").get<std::size_t>();
    r.template_id = j.at("template_id").get<TemplateId>();
    r.parameters = j.at("parameters").get<std::vector<std::string>>();
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace logllm
