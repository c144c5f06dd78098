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

#include "logllm/sequencer.hpp"

#include <algorithm>

#include "json_util.hpp"
#include "logllm/error.hpp"

namespace logllm {

const char* to_string(SequenceView view) {
  switch (view) {
    case SequenceView::kRaw: return "raw";
    case SequenceView::kContent: return "content";
    case SequenceView::kEvent: return "event";
  }
  return "content";
}

std::optional<SequenceView> parse_sequence_view(std::string_view text) {
  if (text == "raw") return SequenceView::kRaw;
  if (text == "content") return SequenceView::kContent;
  if (text == "event") return SequenceView::kEvent;
  return std::nullopt;
}

std::vector<Window> make_windows(std::span<const LogRecord> records,
                                 std::size_t window_size,
                                 std::span<const ParsedRecord> parsed) {
  if (window_size == 0) {
    throw Error(ErrorCode::kInvalidWindowSize, "window size must be >= 1");
  }
  if (!parsed.empty() && parsed.size() != records.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "parsed records are not aligned with log records");
  }
  std::vector<Window> windows;
  windows.reserve((records.size() + window_size - 1) / window_size);
  for (std::size_t start = 0; start < records.size(); start += window_size) {
    const std::size_t count = std::min(window_size, records.size() - start);
    Window w;
    w.index = windows.size();
    w.records = records.subspan(start, count);
    if (!parsed.empty()) w.parsed = parsed.subspan(start, count);
    w.partial = count < window_size;
    w.label = std::any_of(w.records.begin(), w.records.end(),
                          [](const LogRecord& r) { return r.anomalous(); })
                  ? Label::kAnomalous
                  : Label::kNormal;
    windows.push_back(w);
  }
  return windows;
}

std::string event_text(const Template& tmpl) {
  std::string out;
  for (const auto& token : tmpl.tokens) {
    std::string stripped;
    std::size_t pos = 0;
    while (pos < token.size()) {
      const auto hit = token.find(kWildcard, pos);
      if (hit == std::string::npos) {
        stripped.append(token, pos, std::string::npos);
        break;
      }
      stripped.append(token, pos, hit - pos);
      pos = hit + kWildcard.size();
    }
    if (stripped.empty()) continue;
    if (!out.empty()) out += ' ';
    out += stripped;
  }
  return out;
}

std::string render_item(const LogRecord& record, const ParsedRecord* parsed,
                        SequenceView view, std::span<const Template> templates) {
  switch (view) {
    case SequenceView::kRaw:
      return record.raw_line;
    case SequenceView::kContent:
      return record.content;
    case SequenceView::kEvent: {
      if (parsed == nullptr) {
        throw Error(ErrorCode::kMissingParse,
                    "line " + std::to_string(record.line_no) + " has no parse");
      }
      if (parsed->template_id == kEmptyTemplateId) return {};
      const Template* tmpl = find_template(templates, parsed->template_id);
      if (tmpl == nullptr) {
        throw Error(ErrorCode::kMissingParse,
                    "line " + std::to_string(record.line_no) + " refers to unknown template " +
                        std::to_string(parsed->template_id));
      }
      return event_text(*tmpl);
    }
  }
  return {};
}

LogSequence render_sequence(const Window& window, SequenceView view,
                            std::span<const Template> templates) {
  LogSequence seq;
  seq.window_index = window.index;
  seq.view = view;
  seq.label = window.label;
  seq.items.reserve(window.records.size());
  for (std::size_t i = 0; i < window.records.size(); ++i) {
    const ParsedRecord* parsed = i < window.parsed.size() ? &window.parsed[i] : nullptr;
    seq.items.push_back(render_item(window.records[i], parsed, view, templates));
  }
  return seq;
}

std::string format_sequence_dump(std::span<const LogSequence> sequences) {
  std::string out;
  for (const auto& s : sequences) {
    nlohmann::ordered_json j;
    j["window_index"] = s.window_index;
    j["view"] = to_string(s.view);
    j["label"] = to_string(s.label);
    j["items"] = s.items;
    out += detail::dump_compact(j);
    out += '\n';
  }
  return out;
}

std::vector<LogSequence> parse_sequence_dump(std::string_view text) {
  std::vector<LogSequence> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kIo, "sequence dump line is not a JSON object");
    }
    try {
      LogSequence s;
      s.window_index = j.at("window_index").get<std::size_t>();
      const auto view = parse_sequence_view(j.at("view").get<std::string>());
      if (!view) throw Error(ErrorCode::kIo, "unknown view in sequence dump");
      s.view = *view;
      s.label = j.at("label").get<std::string>() == "anomalous" ? Label::kAnomalous
                                                               : Label::kNormal;
      s.items = j.at("items").get<std::vector<std::string>>();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo, std::string("sequence dump: ") + e.what());
    }
  }
  return out;
}

}  // namespace logllm
