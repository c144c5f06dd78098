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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logllm/drain.hpp"
#include "logllm/ingest.hpp"

namespace logllm {

/// A tumbling chunk of consecutive records. The spans view storage owned by
/// the caller and stay valid only as long as it does.
struct Window {
  std::size_t index = 0;
  std::span<const LogRecord> records;
  std::span<const ParsedRecord> parsed;  // empty, or aligned with records
  Label label = Label::kNormal;
  bool partial = false;
};

enum class SequenceView { kRaw, kContent, kEvent };

const char* to_string(SequenceView view);
std::optional<SequenceView> parse_sequence_view(std::string_view text);

struct LogSequence {
  std::size_t window_index = 0;
  SequenceView view = SequenceView::kContent;
  Label label = Label::kNormal;
  std::vector<std::string> items;
  bool operator==(const LogSequence&) const = default;
};

/// Throws Error(kInvalidWindowSize) for size 0 and Error(kInvalidArgument)
/// when `parsed` is non-empty but not aligned with `records`.
std::vector<Window> make_windows(std::span<const LogRecord> records,
                                 std::size_t window_size,
                                 std::span<const ParsedRecord> parsed = {});

/// Template text with every "<*>" removed and whitespace collapsed.
std::string event_text(const Template& tmpl);

/// The event view needs the window's parsed records and the template list
/// they refer to; a missing parse raises Error(kMissingParse).
LogSequence render_sequence(const Window& window, SequenceView view,
                            std::span<const Template> templates = {});

/// Renders one record the way render_sequence would inside a window.
std::string render_item(const LogRecord& record, const ParsedRecord* parsed,
                        SequenceView view, std::span<const Template> templates);

/// JSON lines: {"window_index", "view", "label", "items"}.
std::string format_sequence_dump(std::span<const LogSequence> sequences);
std::vector<LogSequence> parse_sequence_dump(std::string_view text);

}  // namespace logllm
