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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace logllm {

enum class Label : std::uint8_t { kNormal, kAnomalous };

const char* to_string(Label label);

struct LogRecord {
  std::size_t line_no = 0;  // zero-based physical line in the source file
  Label label = Label::kNormal;
  std::string timestamp;  // opaque, never parsed
  std::string content;
  std::string raw_line;

  bool anomalous() const noexcept { return label == Label::kAnomalous; }
  bool operator==(const LogRecord&) const = default;
};

/// Field layout of one dataset's log lines. Fields are maximal runs of
/// non-delimiter characters; runs of delimiters separate fields.
struct DatasetSpec {
  std::string name = "BGL";
  char field_delimiter = ' ';
  std::size_t label_field_index = 0;
  std::string normal_marker = "-";
  std::size_t timestamp_first_index = 1;
  std::size_t timestamp_last_index = 1;  // inclusive
  std::size_t content_start_index = 9;
  /// Fraction of malformed lines tolerated before loading fails.
  double max_reject_rate = 0.001;

  void validate() const;

  /// Blue Gene/L: label, epoch, date, node, time, node, type, component,
  /// level, message.
  static DatasetSpec bgl();
  /// Spirit: label, epoch, date, host, month, day, time, host/facility,
  /// message.
  static DatasetSpec spirit();
};

struct RejectedLine {
  std::size_t line_no = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<LogRecord> records;
  std::vector<RejectedLine> rejects;
};

/// Parses one line. Returns false (and fills `reason`) for a malformed line.
bool parse_log_line(std::string_view line, std::size_t line_no,
                    const DatasetSpec& spec, LogRecord& out,
                    std::string& reason);

LoadResult load_dataset_text(std::string_view text, const DatasetSpec& spec);

/// Loads one record per non-blank line. Malformed lines are quarantined into
/// `rejects`; throws Error(kRejectRateExceeded) when their share of non-blank
/// lines exceeds spec.max_reject_rate, Error(kIo) when unreadable.
LoadResult load_dataset(const std::filesystem::path& path,
                        const DatasetSpec& spec);

/// One "line_no<TAB>reason" line per reject.
void write_rejects_report(const std::filesystem::path& path,
                          std::span<const RejectedLine> rejects);

struct SplitIndex {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

/// Train is the earliest floor(N * train_ratio) records; test is the rest.
SplitIndex split_sizes(std::size_t total, double train_ratio);

std::pair<std::vector<LogRecord>, std::vector<LogRecord>> split_chronological(
    std::span<const LogRecord> records, double train_ratio);

struct SubsetPolicy {
  std::size_t size = 2000;
  double min_anomaly_fraction = 0.02;
  double max_anomaly_fraction = 0.98;
  std::size_t max_retries = 100;
  std::uint64_t seed = 42;

  void validate() const;
};

/// Start offset of a qualifying consecutive slice of `test`.
/// Throws SamplingExhausted when no draw qualifies within max_retries.
std::size_t sample_consecutive_start(std::span<const LogRecord> test,
                                     const SubsetPolicy& policy);

std::vector<LogRecord> sample_consecutive(std::span<const LogRecord> test,
                                          const SubsetPolicy& policy);

}  // namespace logllm
