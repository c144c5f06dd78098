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

#include "logllm/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "logllm/diagnostics.hpp"
#include "logllm/error.hpp"
#include "logllm/io.hpp"

namespace logllm {

const char* to_string(Label label) {
  return label == Label::kAnomalous ? "anomalous" : "normal";
}

void DatasetSpec::validate() const {
  if (timestamp_first_index > timestamp_last_index) {
    throw Error(ErrorCode::kConfig,
                "dataset " + name + ": timestamp field range is inverted");
  }
  if (normal_marker.empty()) {
    throw Error(ErrorCode::kConfig, "dataset " + name + ": empty normal_marker");
  }
  if (!(max_reject_rate >= 0.0 && max_reject_rate <= 1.0)) {
    throw Error(ErrorCode::kConfig,
                "dataset " + name + ": max_reject_rate must lie in [0, 1]");
  }
}

DatasetSpec DatasetSpec::bgl() { return DatasetSpec{}; }

DatasetSpec DatasetSpec::spirit() {
  DatasetSpec spec;
  spec.name = "Spirit";
  spec.content_start_index = 8;
  return spec;
}

namespace {

struct FieldSpan {
  std::size_t begin;
  std::size_t end;
};

std::vector<FieldSpan> field_spans(std::string_view line, char delim) {
  std::vector<FieldSpan> spans;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == delim) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != delim) ++i;
    spans.push_back({start, i});
  }
  return spans;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r';
  });
}

}  // namespace

bool parse_log_line(std::string_view line, std::size_t line_no,
                    const DatasetSpec& spec, LogRecord& out,
                    std::string& reason) {
  const auto spans = field_spans(line, spec.field_delimiter);
  const std::size_t needed =
      std::max({spec.label_field_index + 1, spec.timestamp_last_index + 1,
                spec.content_start_index});
  if (spans.size() < needed) {
    reason = "expected at least " + std::to_string(needed) + " fields, found " +
             std::to_string(spans.size());
    return false;
  }
  const auto& lf = spans[spec.label_field_index];
  const auto label_field = line.substr(lf.begin, lf.end - lf.begin);

  out.line_no = line_no;
  out.label = label_field == spec.normal_marker ? Label::kNormal : Label::kAnomalous;
  const auto ts_begin = spans[spec.timestamp_first_index].begin;
  const auto ts_end = spans[spec.timestamp_last_index].end;
  out.timestamp.assign(line.substr(ts_begin, ts_end - ts_begin));
  if (spec.content_start_index < spans.size()) {
    out.content.assign(line.substr(spans[spec.content_start_index].begin));
  } else {
    out.content.clear();
  }
  out.raw_line.assign(line);
  return true;
}

LoadResult load_dataset_text(std::string_view text, const DatasetSpec& spec) {
  spec.validate();
  LoadResult result;
  std::size_t line_no = 0;
  std::size_t start = 0;
  LogRecord record;
  std::string reason;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!is_blank(line)) {
      if (parse_log_line(line, line_no, spec, record, reason)) {
        result.records.push_back(std::move(record));
        record = LogRecord{};
      } else {
        result.rejects.push_back({line_no, reason});
      }
    }
    ++line_no;
    start = end + 1;
  }

  const auto total = result.records.size() + result.rejects.size();
  if (total > 0 && !result.rejects.empty()) {
    const double rate =
        static_cast<double>(result.rejects.size()) / static_cast<double>(total);
    if (rate > spec.max_reject_rate) {
      std::ostringstream os;
      os << result.rejects.size() << " of " << total
         << " lines malformed (first at line " << result.rejects.front().line_no
         << ": " << result.rejects.front().reason << "); ceiling is "
         << spec.max_reject_rate;
      throw Error(ErrorCode::kRejectRateExceeded, os.str());
    }
    warn(std::to_string(result.rejects.size()) + " malformed line(s) quarantined in " +
         spec.name);
  }
  return result;
}

LoadResult load_dataset(const std::filesystem::path& path,
                        const DatasetSpec& spec) {
  return load_dataset_text(read_file(path), spec);
}

void write_rejects_report(const std::filesystem::path& path,
                          std::span<const RejectedLine> rejects) {
  std::string out;
  for (const auto& r : rejects) {
    out += std::to_string(r.line_no);
    out += '\t';
    out += r.reason;
    out += '\n';
  }
  write_file_atomic(path, out);
}

SplitIndex split_sizes(std::size_t total, double train_ratio) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_ratio must lie in (0, 1)");
  }
  if (total == 0) throw Error(ErrorCode::kEmptyDataset, "no records to split");
  // The relative nudge keeps products such as 100 * 0.29 from flooring one
  // below the exact rational value.
  const long double product = static_cast<long double>(total) * train_ratio;
  auto train = static_cast<std::size_t>(std::floor(product * (1.0L + 1e-12L)));
  train = std::min(train, total);
  if (train == 0) warn("chronological split leaves the training set empty");
  return {train, total - train};
}

std::pair<std::vector<LogRecord>, std::vector<LogRecord>> split_chronological(
    std::span<const LogRecord> records, double train_ratio) {
  const auto sizes = split_sizes(records.size(), train_ratio);
  return {{records.begin(), records.begin() + sizes.train_size},
          {records.begin() + sizes.train_size, records.end()}};
}

void SubsetPolicy::validate() const {
  if (size == 0) throw Error(ErrorCode::kInvalidArgument, "subset size must be >= 1");
  if (!(0.0 <= min_anomaly_fraction && min_anomaly_fraction <= max_anomaly_fraction &&
        max_anomaly_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "subset anomaly bounds must satisfy 0 <= min <= max <= 1");
  }
  if (max_retries == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 1");
  }
}

std::size_t sample_consecutive_start(std::span<const LogRecord> test,
                                     const SubsetPolicy& policy) {
  policy.validate();
  if (test.size() < policy.size) {
    throw Error(ErrorCode::kInvalidArgument,
                "test set has " + std::to_string(test.size()) +
                    " records, subset needs " + std::to_string(policy.size));
  }
  std::vector<std::size_t> prefix(test.size() + 1, 0);
  for (std::size_t i = 0; i < test.size(); ++i) {
    prefix[i + 1] = prefix[i] + (test[i].anomalous() ? 1 : 0);
  }
  const std::size_t candidates = test.size() - policy.size + 1;
  std::mt19937_64 rng(policy.seed);
  std::vector<double> seen;
  seen.reserve(policy.max_retries);
  for (std::size_t attempt = 0; attempt < policy.max_retries; ++attempt) {
    // Modulo keeps the draw identical across standard library vendors.
    const std::size_t start = static_cast<std::size_t>(rng() % candidates);
    const auto anomalies = prefix[start + policy.size] - prefix[start];
    const double fraction =
        static_cast<double>(anomalies) / static_cast<double>(policy.size);
    if (fraction >= policy.min_anomaly_fraction &&
        fraction <= policy.max_anomaly_fraction) {
      return start;
    }
    seen.push_back(fraction);
  }
  throw SamplingExhausted(std::move(seen), policy.min_anomaly_fraction,
                          policy.max_anomaly_fraction);
}

std::vector<LogRecord> sample_consecutive(std::span<const LogRecord> test,
                                          const SubsetPolicy& policy) {
  const auto start = sample_consecutive_start(test, policy);
  return {test.begin() + static_cast<std::ptrdiff_t>(start),
          test.begin() + static_cast<std::ptrdiff_t>(start + policy.size)};
}

}  // namespace logllm
