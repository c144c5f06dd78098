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

#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "logllm/diagnostics.hpp"
#include "logllm/error.hpp"
#include "logllm/ingest.hpp"
#include "logllm/io.hpp"

namespace logllm {
namespace {

using testing::bgl_line;

class CaptureWarnings {
 public:
  CaptureWarnings()
      : previous_(set_warning_handler([this](std::string_view m) { messages.emplace_back(m); })) {}
  ~CaptureWarnings() { set_warning_handler(previous_); }
  std::vector<std::string> messages;

 private:
  WarningHandler previous_;
};

TEST(LoadDataset, DashMarkerIsNormal) {
  const auto line = bgl_line(false, "instruction cache parity error corrected");
  LogRecord r;
  std::string reason;
  ASSERT_TRUE(parse_log_line(line, 0, DatasetSpec::bgl(), r, reason));
  EXPECT_EQ(r.label, Label::kNormal);
  EXPECT_EQ(r.content, "instruction cache parity error corrected");
  EXPECT_EQ(r.timestamp, "1117838570");
  EXPECT_EQ(r.raw_line, line);
}

TEST(LoadDataset, AlertCategoryIsAnomalous) {
  const std::string line =
      "KERNDTLB 1117838573 2005.06.03 R23-M0-NE-C:J05-U01 2005-06-03-15.42.53.276129 "
      "R23-M0-NE-C:J05-U01 RAS KERNEL FATAL data TLB error interrupt";
  LogRecord r;
  std::string reason;
  ASSERT_TRUE(parse_log_line(line, 3, DatasetSpec::bgl(), r, reason));
  EXPECT_EQ(r.label, Label::kAnomalous);
  EXPECT_EQ(r.content, "data TLB error interrupt");
  EXPECT_EQ(r.line_no, 3u);
}

TEST(LoadDataset, EmptyTextGivesNoRecords) {
  const auto result = load_dataset_text("", DatasetSpec::bgl());
  EXPECT_TRUE(result.records.empty());
  EXPECT_TRUE(result.rejects.empty());
}

TEST(LoadDataset, BlankLinesSkippedButCounted) {
  const std::string text = bgl_line(false, "a b", 0) + "\n\n   \n" + bgl_line(true, "c d", 1) + "\r\n";
  const auto result = load_dataset_text(text, DatasetSpec::bgl());
  ASSERT_EQ(result.records.size(), 2u);
  EXPECT_EQ(result.records[0].line_no, 0u);
  EXPECT_EQ(result.records[1].line_no, 3u);
  EXPECT_EQ(result.records[1].content, "c d");
}

TEST(LoadDataset, ShortLineIsQuarantined) {
  DatasetSpec spec = DatasetSpec::bgl();
  spec.max_reject_rate = 0.5;
  CaptureWarnings warnings;
  const std::string text = bgl_line(false, "ok line", 0) + "\n- 1117838570 truncated\n" +
                           bgl_line(false, "another", 2) + "\n";
  const auto result = load_dataset_text(text, spec);
  EXPECT_EQ(result.records.size(), 2u);
  ASSERT_EQ(result.rejects.size(), 1u);
  EXPECT_EQ(result.rejects[0].line_no, 1u);
  EXPECT_EQ(warnings.messages.size(), 1u);
}

TEST(LoadDataset, RejectCeilingFailsTheLoad) {
  const std::string text = bgl_line(false, "ok", 0) + "\nshort line\n";
  try {
    load_dataset_text(text, DatasetSpec::bgl());
    FAIL() << "expected a reject-rate error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRejectRateExceeded);
  }
}

TEST(LoadDataset, MissingFileIsIoError) {
  try {
    load_dataset("/nonexistent/bgl.log", DatasetSpec::bgl());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/bgl.log"), std::string::npos);
  }
}

TEST(LoadDataset, LabelTotalsMatchIndependentScan) {
  const auto text = testing::synthetic_log_text(3000, 8, 11);
  const auto result = load_dataset_text(text, DatasetSpec::bgl());
  std::size_t expected = 0;
  for (const auto& line : split_lines(text)) {
    if (line.empty()) continue;
    if (line.substr(0, line.find(' ')) != "-") ++expected;
  }
  std::size_t anomalous = 0;
  for (const auto& r : result.records) anomalous += r.anomalous() ? 1 : 0;
  EXPECT_EQ(anomalous, expected);
  EXPECT_GT(expected, 0u);
  // line numbers strictly increase
  for (std::size_t i = 1; i < result.records.size(); ++i) {
    EXPECT_LT(result.records[i - 1].line_no, result.records[i].line_no);
  }
}

TEST(LoadDataset, DeterministicAcrossLoads) {
  testing::TempDir dir;
  write_file_atomic(dir / "x.log", testing::synthetic_log_text(200, 4, 5));
  const auto a = load_dataset(dir / "x.log", DatasetSpec::bgl());
  const auto b = load_dataset(dir / "x.log", DatasetSpec::bgl());
  EXPECT_EQ(a.records, b.records);
}

TEST(LoadDataset, RejectsReportFormat) {
  testing::TempDir dir;
  std::vector<RejectedLine> rejects{{4, "too short"}, {9, "also short"}};
  write_rejects_report(dir / "rejects.tsv", rejects);
  EXPECT_EQ(read_file(dir / "rejects.tsv"), "4\ttoo short\n9\talso short\n");
}

TEST(Split, TenRecords) {
  const auto records = testing::synthetic_records(std::vector<bool>(10, false));
  const auto [train, test] = split_chronological(records, 0.8);
  ASSERT_EQ(train.size(), 8u);
  ASSERT_EQ(test.size(), 2u);
  EXPECT_EQ(train.front().line_no, 0u);
  EXPECT_EQ(test.front().line_no, 8u);
}

TEST(Split, FullBglCorpusSize) {
  // 4747963 * 0.8 = 3798370.4
  EXPECT_EQ(split_sizes(4747963, 0.8).train_size, 3798370u);
  EXPECT_EQ(split_sizes(4747963, 0.8).test_size, 949593u);
}

TEST(Split, SingleRecordWarnsAndTrainsOnNothing) {
  CaptureWarnings warnings;
  const auto records = testing::synthetic_records({true});
  const auto [train, test] = split_chronological(records, 0.8);
  EXPECT_TRUE(train.empty());
  EXPECT_EQ(test.size(), 1u);
  EXPECT_EQ(warnings.messages.size(), 1u);
}

TEST(Split, EmptyInputIsEmptyDataset) {
  try {
    split_sizes(0, 0.8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
}

TEST(Split, PartitionProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    const std::size_t thousandths = 1 + rng() % 999;
    const double ratio = static_cast<double>(thousandths) / 1000.0;
    const auto s = split_sizes(n, ratio);
    EXPECT_EQ(s.train_size + s.test_size, n);
    // floor by exact integer arithmetic
    EXPECT_EQ(s.train_size, n * thousandths / 1000) << n << " " << ratio;
  }
}

TEST(Sample, WholeTestSetWhenSizesMatch) {
  const auto records = testing::synthetic_records(std::vector<bool>(2000, false));
  SubsetPolicy policy;
  policy.min_anomaly_fraction = 0.0;
  EXPECT_EQ(sample_consecutive_start(records, policy), 0u);
  EXPECT_EQ(sample_consecutive(records, policy).size(), 2000u);
}

TEST(Sample, SeededDrawLandsInQualifyingSet) {
  std::vector<bool> labels(10000, false);
  for (std::size_t i = 4000; i < 6000; ++i) labels[i] = true;
  const auto records = testing::synthetic_records(labels);
  SubsetPolicy policy;
  policy.min_anomaly_fraction = 0.05;
  policy.max_anomaly_fraction = 0.95;
  policy.seed = 7;

  // Brute-force oracle: every start whose slice fraction is in bounds.
  std::vector<bool> qualifies(records.size() - policy.size + 1, false);
  for (std::size_t s = 0; s < qualifies.size(); ++s) {
    std::size_t a = 0;
    for (std::size_t i = s; i < s + policy.size; ++i) a += labels[i] ? 1 : 0;
    const double f = static_cast<double>(a) / static_cast<double>(policy.size);
    qualifies[s] = f >= 0.05 && f <= 0.95;
  }
  const auto start = sample_consecutive_start(records, policy);
  EXPECT_TRUE(qualifies[start]);
  EXPECT_LT(start, 6000u);
  EXPECT_GT(start + policy.size, 4000u);
  EXPECT_EQ(sample_consecutive_start(records, policy), start);
}

TEST(Sample, ImpossibleBoundsExhaust) {
  const auto records = testing::synthetic_records(std::vector<bool>(3000, false));
  SubsetPolicy policy;
  policy.min_anomaly_fraction = 0.99;
  policy.max_anomaly_fraction = 1.0;
  policy.max_retries = 10;
  try {
    sample_consecutive(records, policy);
    FAIL();
  } catch (const SamplingExhausted& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSamplingExhausted);
    EXPECT_EQ(e.fractions_seen().size(), 10u);
  }
}

TEST(Sample, TooFewRecords) {
  const auto records = testing::synthetic_records(std::vector<bool>(10, true));
  EXPECT_THROW(sample_consecutive(records, SubsetPolicy{}), Error);
}

}  // namespace
}  // namespace logllm
