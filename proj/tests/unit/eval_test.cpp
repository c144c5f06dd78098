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
#include "logllm/error.hpp"
#include "logllm/eval.hpp"
#include "logllm/io.hpp"

namespace logllm {
namespace {

TEST(Accumulate, MatchesNaiveTally) {
  std::mt19937_64 rng(5);
  ConfusionCounts counts;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool predicted = rng() & 1;
    const bool actual = rng() % 3 == 0;
    counts = accumulate(counts, predicted, actual);
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && !actual) ++tn;
    if (!predicted && actual) ++fn;
  }
  EXPECT_EQ(counts, (ConfusionCounts{tp, fp, tn, fn}));
  EXPECT_EQ(counts.total(), 1000u);
}

TEST(Metrics, KnownCounts) {
  const auto m = compute_metrics({4, 10, 20, 6});
  EXPECT_DOUBLE_EQ(m.precision, 4.0 / 14.0);
  EXPECT_DOUBLE_EQ(m.recall, 0.4);
  EXPECT_DOUBLE_EQ(m.specificity, 20.0 / 30.0);
  EXPECT_DOUBLE_EQ(m.f1, 2 * (4.0 / 14.0) * 0.4 / (4.0 / 14.0 + 0.4));
}

TEST(Metrics, ZeroDenominators) {
  EXPECT_EQ(compute_metrics({0, 0, 0, 0}), Metrics{});
  const auto all_negative = compute_metrics({0, 0, 7, 0});
  EXPECT_EQ(all_negative.precision, 0.0);
  EXPECT_EQ(all_negative.recall, 0.0);
  EXPECT_EQ(all_negative.f1, 0.0);
  EXPECT_EQ(all_negative.specificity, 1.0);
  const auto missed = compute_metrics({0, 0, 0, 3});
  EXPECT_EQ(missed.recall, 0.0);
  EXPECT_EQ(missed.specificity, 0.0);
}

TEST(Metrics, ExhaustiveSmallCounts) {
  std::size_t tuples = 0;
  for (std::size_t tp = 0; tp <= 5; ++tp)
    for (std::size_t fp = 0; fp <= 5; ++fp)
      for (std::size_t tn = 0; tn <= 5; ++tn)
        for (std::size_t fn = 0; fn <= 5; ++fn) {
          ++tuples;
          const auto m = compute_metrics({tp, fp, tn, fn});
          const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
          const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
          const double s = tn + fp ? double(tn) / double(tn + fp) : 0.0;
          const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
          ASSERT_NEAR(m.precision, p, 1e-12);
          ASSERT_NEAR(m.recall, r, 1e-12);
          ASSERT_NEAR(m.specificity, s, 1e-12);
          ASSERT_NEAR(m.f1, f, 1e-12);
        }
  EXPECT_EQ(tuples, 1296u);
}

TEST(Metrics, F1FromPrintedRatios) {
  EXPECT_EQ(format_metric(f1_score(0.587, 1.000)), "0.740");
  EXPECT_EQ(format_metric(f1_score(0.455, 1.000)), "0.625");
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(Rounding, HalfUp) {
  EXPECT_EQ(format_metric(0.1235), "0.124");
  EXPECT_EQ(format_metric(0.1234), "0.123");
  EXPECT_EQ(format_metric(0.73976), "0.740");
  EXPECT_EQ(format_metric(1.0), "1.000");
  EXPECT_EQ(format_metric(0.0), "0.000");
  EXPECT_DOUBLE_EQ(round_half_up(0.0005, 3), 0.001);
}

TEST(UnparsablePolicyNames, RoundTrip) {
  for (auto p : {UnparsablePolicy::kAnomalous, UnparsablePolicy::kNormal,
                 UnparsablePolicy::kExclude}) {
    EXPECT_EQ(parse_unparsable_policy(to_string(p)), p);
  }
  EXPECT_FALSE(parse_unparsable_policy("drop"));
}

TEST(ExperimentConfigValidate, Rejections) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  auto expect_config_error = [](const ExperimentConfig& bad) {
    try {
      bad.validate();
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig);
    }
  };
  auto bad = c;
  bad.window_sizes.clear();
  expect_config_error(bad);
  bad = c;
  bad.window_sizes = {10, 0};
  expect_config_error(bad);
  bad = c;
  bad.mode = ShotMode::kFewShot;
  bad.shot_count = 0;
  expect_config_error(bad);
  bad = c;
  bad.parallelism = 0;
  expect_config_error(bad);
  bad = c;
  bad.request.temperature = -0.5;
  expect_config_error(bad);
}

ResultRow sample_row(std::size_t window, ConfusionCounts counts) {
  ResultRow r;
  r.dataset = "BGL";
  r.prompt_id = PromptId::kP1;
  r.mode = ShotMode::kFewShot;
  r.view = SequenceView::kEvent;
  r.injection_type = InjectionType::kAbnormal;
  r.window_size = window;
  r.counts = counts;
  r.metrics = compute_metrics(counts);
  r.windows_evaluated = counts.total() + 1;
  r.unparsable_count = 2;
  r.excluded_count = 1;
  return r;
}

TEST(Report, DelimitedOneRow) {
  const std::vector<ResultRow> rows{sample_row(10, {4, 10, 20, 6})};
  const auto text = format_report(rows, ReportFormat::kDelimited);
  EXPECT_EQ(text,
            "dataset,prompt_id,mode,view,injection_type,window_size,tp,fp,tn,fn,"
            "windows_evaluated,unparsable_count,excluded_count,f1,precision,recall,specificity\n"
            "BGL,P1,few_shot,event,abnormal,10,4,10,20,6,41,2,1,0.333,0.286,0.400,0.667\n");
}

TEST(Report, RoundTripsBothFormats) {
  const std::vector<ResultRow> rows{sample_row(10, {4, 10, 20, 6}),
                                    sample_row(20, {0, 0, 9, 0}),
                                    sample_row(30, {3, 1, 1, 2})};
  for (auto format : {ReportFormat::kDelimited, ReportFormat::kRecords}) {
    EXPECT_EQ(parse_report(format_report(rows, format), format), rows);
  }
}

TEST(Report, WriteAndRead) {
  testing::TempDir dir;
  const std::vector<ResultRow> rows{sample_row(50, {1, 2, 3, 4})};
  write_report(rows, dir / "r.csv", ReportFormat::kDelimited);
  EXPECT_EQ(read_report(dir / "r.csv", ReportFormat::kDelimited), rows);
}

TEST(Report, EmptyRowsRejected) {
  testing::TempDir dir;
  try {
    write_report({}, dir / "r.csv", ReportFormat::kDelimited);
    ADD_FAILURE() << "accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "r.csv"));
}

TEST(Report, MalformedInputsRejected) {
  EXPECT_THROW((void)parse_report("wrong,header\n", ReportFormat::kDelimited), Error);
  const auto good = format_report(std::vector<ResultRow>{sample_row(10, {1, 1, 1, 1})},
                                  ReportFormat::kDelimited);
  auto bad = good;
  bad.replace(bad.find(",P1,"), 4, ",P9,");
  EXPECT_THROW((void)parse_report(bad, ReportFormat::kDelimited), Error);
  EXPECT_THROW((void)parse_report("{\"dataset\":1}\n", ReportFormat::kRecords), Error);
}

TEST(Reference, ShippedRowsParse) {
  const auto rows = load_reference_rows(testing::repo_data_dir() / "reference_results.csv");
  std::size_t ours = 0;
  for (const auto& r : rows) {
    if (r.method != "llm") continue;
    ++ours;
    EXPECT_NEAR(f1_score(r.precision, r.recall), r.f1, 0.002)
        << r.table << ' ' << r.dataset << ' ' << r.setting << ' ' << r.window_size;
  }
  EXPECT_EQ(ours, 30u);
}

TEST(Reference, CommentsAndHeaderSkipped) {
  const auto rows = parse_reference_rows(
      "# note\ntable,dataset,method,setting,window_size,f1,precision,recall,specificity\n"
      "II,BGL,DeepLog,-,10,0.5,0.5,0.5,0.5\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].method, "DeepLog");
  EXPECT_THROW((void)parse_reference_rows("h\nII,BGL,x\n"), Error);
}

TEST(ComparisonTable, Layout) {
  auto zero = sample_row(10, {4, 10, 20, 6});
  zero.mode = ShotMode::kZeroShot;
  auto few = sample_row(10, {5, 0, 30, 5});
  const std::vector<ReferenceRow> refs{
      {"II", "BGL", "DeepLog", "-", 10, 0.5, 0.4, 0.667, 0.9},
      {"II", "BGL", "llm", "zero_shot", 10, 0.1, 0.1, 0.1, 0.1},
      {"II", "Spirit", "DeepLog", "-", 10, 0.2, 0.2, 0.2, 0.2}};
  const auto table = format_comparison_table(std::vector<ResultRow>{zero, few}, refs);
  EXPECT_EQ(table,
            "BGL\n"
            "window  metric  DeepLog     zero-shot   few-shot\n"
            "10      F       0.500       0.333       0.667\n"
            "10      P       0.400       0.286       1.000\n"
            "10      R       0.667       0.400       0.500\n"
            "10      S       0.900       0.667       1.000\n"
            "\n");
}

}  // namespace
}  // namespace logllm
