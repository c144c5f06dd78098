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
#include "logllm/ingest.hpp"
#include "logllm/sequencer.hpp"
#include "properties.hpp"

namespace logllm {
namespace {

std::vector<LogRecord> normal_records(std::size_t n) {
  return testing::synthetic_records(std::vector<bool>(n, false));
}

TEST(Windows, HundredBySizeFifty) {
  const auto records = normal_records(100);
  const auto w = make_windows(records, 50);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_FALSE(w[0].partial);
  EXPECT_FALSE(w[1].partial);
}

TEST(Windows, TrailingPartialIsKeptAndFlagged) {
  const auto records = normal_records(105);
  const auto w = make_windows(records, 50);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0].records.size(), 50u);
  EXPECT_EQ(w[1].records.size(), 50u);
  EXPECT_EQ(w[2].records.size(), 5u);
  EXPECT_TRUE(w[2].partial);
}

TEST(Windows, OneAnomalyMarksTheWindow) {
  std::vector<bool> labels(50, false);
  labels[17] = true;
  const auto records = testing::synthetic_records(labels);
  const auto w = make_windows(records, 50);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].label, Label::kAnomalous);
}

TEST(Windows, ZeroSizeRejected) {
  const auto records = normal_records(3);
  try {
    make_windows(records, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidWindowSize);
  }
}

TEST(Windows, MisalignedParseRejected) {
  const auto records = normal_records(3);
  std::vector<ParsedRecord> parsed(2);
  EXPECT_THROW(make_windows(records, 2, parsed), Error);
}

TEST(Windows, EmptyInputGivesNoWindows) {
  EXPECT_TRUE(make_windows({}, 10).empty());
}

TEST(Windows, PropertiesOnRandomCorpora) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<bool> labels(rng() % 400);
    const double p = static_cast<double>(rng() % 100) / 1000.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      labels[i] = static_cast<double>(rng() % 1000) / 1000.0 < p;
    }
    const auto records = testing::synthetic_records(labels, trial);
    const std::size_t size = 1 + rng() % 60;
    ASSERT_EQ(testing::check_window_properties(records, size), "") << trial;
  }
}

TEST(Render, EventViewDropsWildcards) {
  Template t{1, {"open_demux:", "connect", "<*>"}, 2};
  EXPECT_EQ(event_text(t), "open_demux: connect");
  Template u{2, {"<*>", "a", "<*>", "<*>", "b", "x<*>y"}, 1};
  EXPECT_EQ(event_text(u), "a b xy");
}

TEST(Render, ContentViewIsVerbatim) {
  const auto records = testing::synthetic_records({false, true, false, false});
  const auto w = make_windows(records, 4);
  const auto seq = render_sequence(w[0], SequenceView::kContent);
  ASSERT_EQ(seq.items.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(seq.items[i], records[i].content);
  EXPECT_EQ(seq.label, Label::kAnomalous);
}

TEST(Render, RawItemEndsWithContentItem) {
  std::string text;
  for (std::size_t i = 0; i < 5; ++i) {
    text += testing::bgl_line(i == 2, "ciod: LOGIN chdir(/p/gb1/stella) failed: No such file", i);
    text += '\n';
  }
  const auto loaded = load_dataset_text(text, DatasetSpec::bgl());
  const auto w = make_windows(loaded.records, 5);
  const auto raw = render_sequence(w[0], SequenceView::kRaw);
  const auto content = render_sequence(w[0], SequenceView::kContent);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_GT(raw.items[i].size(), content.items[i].size());
    EXPECT_EQ(raw.items[i].substr(raw.items[i].size() - content.items[i].size()),
              content.items[i]);
  }
}

TEST(Render, EventViewNeedsParse) {
  const auto records = normal_records(2);
  const auto w = make_windows(records, 2);
  try {
    render_sequence(w[0], SequenceView::kEvent);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingParse);
  }
}

TEST(Render, EventItemsAreClean) {
  const auto records = testing::synthetic_records(std::vector<bool>(300, false), 4);
  const auto corpus = parse_corpus(records, {}, default_mask_rules());
  const auto windows = make_windows(records, 30, corpus.records);
  for (const auto& w : windows) {
    const auto seq = render_sequence(w, SequenceView::kEvent, corpus.templates);
    ASSERT_EQ(seq.items.size(), w.records.size());
    for (const auto& item : seq.items) {
      EXPECT_EQ(item.find("<*>"), std::string::npos) << item;
      EXPECT_EQ(item.find("  "), std::string::npos) << item;
      if (!item.empty()) {
        EXPECT_NE(item.front(), ' ');
        EXPECT_NE(item.back(), ' ');
      }
    }
    EXPECT_EQ(seq, render_sequence(w, SequenceView::kEvent, corpus.templates));
  }
}

TEST(Render, EmptyContentRendersEmptyEvent) {
  auto records = normal_records(1);
  records[0].content.clear();
  const auto corpus = parse_corpus(records, {}, default_mask_rules());
  const auto w = make_windows(records, 1, corpus.records);
  EXPECT_EQ(render_sequence(w[0], SequenceView::kEvent, corpus.templates).items,
            std::vector<std::string>{""});
}

TEST(Dump, SequenceRoundTrip) {
  const auto records = testing::synthetic_records({false, true, false});
  const auto w = make_windows(records, 2);
  std::vector<LogSequence> seqs;
  for (const auto& win : w) seqs.push_back(render_sequence(win, SequenceView::kRaw));
  EXPECT_EQ(parse_sequence_dump(format_sequence_dump(seqs)), seqs);
}

TEST(View, NamesRoundTrip) {
  for (auto v : {SequenceView::kRaw, SequenceView::kContent, SequenceView::kEvent}) {
    EXPECT_EQ(parse_sequence_view(to_string(v)), v);
  }
  EXPECT_FALSE(parse_sequence_view("events"));
}

}  // namespace
}  // namespace logllm
