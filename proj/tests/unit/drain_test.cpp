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

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "logllm/drain.hpp"
#include "logllm/error.hpp"
#include "properties.hpp"

namespace logllm {
namespace {

using Tokens = std::vector<std::string>;

TEST(Mask, IpWithPortBecomesOneWildcard) {
  const auto rules = default_mask_rules();
  EXPECT_EQ(tokenize_and_mask("connect 172.30.71.32:44020", rules), (Tokens{"connect", "<*>"}));
}

TEST(Mask, PlainTextPassesThrough) {
  const auto rules = default_mask_rules();
  EXPECT_EQ(tokenize_and_mask("data TLB error interrupt", rules),
            (Tokens{"data", "TLB", "error", "interrupt"}));
}

TEST(Mask, EmptyContent) {
  EXPECT_TRUE(tokenize_and_mask("", default_mask_rules()).empty());
  EXPECT_TRUE(tokenize_and_mask(" \t ", default_mask_rules()).empty());
}

TEST(Mask, DefaultRuleCoverage) {
  const auto rules = default_mask_rules();
  EXPECT_EQ(tokenize_and_mask("generating core.2275", rules), (Tokens{"generating", "<*>"}));
  EXPECT_EQ(tokenize_and_mask("CE sym 2, at 0x0b85eee0, mask 0x05", rules),
            (Tokens{"CE", "sym", "<*>,", "at", "<*>,", "mask", "<*>"}));
  EXPECT_EQ(tokenize_and_mask("Connection refused (111) in open_demux", rules),
            (Tokens{"Connection", "refused", "(<*>)", "in", "open_demux"}));
  EXPECT_EQ(tokenize_and_mask("took -3.25 s", rules), (Tokens{"took", "<*>", "s"}));
  // identifiers with embedded digits stay literal
  EXPECT_EQ(tokenize_and_mask("bglio78 R02-M1-N0", rules), (Tokens{"bglio78", "R02-M1-N0"}));
}

TEST(Mask, TokenCountNeverChanges) {
  const auto rules = default_mask_rules();
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const auto contents = testing::random_contents(rng, 5);
    for (const auto& c : contents) {
      EXPECT_EQ(tokenize_and_mask(c, rules).size(), tokenize_and_mask(c, {}).size()) << c;
    }
  }
}

TEST(Mask, RejectsWhitespaceReplacement) {
  EXPECT_THROW(MaskRule("bad", "x", "a b"), Error);
  EXPECT_THROW(MaskRule("bad", "(", "<*>"), Error);
}

TEST(TreeConfig, Validation) {
  ParseTreeConfig c;
  EXPECT_NO_THROW(c.validate());
  c.depth = 2;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.similarity_threshold = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.max_children = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Miner, SameLineTwice) {
  TemplateMiner miner;
  const Tokens line{"instruction", "cache", "parity", "error", "corrected"};
  const auto a = miner.parse(line);
  const auto b = miner.parse(line);
  EXPECT_EQ(a.template_id, b.template_id);
  EXPECT_EQ(miner.find(a.template_id)->match_count, 2u);
  EXPECT_EQ(a.parameters, b.parameters);
}

TEST(Miner, ConnectLinesMergeWithoutMasking) {
  // Equal length 3, two of three tokens equal: 2/3 >= 0.4, position 2 differs.
  TemplateMiner miner;
  const auto a = miner.parse(Tokens{"open_demux:", "connect", "172.30.71.32:44020"});
  const auto b = miner.parse(Tokens{"open_demux:", "connect", "172.30.71.32:43908"});
  EXPECT_EQ(a.template_id, b.template_id);
  EXPECT_EQ(miner.find(b.template_id)->tokens, (Tokens{"open_demux:", "connect", "<*>"}));
  EXPECT_EQ(b.parameters, (Tokens{"172.30.71.32:43908"}));
  EXPECT_EQ(miner.size(), 1u);
}

TEST(Miner, DisjointPairsStaySeparate) {
  TemplateMiner miner;
  const auto a = miner.parse(Tokens{"a", "b"});
  const auto b = miner.parse(Tokens{"c", "d"});
  EXPECT_NE(a.template_id, b.template_id);
  EXPECT_EQ(miner.size(), 2u);
}

TEST(Miner, BelowThresholdCreatesTemplate) {
  // Same route prefix, 2 of 6 equal: 0.333 < 0.4.
  TemplateMiner miner;
  const auto a = miner.parse(Tokens{"p", "q", "r", "s", "t", "u"});
  const auto b = miner.parse(Tokens{"p", "q", "x", "y", "z", "w"});
  EXPECT_NE(a.template_id, b.template_id);
  // 5 of 6 against a, 3 of 6 against b.
  const auto c = miner.parse(Tokens{"p", "q", "r", "s", "t", "w"});
  EXPECT_EQ(c.template_id, a.template_id);
}

TEST(Miner, TiesGoToLowestId) {
  TemplateMiner miner({4, 0.5, 100});
  const auto t1 = miner.parse(Tokens{"k", "m", "a", "b", "c", "d"});
  const auto t2 = miner.parse(Tokens{"k", "m", "e", "f", "g", "h"});  // 2/6 < 0.5
  ASSERT_NE(t1.template_id, t2.template_id);
  // 4/6 against both candidates.
  const auto tie = miner.parse(Tokens{"k", "m", "a", "b", "g", "h"});
  EXPECT_EQ(tie.template_id, t1.template_id);
  EXPECT_EQ(miner.find(t1.template_id)->str(), "k m a b <*> <*>");
}

TEST(Miner, DigitTokensRouteToWildcardBranch) {
  TemplateMiner miner;
  const auto a = miner.parse(Tokens{"job", "17", "started"});
  const auto b = miner.parse(Tokens{"job", "42", "started"});
  EXPECT_EQ(a.template_id, b.template_id);
  EXPECT_EQ(miner.find(a.template_id)->tokens, (Tokens{"job", "<*>", "started"}));
}

TEST(Miner, FullNodeSendsNewTokensToWildcard) {
  TemplateMiner miner({4, 0.4, 3});
  miner.parse(Tokens{"a", "x", "y"});
  miner.parse(Tokens{"b", "x", "y"});
  // Two literal children plus the reserved wildcard slot fill the node.
  const auto c = miner.parse(Tokens{"c", "x", "y"});
  const auto d = miner.parse(Tokens{"d", "x", "y"});
  EXPECT_EQ(c.template_id, d.template_id);
  EXPECT_EQ(miner.find(d.template_id)->tokens, (Tokens{"<*>", "x", "y"}));
}

TEST(Miner, EmptyTokensThrow) {
  TemplateMiner miner;
  try {
    miner.parse(Tokens{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyMessage);
  }
}

TEST(Miner, GeneralizedTemplateStillCoversFirstLine) {
  TemplateMiner miner;
  miner.parse(Tokens{"q", "r", "a", "b", "c"});
  miner.parse(Tokens{"q", "r", "z", "b", "c"});  // -> q r <*> b c
  const auto general = miner.parse(Tokens{"q", "r", "a", "b", "c"});
  EXPECT_EQ(general.template_id, 1u);
  EXPECT_EQ(general.parameters, (Tokens{"a"}));
}

std::vector<LogRecord> records_of(const std::vector<std::string>& contents) {
  return testing::records_from_contents(contents);
}

TEST(Corpus, ThreeIdenticalLines) {
  const auto records = records_of({"data TLB error interrupt", "data TLB error interrupt",
                                   "data TLB error interrupt"});
  const auto out = parse_corpus(records, {}, default_mask_rules());
  ASSERT_EQ(out.templates.size(), 1u);
  EXPECT_EQ(out.templates[0].match_count, 3u);
}

TEST(Corpus, QuotedLinesGiveHandDerivedTemplates) {
  const auto records = records_of({
      "open_demux: connect 172.30.71.32:44020",
      "pbs_mom: Connection refused (111) in open_demux",
      "data TLB error interrupt",
      "open_demux: connect 172.30.71.32:43908",
      "Lustre mount FAILED : bglio78 : block_id : location",
      "MACHINE CHECK DCR read timeout",
  });
  const auto out = parse_corpus(records, {}, default_mask_rules());
  std::vector<std::string> strs;
  for (const auto& t : out.templates) strs.push_back(t.str());
  EXPECT_EQ(strs, (std::vector<std::string>{
                      "open_demux: connect <*>",
                      "pbs_mom: Connection refused (<*>) in open_demux",
                      "data TLB error interrupt",
                      "Lustre mount FAILED : bglio78 : block_id : location",
                      "MACHINE CHECK DCR read timeout",
                  }));
  EXPECT_EQ(out.records[3].template_id, 1u);
  EXPECT_EQ(out.records[3].parameters, (Tokens{"<*>"}));
  EXPECT_EQ(out.templates[0].match_count, 2u);
}

TEST(Corpus, EmptyContentGetsReservedId) {
  const auto records = records_of({"a b", "", "a b"});
  const auto out = parse_corpus(records, {}, {});
  EXPECT_EQ(out.records[1].template_id, kEmptyTemplateId);
  EXPECT_EQ(out.empty_count, 1u);
  EXPECT_EQ(out.templates.size(), 1u);
}

TEST(Corpus, EarlyRecordsGetFinalParameters) {
  const auto records = records_of({"job done alpha", "job done beta", "job done gamma"});
  const auto out = parse_corpus(records, {}, {});
  ASSERT_EQ(out.templates.size(), 1u);
  EXPECT_EQ(out.templates[0].str(), "job done <*>");
  EXPECT_EQ(out.records[0].parameters, (Tokens{"alpha"}));
  EXPECT_EQ(out.records[1].parameters, (Tokens{"beta"}));
  EXPECT_EQ(out.records[2].parameters, (Tokens{"gamma"}));
}

TEST(Corpus, OrderOfDisjointGroupsDoesNotMatter) {
  const std::vector<std::string> group_a{"disk sda1 mounted ok", "disk sdb2 mounted ok",
                                         "disk sdc3 mounted ok"};
  const std::vector<std::string> group_b{"fan speed low on rack", "fan speed high on rack",
                                         "fan speed nominal on rack"};
  auto shapes = [](const std::vector<std::string>& contents) {
    std::set<std::string> out;
    for (const auto& t : parse_corpus(records_of(contents), {}, {}).templates) out.insert(t.str());
    return out;
  };
  std::vector<std::string> forward = group_a;
  forward.insert(forward.end(), group_b.begin(), group_b.end());
  std::vector<std::string> interleaved;
  for (std::size_t i = 0; i < 3; ++i) {
    interleaved.push_back(group_b[2 - i]);
    interleaved.push_back(group_a[2 - i]);
  }
  EXPECT_EQ(shapes(forward), shapes(interleaved));
  EXPECT_EQ(shapes(forward),
            (std::set<std::string>{"disk <*> mounted ok", "fan speed <*> on rack"}));
}

TEST(Corpus, PropertiesOnRandomCorpora) {
  std::mt19937_64 rng(2024);
  const auto rules = default_mask_rules();
  for (int i = 0; i < 100; ++i) {
    const auto contents = testing::random_contents(rng, 50);
    const auto failure =
        testing::check_drain_properties(contents, {}, i % 2 ? std::span<const MaskRule>(rules)
                                                            : std::span<const MaskRule>());
    ASSERT_EQ(failure, "") << "corpus " << i;
  }
}

TEST(Dump, TemplateRoundTrip) {
  const auto out = parse_corpus(records_of({"a 1 b", "a 2 b", "c d"}), {}, default_mask_rules());
  const auto text = format_template_dump(out.templates);
  EXPECT_EQ(text,
            "{\"id\":1,\"match_count\":2,\"template\":\"a <*> b\"}\n"
            "{\"id\":2,\"match_count\":1,\"template\":\"c d\"}\n");
  EXPECT_EQ(parse_template_dump(text), out.templates);
}

TEST(Dump, ParsedRoundTrip) {
  const auto out = parse_corpus(records_of({"x 1", "x 2", ""}), {}, {});
  const auto text = format_parsed_dump(out.records);
  EXPECT_EQ(parse_parsed_dump(text), out.records);
}

TEST(Dump, MalformedLineRaises) {
  EXPECT_THROW(parse_template_dump("not json\n"), Error);
}

}  // namespace
}  // namespace logllm
