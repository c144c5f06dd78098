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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logllm/drain.hpp"
#include "logllm/ingest.hpp"
#include "logllm/llm.hpp"
#include "logllm/prompts.hpp"
#include "logllm/responses.hpp"
#include "logllm/sequencer.hpp"

namespace logllm {

/// Anomalous is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct Metrics {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  bool operator==(const Metrics&) const = default;
};

ConfusionCounts accumulate(ConfusionCounts counts, bool predicted, bool actual);

/// Each ratio is 0 when its denominator is 0.
Metrics compute_metrics(const ConfusionCounts& counts);

double f1_score(double precision, double recall);

/// Half-up rounding at `decimals` places; a 1e-9 nudge absorbs binary
/// representation error such as 0.1235 being stored as 0.12349999...
double round_half_up(double value, int decimals = 3);

/// Three-decimal text, e.g. 0.73976 -> "0.740".
std::string format_metric(double value);

enum class UnparsablePolicy { kAnomalous, kNormal, kExclude };

const char* to_string(UnparsablePolicy policy);
std::optional<UnparsablePolicy> parse_unparsable_policy(std::string_view text);

struct ExperimentConfig {
  std::string dataset = "BGL";
  std::vector<std::size_t> window_sizes{10, 20, 30, 40, 50};
  PromptId prompt_id = PromptId::kP2;
  ShotMode mode = ShotMode::kZeroShot;
  SequenceView view = SequenceView::kContent;
  InjectionType injection_type = InjectionType::kNormal;
  std::size_t shot_count = 5;
  ShotGranularity shot_granularity = ShotGranularity::kSingleLog;
  std::uint64_t seed = 42;
  bool exclude_partial_windows = false;
  UnparsablePolicy unparsable_policy = UnparsablePolicy::kAnomalous;
  RequestParams request;
  /// Replaces the canonical template for prompt_id when set.
  std::optional<PromptTemplate> template_override;
  /// Windows dispatched concurrently; the backend bounds actual in-flight calls.
  std::size_t parallelism = 1;

  /// Throws Error(kConfig).
  void validate() const;
};

struct ResultRow {
  std::string dataset;
  PromptId prompt_id = PromptId::kP2;
  ShotMode mode = ShotMode::kZeroShot;
  SequenceView view = SequenceView::kContent;
  InjectionType injection_type = InjectionType::kNormal;
  std::size_t window_size = 0;
  ConfusionCounts counts;
  Metrics metrics;
  std::size_t windows_evaluated = 0;
  std::size_t unparsable_count = 0;
  std::size_t excluded_count = 0;

  bool operator==(const ResultRow&) const = default;
};

/// Views over caller-owned storage. `templates` must cover every template id
/// referenced by the parsed spans when the event view is used.
struct ExperimentInputs {
  std::span<const LogRecord> evaluation;
  std::span<const ParsedRecord> evaluation_parsed;
  std::span<const LogRecord> shot_pool;
  std::span<const ParsedRecord> shot_pool_parsed;
  std::span<const Template> templates;
};

struct CorpusSettings {
  double train_ratio = 0.8;
  SubsetPolicy subset;
  /// When false the whole test split is evaluated.
  bool sample_subset = true;
  ParseTreeConfig drain;
  std::vector<MaskRule> mask_rules = default_mask_rules();
};

/// Full dataset parsed once, split chronologically, with the evaluation
/// subset drawn from the test split.
struct PreparedCorpus {
  std::vector<LogRecord> records;
  std::vector<ParsedRecord> parsed;
  std::vector<Template> templates;
  std::size_t train_size = 0;
  std::size_t subset_begin = 0;  // absolute index into records
  std::size_t subset_size = 0;

  ExperimentInputs inputs() const;
};

PreparedCorpus prepare_corpus(std::vector<LogRecord> records,
                              const CorpusSettings& settings);

/// Seeded draw of labeled examples from the shot pool, rendered in the
/// configured view. Empty for zero-shot. Throws Error(kInvalidInjection) when
/// the pool lacks enough examples of a required class.
std::vector<Shot> select_shots(const ExperimentConfig& config, std::size_t window_size,
                               const ExperimentInputs& inputs);

struct WindowOutcome {
  std::size_t window_index = 0;
  std::size_t window_size = 0;
  Label actual = Label::kNormal;
  bool partial = false;
  std::string prompt_digest;
  std::size_t prompt_bytes = 0;
  std::optional<std::string> reformat_digest;
  std::string response_text;
  std::optional<Verdict> verdict;  // empty when terminally unparsable
  bool predicted = false;
  bool excluded = false;
};

struct DetectionRun {
  ResultRow row;
  std::vector<WindowOutcome> outcomes;
  std::vector<PromptAuditEntry> audit;
};

/// Window, render, prompt, complete, resolve and score one window size.
/// Cassette misses are collected and raised together as
/// MissingCassetteEntries; unparsable replies are tallied.
DetectionRun run_detection(const ExperimentConfig& config, std::size_t window_size,
                           const ExperimentInputs& inputs, CompletionBackend& backend);

/// One row per configured window size, in ascending window-size order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const ExperimentInputs& inputs,
                                      CompletionBackend& backend,
                                      std::vector<DetectionRun>* runs = nullptr);

/// Every request a run would send before any reply is known (reformat
/// requests depend on replies and are not included).
std::vector<std::string> planned_digests(const ExperimentConfig& config,
                                         std::size_t window_size,
                                         const ExperimentInputs& inputs);

/// Digests a replay run would look up but `cassette` lacks, in window order.
/// Stored replies that would need a reformat have the reformat request
/// checked too.
std::vector<std::string> missing_digests(const ExperimentConfig& config,
                                         const ExperimentInputs& inputs,
                                         const Cassette& cassette);

/// JSON lines, one per window.
std::string format_verdict_dump(std::span<const WindowOutcome> outcomes);

enum class ReportFormat { kDelimited, kRecords };

std::string format_report(std::span<const ResultRow> rows, ReportFormat format);
std::vector<ResultRow> parse_report(std::string_view text, ReportFormat format);
/// Throws Error(kInvalidArgument) for no rows, Error(kIo) when unwritable.
void write_report(std::span<const ResultRow> rows, const std::filesystem::path& path,
                  ReportFormat format);
std::vector<ResultRow> read_report(const std::filesystem::path& path, ReportFormat format);

/// Published reference numbers, one row per (table, dataset, method,
/// setting, window size).
struct ReferenceRow {
  std::string table;
  std::string dataset;
  std::string method;
  std::string setting;
  std::size_t window_size = 0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
};

std::vector<ReferenceRow> parse_reference_rows(std::string_view csv);
std::vector<ReferenceRow> load_reference_rows(const std::filesystem::path& path);

/// Window size by metric (F, P, R, S) against zero-/few-shot columns, plus
/// any reference baselines recorded for the same dataset.
std::string format_comparison_table(std::span<const ResultRow> rows,
                                    std::span<const ReferenceRow> references = {});

}  // namespace logllm
