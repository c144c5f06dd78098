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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "logllm/drain.hpp"
#include "logllm/eval.hpp"
#include "logllm/ingest.hpp"
#include "logllm/llm.hpp"

namespace logllm::cli {

struct MaskRuleSpec {
  std::string name;
  std::string pattern;
  std::string replacement = std::string(kWildcard);
  bool needs_digit = false;
};

/// Grid swept by the sweep and replay-verify commands.
struct SweepGrid {
  std::vector<PromptId> prompts{PromptId::kP2};
  std::vector<ShotMode> modes{ShotMode::kZeroShot, ShotMode::kFewShot};
  std::vector<SequenceView> views{SequenceView::kContent};
  std::vector<InjectionType> injections{InjectionType::kNormal};
};

struct RunConfig {
  DatasetSpec dataset;
  std::filesystem::path dataset_path;
  ParseTreeConfig drain;
  /// Empty means the built-in rules.
  std::vector<MaskRuleSpec> mask_rules;
  double train_ratio = 0.8;
  bool sample_subset = true;
  SubsetPolicy subset;
  std::map<PromptId, std::filesystem::path> template_paths;
  ExperimentConfig experiment;
  SweepGrid grid;
  BackendConfig backend;
  std::optional<std::filesystem::path> reference_path;
  std::filesystem::path output_dir = "out";

  /// Throws Error(kConfig) for inconsistent values and Error(kIo) for
  /// referenced files that do not exist. Commands that never call a model
  /// pass check_backend = false.
  void validate(bool check_backend = true) const;

  std::vector<MaskRule> build_mask_rules() const;
  CorpusSettings corpus_settings() const;
  /// The experiment config for one grid point, template override included.
  ExperimentConfig experiment_for(PromptId prompt, ShotMode mode, SequenceView view,
                                  InjectionType injection) const;
};

/// The full document with every field at its default.
nlohmann::ordered_json default_document();

/// Sets a dotted path such as "drain.depth" in `doc`. `value` is read as
/// JSON when it parses, otherwise as a string. Unknown paths throw
/// Error(kConfig).
void apply_override(nlohmann::ordered_json& doc, const std::string& path,
                    const std::string& value);

/// Overlays `patch` onto `doc`; keys absent from `doc` throw Error(kConfig).
void merge_document(nlohmann::ordered_json& doc, const nlohmann::json& patch,
                    const std::string& where = "");

/// Throws Error(kConfig) for malformed or mistyped values.
RunConfig config_from_document(const nlohmann::ordered_json& doc);

nlohmann::ordered_json load_config_document(const std::filesystem::path& path);

}  // namespace logllm::cli
