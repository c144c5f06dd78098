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

#include "run_config.hpp"

#include <algorithm>

#include "logllm/error.hpp"
#include "logllm/io.hpp"

namespace logllm::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::kConfig, message);
}

template <typename T, typename Parser>
T parse_named(const std::string& text, Parser parser, const char* what) {
  const auto v = parser(text);
  if (!v) config_error(std::string("unknown ") + what + " '" + text + "'");
  return *v;
}

template <typename T, typename Parser>
std::vector<T> parse_named_list(const ordered_json& list, Parser parser, const char* what) {
  std::vector<T> out;
  for (const auto& item : list) out.push_back(parse_named<T>(item.get<std::string>(), parser, what));
  return out;
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, std::string(what) + " not found: " + path.string());
  }
}

bool same_kind(const ordered_json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    // An integer field must stay integral.
    return !(a.is_number_integer() && b.is_number_float());
  }
  return a.type() == b.type();
}

}  // namespace

ordered_json default_document() {
  const DatasetSpec ds = DatasetSpec::bgl();
  const ParseTreeConfig drain;
  const SubsetPolicy subset;
  const ExperimentConfig exp;
  const BackendConfig backend;

  ordered_json doc;
  doc["dataset"] = {{"name", ds.name},
                    {"path", ""},
                    {"field_delimiter", std::string(1, ds.field_delimiter)},
                    {"label_field_index", ds.label_field_index},
                    {"normal_marker", ds.normal_marker},
                    {"timestamp_first_index", ds.timestamp_first_index},
                    {"timestamp_last_index", ds.timestamp_last_index},
                    {"content_start_index", ds.content_start_index},
                    {"max_reject_rate", ds.max_reject_rate}};
  doc["drain"] = {{"depth", drain.depth},
                  {"similarity_threshold", drain.similarity_threshold},
                  {"max_children", drain.max_children}};
  doc["mask_rules"] = ordered_json::array();
  doc["corpus"] = {{"train_ratio", 0.8},
                   {"sample_subset", true},
                   {"subset_size", subset.size},
                   {"min_anomaly_fraction", subset.min_anomaly_fraction},
                   {"max_anomaly_fraction", subset.max_anomaly_fraction},
                   {"max_retries", subset.max_retries},
                   {"seed", subset.seed}};
  doc["prompt"] = {{"id", to_string(exp.prompt_id)}, {"template_p1", ""}, {"template_p2", ""}};
  doc["injection"] = {{"mode", to_string(exp.mode)},
                      {"type", to_string(exp.injection_type)},
                      {"shot_count", exp.shot_count},
                      {"granularity", to_string(exp.shot_granularity)}};
  doc["experiment"] = {{"window_sizes", exp.window_sizes},
                       {"view", to_string(exp.view)},
                       {"seed", exp.seed},
                       {"exclude_partial_windows", exp.exclude_partial_windows},
                       {"unparsable_policy", to_string(exp.unparsable_policy)},
                       {"parallelism", backend.max_in_flight}};
  doc["request"] = {{"model_id", exp.request.model_id},
                    {"temperature", exp.request.temperature},
                    {"max_output_tokens", exp.request.max_output_tokens}};
  doc["backend"] = {{"kind", to_string(backend.kind)},
                    {"endpoint_url", "https://api.openai.com/v1/chat/completions"},
                    {"auth_token_env", backend.auth_token_env},
                    {"cassette", ""},
                    {"max_in_flight", backend.max_in_flight},
                    {"requests_per_minute", backend.requests_per_minute},
                    {"max_retries", backend.max_retries},
                    {"backoff_base_ms", backend.backoff_base.count()},
                    {"request_timeout_ms", backend.request_timeout.count()}};
  const SweepGrid grid;
  ordered_json sweep;
  sweep["prompts"] = ordered_json::array();
  for (auto p : grid.prompts) sweep["prompts"].push_back(to_string(p));
  sweep["modes"] = ordered_json::array();
  for (auto m : grid.modes) sweep["modes"].push_back(to_string(m));
  sweep["views"] = ordered_json::array();
  for (auto v : grid.views) sweep["views"].push_back(to_string(v));
  sweep["injections"] = ordered_json::array();
  for (auto i : grid.injections) sweep["injections"].push_back(to_string(i));
  doc["sweep"] = sweep;
  doc["reference_results"] = "";
  doc["output_dir"] = "out";
  return doc;
}

void merge_document(ordered_json& doc, const json& patch, const std::string& where) {
  if (!patch.is_object()) config_error("expected an object at '" + where + "'");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!doc.contains(it.key())) config_error("unknown config key '" + path + "'");
    auto& slot = doc[it.key()];
    if (slot.is_object()) {
      merge_document(slot, it.value(), path);
    } else if (!same_kind(slot, it.value())) {
      config_error("config key '" + path + "' expects " + std::string(slot.type_name()) +
                   ", got " + it.value().type_name());
    } else {
      slot = it.value();
    }
  }
}

void apply_override(ordered_json& doc, const std::string& path, const std::string& value) {
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;

  json patch = std::move(parsed);
  std::string rest = path;
  std::vector<std::string> keys;
  for (std::size_t dot; (dot = rest.find('.')) != std::string::npos; rest = rest.substr(dot + 1)) {
    keys.push_back(rest.substr(0, dot));
  }
  keys.push_back(rest);
  const ordered_json* target = &doc;
  for (const auto& k : keys) {
    if (!target->is_object() || !target->contains(k)) {
      config_error("unknown config key '" + path + "'");
    }
    target = &target->at(k);
  }
  // A string field takes the text verbatim even when it would parse as JSON.
  if (target->is_string() && !patch.is_string()) patch = value;
  for (auto k = keys.rbegin(); k != keys.rend(); ++k) patch = json{{*k, std::move(patch)}};
  merge_document(doc, patch);
}

ordered_json load_config_document(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto patch = json::parse(text, nullptr, false, /*ignore_comments=*/true);
  if (patch.is_discarded()) config_error("config file is not valid JSON: " + path.string());
  auto doc = default_document();
  merge_document(doc, patch);
  return doc;
}

RunConfig config_from_document(const ordered_json& doc) {
  RunConfig c;
  try {
    const auto& d = doc.at("dataset");
    c.dataset.name = d.at("name").get<std::string>();
    c.dataset_path = d.at("path").get<std::string>();
    const auto delim = d.at("field_delimiter").get<std::string>();
    if (delim.size() != 1) config_error("dataset.field_delimiter must be one character");
    c.dataset.field_delimiter = delim[0];
    c.dataset.label_field_index = d.at("label_field_index").get<std::size_t>();
    c.dataset.normal_marker = d.at("normal_marker").get<std::string>();
    c.dataset.timestamp_first_index = d.at("timestamp_first_index").get<std::size_t>();
    c.dataset.timestamp_last_index = d.at("timestamp_last_index").get<std::size_t>();
    c.dataset.content_start_index = d.at("content_start_index").get<std::size_t>();
    c.dataset.max_reject_rate = d.at("max_reject_rate").get<double>();

    const auto& dr = doc.at("drain");
    c.drain.depth = dr.at("depth").get<std::size_t>();
    c.drain.similarity_threshold = dr.at("similarity_threshold").get<double>();
    c.drain.max_children = dr.at("max_children").get<std::size_t>();

    for (const auto& r : doc.at("mask_rules")) {
      MaskRuleSpec spec;
      spec.name = r.at("name").get<std::string>();
      spec.pattern = r.at("pattern").get<std::string>();
      if (r.contains("replacement")) spec.replacement = r.at("replacement").get<std::string>();
      if (r.contains("needs_digit")) spec.needs_digit = r.at("needs_digit").get<bool>();
      c.mask_rules.push_back(std::move(spec));
    }

    const auto& co = doc.at("corpus");
    c.train_ratio = co.at("train_ratio").get<double>();
    c.sample_subset = co.at("sample_subset").get<bool>();
    c.subset.size = co.at("subset_size").get<std::size_t>();
    c.subset.min_anomaly_fraction = co.at("min_anomaly_fraction").get<double>();
    c.subset.max_anomaly_fraction = co.at("max_anomaly_fraction").get<double>();
    c.subset.max_retries = co.at("max_retries").get<std::size_t>();
    c.subset.seed = co.at("seed").get<std::uint64_t>();

    auto& e = c.experiment;
    const auto& pr = doc.at("prompt");
    e.prompt_id = parse_named<PromptId>(pr.at("id").get<std::string>(), parse_prompt_id, "prompt");
    for (auto [key, id] : {std::pair{"template_p1", PromptId::kP1}, {"template_p2", PromptId::kP2}}) {
      const auto p = pr.at(key).get<std::string>();
      if (!p.empty()) c.template_paths[id] = p;
    }

    const auto& in = doc.at("injection");
    e.mode = parse_named<ShotMode>(in.at("mode").get<std::string>(), parse_shot_mode, "mode");
    e.injection_type = parse_named<InjectionType>(in.at("type").get<std::string>(),
                                                  parse_injection_type, "injection type");
    e.shot_count = in.at("shot_count").get<std::size_t>();
    e.shot_granularity = parse_named<ShotGranularity>(in.at("granularity").get<std::string>(),
                                                      parse_shot_granularity, "shot granularity");

    const auto& ex = doc.at("experiment");
    e.dataset = c.dataset.name;
    e.window_sizes = ex.at("window_sizes").get<std::vector<std::size_t>>();
    e.view = parse_named<SequenceView>(ex.at("view").get<std::string>(), parse_sequence_view,
                                       "view");
    e.seed = ex.at("seed").get<std::uint64_t>();
    e.exclude_partial_windows = ex.at("exclude_partial_windows").get<bool>();
    e.unparsable_policy = parse_named<UnparsablePolicy>(
        ex.at("unparsable_policy").get<std::string>(), parse_unparsable_policy,
        "unparsable policy");
    e.parallelism = ex.at("parallelism").get<std::size_t>();

    const auto& rq = doc.at("request");
    e.request.model_id = rq.at("model_id").get<std::string>();
    e.request.temperature = rq.at("temperature").get<double>();
    e.request.max_output_tokens = rq.at("max_output_tokens").get<std::size_t>();

    const auto& b = doc.at("backend");
    c.backend.kind = parse_named<BackendKind>(b.at("kind").get<std::string>(), parse_backend_kind,
                                              "backend");
    c.backend.endpoint_url = b.at("endpoint_url").get<std::string>();
    c.backend.auth_token_env = b.at("auth_token_env").get<std::string>();
    c.backend.model_id = e.request.model_id;
    c.backend.cassette_path = b.at("cassette").get<std::string>();
    c.backend.max_in_flight = b.at("max_in_flight").get<std::size_t>();
    c.backend.requests_per_minute = b.at("requests_per_minute").get<std::size_t>();
    c.backend.max_retries = b.at("max_retries").get<std::size_t>();
    c.backend.backoff_base = std::chrono::milliseconds(b.at("backoff_base_ms").get<long long>());
    c.backend.request_timeout =
        std::chrono::milliseconds(b.at("request_timeout_ms").get<long long>());

    const auto& s = doc.at("sweep");
    c.grid.prompts = parse_named_list<PromptId>(s.at("prompts"), parse_prompt_id, "prompt");
    c.grid.modes = parse_named_list<ShotMode>(s.at("modes"), parse_shot_mode, "mode");
    c.grid.views = parse_named_list<SequenceView>(s.at("views"), parse_sequence_view, "view");
    c.grid.injections = parse_named_list<InjectionType>(s.at("injections"), parse_injection_type,
                                                        "injection type");

    const auto ref = doc.at("reference_results").get<std::string>();
    if (!ref.empty()) c.reference_path = ref;
    c.output_dir = doc.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    config_error(std::string("bad config value: ") + e.what());
  }
  return c;
}

void RunConfig::validate(bool check_backend) const {
  if (dataset_path.empty()) config_error("dataset.path is not set (use --dataset)");
  require_file(dataset_path, "dataset");
  dataset.validate();
  drain.validate();
  subset.validate();
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) config_error("corpus.train_ratio must lie in (0, 1)");
  (void)build_mask_rules();
  for (const auto& [id, path] : template_paths) require_file(path, "prompt template");
  if (output_dir.empty()) config_error("output_dir is empty");
  if (reference_path) require_file(*reference_path, "reference results");
  if (check_backend) {
    backend.validate();
    if (backend.kind == BackendKind::kReplay) require_file(backend.cassette_path, "cassette");
    if (backend.request_timeout.count() <= 0) config_error("backend.request_timeout_ms must be > 0");
  }
  // Window sizes may be empty here; commands that need them report it.
  auto probe = experiment;
  if (probe.window_sizes.empty()) probe.window_sizes = {1};
  probe.validate();
}

std::vector<MaskRule> RunConfig::build_mask_rules() const {
  if (mask_rules.empty()) return default_mask_rules();
  std::vector<MaskRule> out;
  for (const auto& r : mask_rules) out.emplace_back(r.name, r.pattern, r.replacement, r.needs_digit);
  return out;
}

CorpusSettings RunConfig::corpus_settings() const {
  CorpusSettings s;
  s.train_ratio = train_ratio;
  s.subset = subset;
  s.sample_subset = sample_subset;
  s.drain = drain;
  s.mask_rules = build_mask_rules();
  return s;
}

ExperimentConfig RunConfig::experiment_for(PromptId prompt, ShotMode mode, SequenceView view,
                                           InjectionType injection) const {
  ExperimentConfig e = experiment;
  e.prompt_id = prompt;
  e.mode = mode;
  e.view = view;
  e.injection_type = injection;
  e.template_override.reset();
  if (auto it = template_paths.find(prompt); it != template_paths.end()) {
    auto tmpl = load_prompt_template(it->second);
    if (tmpl.id != prompt) {
      config_error("template " + it->second.string() + " declares " + to_string(tmpl.id) +
                   ", configured for " + to_string(prompt));
    }
    e.template_override = std::move(tmpl);
  }
  return e;
}

}  // namespace logllm::cli
