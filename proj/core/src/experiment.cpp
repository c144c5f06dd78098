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

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "json_util.hpp"
#include "logllm/error.hpp"
#include "logllm/eval.hpp"

namespace logllm {

PreparedCorpus prepare_corpus(std::vector<LogRecord> records, const CorpusSettings& settings) {
  settings.drain.validate();
  settings.subset.validate();
  const auto split = split_sizes(records.size(), settings.train_ratio);

  PreparedCorpus out;
  auto parse = parse_corpus(records, settings.drain, settings.mask_rules);
  out.parsed = std::move(parse.records);
  out.templates = std::move(parse.templates);
  out.records = std::move(records);
  out.train_size = split.train_size;
  out.subset_begin = split.train_size;
  out.subset_size = split.test_size;

  if (settings.sample_subset) {
    const std::span<const LogRecord> test(out.records.data() + split.train_size,
                                          split.test_size);
    out.subset_begin = split.train_size + sample_consecutive_start(test, settings.subset);
    out.subset_size = std::min(settings.subset.size, split.test_size);
  }
  return out;
}

ExperimentInputs PreparedCorpus::inputs() const {
  ExperimentInputs in;
  in.evaluation = std::span<const LogRecord>(records).subspan(subset_begin, subset_size);
  in.evaluation_parsed = std::span<const ParsedRecord>(parsed).subspan(subset_begin, subset_size);
  in.shot_pool = std::span<const LogRecord>(records).first(train_size);
  in.shot_pool_parsed = std::span<const ParsedRecord>(parsed).first(train_size);
  in.templates = templates;
  return in;
}

namespace {

// Partial Fisher-Yates over candidate indices; the chosen k come back in
// chronological order.
std::vector<std::size_t> draw(std::vector<std::size_t> candidates, std::size_t k,
                              std::mt19937_64& rng, const char* what) {
  if (candidates.size() < k) {
    throw Error(ErrorCode::kInvalidInjection,
                std::string("shot pool has ") + std::to_string(candidates.size()) + " " + what +
                    " examples, " + std::to_string(k) + " needed");
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(k);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

const ParsedRecord* parsed_at(std::span<const ParsedRecord> parsed, std::size_t i) {
  return parsed.empty() ? nullptr : &parsed[i];
}

}  // namespace

std::vector<Shot> select_shots(const ExperimentConfig& config, std::size_t window_size,
                               const ExperimentInputs& inputs) {
  if (config.mode == ShotMode::kZeroShot) return {};
  const bool want_normal = config.injection_type != InjectionType::kAbnormal;
  const bool want_abnormal = config.injection_type != InjectionType::kNormal;
  const std::size_t k = config.shot_count;

  std::vector<Shot> shots;
  if (config.shot_granularity == ShotGranularity::kSingleLog) {
    std::vector<std::size_t> normal, abnormal;
    for (std::size_t i = 0; i < inputs.shot_pool.size(); ++i) {
      (inputs.shot_pool[i].anomalous() ? abnormal : normal).push_back(i);
    }
    std::mt19937_64 rng(config.seed);
    auto emit = [&](const std::vector<std::size_t>& picked, Label label) {
      for (auto i : picked) {
        shots.push_back({{render_item(inputs.shot_pool[i], parsed_at(inputs.shot_pool_parsed, i),
                                      config.view, inputs.templates)},
                         label});
      }
    };
    if (want_normal) emit(draw(std::move(normal), k, rng, "normal"), Label::kNormal);
    if (want_abnormal) emit(draw(std::move(abnormal), k, rng, "anomalous"), Label::kAnomalous);
    return shots;
  }

  const auto windows = make_windows(inputs.shot_pool, window_size, inputs.shot_pool_parsed);
  std::vector<std::size_t> normal, abnormal;
  for (const auto& w : windows) {
    if (w.partial) continue;
    (w.label == Label::kAnomalous ? abnormal : normal).push_back(w.index);
  }
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(window_size)};
  std::mt19937_64 rng(seq);
  auto emit = [&](const std::vector<std::size_t>& picked) {
    for (auto i : picked) {
      auto rendered = render_sequence(windows[i], config.view, inputs.templates);
      shots.push_back({std::move(rendered.items), windows[i].label});
    }
  };
  if (want_normal) emit(draw(std::move(normal), k, rng, "normal window"));
  if (want_abnormal) emit(draw(std::move(abnormal), k, rng, "anomalous window"));
  return shots;
}

namespace {

struct PlannedWindow {
  const Window* window;
  PromptRequest request;
  std::string digest;
};

struct Plan {
  std::vector<Window> windows;
  std::vector<PlannedWindow> items;
};

Plan plan_windows(const ExperimentConfig& config, std::size_t window_size,
                  const ExperimentInputs& inputs) {
  Plan plan;
  plan.windows = make_windows(inputs.evaluation, window_size, inputs.evaluation_parsed);
  if (config.exclude_partial_windows) {
    std::erase_if(plan.windows, [](const Window& w) { return w.partial; });
  }

  InjectionConfig injection;
  injection.mode = config.mode;
  injection.injection_type = config.injection_type;
  injection.shot_count = config.shot_count;
  injection.shots = select_shots(config, window_size, inputs);
  injection.validate();

  const PromptTemplate& tmpl =
      config.template_override ? *config.template_override : canonical_template(config.prompt_id);
  tmpl.validate();

  plan.items.reserve(plan.windows.size());
  for (const auto& w : plan.windows) {
    const auto seq = render_sequence(w, config.view, inputs.templates);
    auto request = build_prompt(tmpl, injection, seq, config.request);
    auto digest = request_digest(request);
    plan.items.push_back({&w, std::move(request), std::move(digest)});
  }
  return plan;
}

struct Slot {
  std::optional<Resolution> resolution;
  std::optional<std::string> missing;
};

void resolve_slot(CompletionBackend& backend, const PlannedWindow& item,
                  const RequestParams& params, Slot& slot) {
  try {
    const auto response = backend.complete(item.request);
    slot.resolution = resolve_verdict(backend, response.text, params);
  } catch (const CassetteMiss& miss) {
    slot.missing = miss.digest();
  }
}

void dispatch(CompletionBackend& backend, const Plan& plan, const RequestParams& params,
              std::size_t parallelism, std::vector<Slot>& slots) {
  const std::size_t n = plan.items.size();
  const std::size_t workers = std::min(parallelism, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) resolve_slot(backend, plan.items[i], params, slots[i]);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        resolve_slot(backend, plan.items[i], params, slots[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

DetectionRun run_detection(const ExperimentConfig& config, std::size_t window_size,
                           const ExperimentInputs& inputs, CompletionBackend& backend) {
  config.validate();
  if (window_size == 0) throw Error(ErrorCode::kInvalidWindowSize, "window size must be >= 1");
  const Plan plan = plan_windows(config, window_size, inputs);

  std::vector<Slot> slots(plan.items.size());
  dispatch(backend, plan, config.request, config.parallelism, slots);

  std::vector<std::string> missing;
  for (const auto& s : slots) {
    if (s.missing) missing.push_back(*s.missing);
  }
  if (!missing.empty()) throw MissingCassetteEntries(std::move(missing));

  DetectionRun run;
  ResultRow& row = run.row;
  row.dataset = config.dataset;
  row.prompt_id = config.prompt_id;
  row.mode = config.mode;
  row.view = config.view;
  row.injection_type = config.injection_type;
  row.window_size = window_size;

  for (std::size_t i = 0; i < plan.items.size(); ++i) {
    const auto& item = plan.items[i];
    auto& res = *slots[i].resolution;
    WindowOutcome out;
    out.window_index = item.window->index;
    out.window_size = window_size;
    out.actual = item.window->label;
    out.partial = item.window->partial;
    out.prompt_digest = item.digest;
    out.prompt_bytes = item.request.text.size();
    out.reformat_digest = res.reformat_digest;
    out.response_text = res.raw_text;
    out.verdict = res.verdict;

    const bool actual = out.actual == Label::kAnomalous;
    if (out.verdict) {
      out.predicted = out.verdict->is_anomaly;
    } else {
      ++row.unparsable_count;
      switch (config.unparsable_policy) {
        case UnparsablePolicy::kAnomalous: out.predicted = true; break;
        case UnparsablePolicy::kNormal: out.predicted = false; break;
        case UnparsablePolicy::kExclude: out.excluded = true; break;
      }
    }
    if (out.excluded) {
      ++row.excluded_count;
    } else {
      row.counts = accumulate(row.counts, out.predicted, actual);
    }

    PromptAuditEntry audit;
    audit.digest = item.digest;
    audit.prompt_id = config.prompt_id;
    audit.mode = config.mode;
    audit.injection_type = config.injection_type;
    audit.view = config.view;
    audit.window_size = window_size;
    audit.window_index = out.window_index;
    audit.byte_length = out.prompt_bytes;
    run.audit.push_back(std::move(audit));
    run.outcomes.push_back(std::move(out));
  }
  row.windows_evaluated = plan.items.size();
  row.metrics = compute_metrics(row.counts);
  return run;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config,
                                      const ExperimentInputs& inputs,
                                      CompletionBackend& backend,
                                      std::vector<DetectionRun>* runs) {
  config.validate();
  auto sizes = config.window_sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  std::vector<ResultRow> rows;
  std::vector<std::string> missing;
  for (auto w : sizes) {
    try {
      auto run = run_detection(config, w, inputs, backend);
      rows.push_back(run.row);
      if (runs) runs->push_back(std::move(run));
    } catch (const MissingCassetteEntries& e) {
      missing.insert(missing.end(), e.digests().begin(), e.digests().end());
    }
  }
  if (!missing.empty()) throw MissingCassetteEntries(std::move(missing));
  return rows;
}

std::vector<std::string> planned_digests(const ExperimentConfig& config,
                                         std::size_t window_size,
                                         const ExperimentInputs& inputs) {
  const Plan plan = plan_windows(config, window_size, inputs);
  std::vector<std::string> out;
  out.reserve(plan.items.size());
  for (const auto& item : plan.items) out.push_back(item.digest);
  return out;
}

std::vector<std::string> missing_digests(const ExperimentConfig& config,
                                         const ExperimentInputs& inputs,
                                         const Cassette& cassette) {
  config.validate();
  auto sizes = config.window_sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  std::vector<std::string> missing;
  for (auto w : sizes) {
    const Plan plan = plan_windows(config, w, inputs);
    for (const auto& item : plan.items) {
      const auto* hit = cassette.find(item.digest);
      if (!hit) {
        missing.push_back(item.digest);
        continue;
      }
      if (hit->text.empty() || std::holds_alternative<Verdict>(parse_response(hit->text))) {
        continue;
      }
      const auto reformat = reformat_request(hit->text, kVerdictKeys, config.request);
      auto digest = request_digest(reformat);
      if (!cassette.contains(digest)) missing.push_back(std::move(digest));
    }
  }
  return missing;
}

std::string format_verdict_dump(std::span<const WindowOutcome> outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    nlohmann::ordered_json j;
    j["window_index"] = o.window_index;
    j["window_size"] = o.window_size;
    j["label"] = to_string(o.actual);
    j["partial"] = o.partial;
    j["prompt_digest"] = o.prompt_digest;
    j["prompt_bytes"] = o.prompt_bytes;
    j["reformat_digest"] = o.reformat_digest ? nlohmann::ordered_json(*o.reformat_digest)
                                             : nlohmann::ordered_json(nullptr);
    if (o.verdict) {
      j["is_anomaly"] = o.verdict->is_anomaly;
      j["reports"] = o.verdict->reports;
      j["preventive_measures"] = o.verdict->preventive_measures;
      j["parse_path"] = to_string(o.verdict->parse_path);
    } else {
      j["is_anomaly"] = nullptr;
      j["reports"] = nullptr;
      j["preventive_measures"] = nullptr;
      j["parse_path"] = "unparsable";
    }
    j["raw_text"] = o.response_text;
    j["predicted"] = o.predicted;
    j["excluded"] = o.excluded;
    out += detail::dump_compact(j);
    out += '\n';
  }
  return out;
}

}  // namespace logllm
