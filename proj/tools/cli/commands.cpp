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

#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "logllm/error.hpp"
#include "logllm/eval.hpp"
#include "logllm/io.hpp"
#include "run_config.hpp"

namespace logllm::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string dataset;
  std::vector<std::size_t> window_sizes;
  std::string prompt;
  std::string mode;
  std::string view;
  std::string injection;
  std::string backend;
  std::string cassette;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
};

void add_common_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--config", o.config, "JSON run configuration");
  cmd.add_option("--dataset", o.dataset, "Log file to read (dataset.path)");
  cmd.add_option("--window-size", o.window_sizes, "Window size; repeat for several")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--prompt", o.prompt, "p1 or p2")->check(CLI::IsMember({"p1", "p2", "P1", "P2"}));
  cmd.add_option("--mode", o.mode, "zero or few")
      ->check(CLI::IsMember({"zero", "few", "zero_shot", "few_shot"}));
  cmd.add_option("--view", o.view, "raw, content or event")
      ->check(CLI::IsMember({"raw", "content", "event"}));
  cmd.add_option("--injection", o.injection, "normal, abnormal or mixed")
      ->check(CLI::IsMember({"normal", "abnormal", "mixed"}));
  cmd.add_option("--backend", o.backend, "live, record or replay")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  cmd.add_option("--cassette", o.cassette, "Cassette file for record/replay");
  cmd.add_option("--seed", o.seed, "Seed for subset sampling and shot selection");
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_option("--set", o.sets, "Override any config field: dotted.path=value");
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

// Flag overrides beat the config file; --set is applied first so the named
// flags win over it too.
nlohmann::ordered_json effective_document(const Options& o) {
  auto doc = o.config.empty() ? default_document() : load_config_document(o.config);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kConfig, "--set expects path=value, got '" + kv + "'");
    }
    apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.dataset.empty()) apply_override(doc, "dataset.path", o.dataset);
  if (!o.window_sizes.empty()) {
    apply_override(doc, "experiment.window_sizes", nlohmann::json(o.window_sizes).dump());
  }
  if (!o.prompt.empty()) {
    apply_override(doc, "prompt.id", o.prompt);
    apply_override(doc, "sweep.prompts", "[" + quoted(o.prompt) + "]");
  }
  if (!o.mode.empty()) {
    apply_override(doc, "injection.mode", o.mode);
    apply_override(doc, "sweep.modes", "[" + quoted(o.mode) + "]");
  }
  if (!o.view.empty()) {
    apply_override(doc, "experiment.view", o.view);
    apply_override(doc, "sweep.views", "[" + quoted(o.view) + "]");
  }
  if (!o.injection.empty()) {
    apply_override(doc, "injection.type", o.injection);
    apply_override(doc, "sweep.injections", "[" + quoted(o.injection) + "]");
  }
  if (!o.backend.empty()) apply_override(doc, "backend.kind", o.backend);
  if (!o.cassette.empty()) apply_override(doc, "backend.cassette", o.cassette);
  if (o.seed) {
    apply_override(doc, "experiment.seed", std::to_string(*o.seed));
    apply_override(doc, "corpus.seed", std::to_string(*o.seed));
  }
  if (!o.out.empty()) apply_override(doc, "output_dir", o.out);
  return doc;
}

// Validates before any work, then echoes the effective config.
RunConfig prepare(const Options& o, bool check_backend, bool force_replay = false) {
  auto doc = effective_document(o);
  if (force_replay) apply_override(doc, "backend.kind", "replay");
  auto config = config_from_document(doc);
  config.validate(check_backend);
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create output directory " + config.output_dir.string() + ": " + ec.message());
  }
  write_file_atomic(config.output_dir / "effective_config.json", doc.dump(2) + "\n");
  return config;
}

std::vector<LogRecord> load_records(const RunConfig& config, std::ostream& err) {
  auto loaded = load_dataset(config.dataset_path, config.dataset);
  if (!loaded.rejects.empty()) {
    write_rejects_report(config.output_dir / "rejects.tsv", loaded.rejects);
    err << "logllm: " << loaded.rejects.size() << " malformed lines quarantined in "
        << (config.output_dir / "rejects.tsv").string() << "\n";
  }
  return std::move(loaded.records);
}

PreparedCorpus load_corpus(const RunConfig& config, std::ostream& err) {
  auto prepared = prepare_corpus(load_records(config, err), config.corpus_settings());
  err << "logllm: " << prepared.records.size() << " records, " << prepared.templates.size()
      << " templates; evaluating records [" << prepared.subset_begin << ", "
      << prepared.subset_begin + prepared.subset_size << ")\n";
  return prepared;
}

std::string size_suffix(std::size_t w) { return "_w" + std::to_string(w); }

struct GridPoint {
  ExperimentConfig config;
  std::string label;
};

// Zero-shot prompts carry no shots, so the injection axis collapses there.
std::vector<GridPoint> expand_grid(const RunConfig& config) {
  std::vector<GridPoint> out;
  for (auto prompt : config.grid.prompts)
    for (auto mode : config.grid.modes)
      for (auto view : config.grid.views) {
        for (auto injection : config.grid.injections) {
          GridPoint p{config.experiment_for(prompt, mode, view, injection), {}};
          p.label = std::string(to_string(prompt)) + "_" + to_string(mode) + "_" + to_string(view);
          if (mode == ShotMode::kFewShot) p.label += std::string("_") + to_string(injection);
          out.push_back(std::move(p));
          if (mode == ShotMode::kZeroShot) break;
        }
      }
  return out;
}

bool grid_is_empty(const RunConfig& config) {
  return config.grid.prompts.empty() || config.grid.modes.empty() || config.grid.views.empty() ||
         config.grid.injections.empty() || config.experiment.window_sizes.empty();
}

std::string audit_text(const std::vector<PromptAuditEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += format_audit_line(e) + "\n";
  return out;
}

int cmd_parse(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = prepare(o, false);
  const auto records = load_records(config, err);
  const auto parse = parse_corpus(records, config.drain, config.build_mask_rules());
  write_file_atomic(config.output_dir / "templates.jsonl", format_template_dump(parse.templates));
  write_file_atomic(config.output_dir / "parsed.jsonl", format_parsed_dump(parse.records));
  out << "parsed " << records.size() << " records into " << parse.templates.size()
      << " templates (" << parse.empty_count << " empty)\n";
  return kExitOk;
}

int cmd_sequence(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = prepare(o, false);
  if (config.experiment.window_sizes.empty()) {
    err << "logllm: nothing to run: no window sizes configured\n";
    return kExitUsage;
  }
  const auto corpus = load_corpus(config, err);
  const auto inputs = corpus.inputs();
  for (auto w : config.experiment.window_sizes) {
    const auto windows = make_windows(inputs.evaluation, w, inputs.evaluation_parsed);
    std::vector<LogSequence> sequences;
    sequences.reserve(windows.size());
    for (const auto& win : windows) {
      sequences.push_back(render_sequence(win, config.experiment.view, inputs.templates));
    }
    const auto path = config.output_dir / ("sequences" + size_suffix(w) + ".jsonl");
    write_file_atomic(path, format_sequence_dump(sequences));
    out << "window " << w << ": " << sequences.size() << " sequences -> " << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_detect(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = prepare(o, true);
  const auto& sizes = config.experiment.window_sizes;
  if (sizes.size() != 1) {
    err << "logllm: detect runs one window size; pass --window-size\n";
    return kExitUsage;
  }
  const auto experiment =
      config.experiment_for(config.experiment.prompt_id, config.experiment.mode,
                            config.experiment.view, config.experiment.injection_type);
  const auto corpus = load_corpus(config, err);
  auto backend = make_backend(config.backend);
  const auto run = run_detection(experiment, sizes[0], corpus.inputs(), *backend);

  const auto suffix = size_suffix(sizes[0]);
  write_file_atomic(config.output_dir / ("verdicts" + suffix + ".jsonl"),
                    format_verdict_dump(run.outcomes));
  write_file_atomic(config.output_dir / ("prompt_audit" + suffix + ".jsonl"), audit_text(run.audit));
  const std::vector<ResultRow> rows{run.row};
  write_report(rows, config.output_dir / ("report" + suffix + ".csv"), ReportFormat::kDelimited);
  out << format_report(rows, ReportFormat::kDelimited);
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = prepare(o, true);
  if (grid_is_empty(config)) {
    err << "logllm: nothing to run: the sweep grid is empty\n";
    return kExitUsage;
  }
  const auto points = expand_grid(config);
  const auto corpus = load_corpus(config, err);
  const auto inputs = corpus.inputs();
  auto backend = make_backend(config.backend);

  std::vector<ResultRow> all_rows;
  std::vector<PromptAuditEntry> audit;
  std::vector<std::string> missing;
  std::vector<std::pair<std::string, std::vector<ResultRow>>> per_point;
  for (const auto& p : points) {
    err << "logllm: running " << p.label << "\n";
    try {
      std::vector<DetectionRun> runs;
      auto rows = run_experiment(p.config, inputs, *backend, &runs);
      for (const auto& r : runs) audit.insert(audit.end(), r.audit.begin(), r.audit.end());
      all_rows.insert(all_rows.end(), rows.begin(), rows.end());
      per_point.emplace_back(p.label, std::move(rows));
    } catch (const MissingCassetteEntries& e) {
      missing.insert(missing.end(), e.digests().begin(), e.digests().end());
    }
  }
  if (!missing.empty()) throw MissingCassetteEntries(std::move(missing));

  for (const auto& [label, rows] : per_point) {
    write_report(rows, config.output_dir / ("report_" + label + ".csv"), ReportFormat::kDelimited);
    write_report(rows, config.output_dir / ("report_" + label + ".jsonl"), ReportFormat::kRecords);
  }
  write_report(all_rows, config.output_dir / "results.csv", ReportFormat::kDelimited);
  write_report(all_rows, config.output_dir / "results.jsonl", ReportFormat::kRecords);
  write_file_atomic(config.output_dir / "prompt_audit.jsonl", audit_text(audit));
  std::vector<ReferenceRow> references;
  if (config.reference_path) references = load_reference_rows(*config.reference_path);
  const auto table = format_comparison_table(all_rows, references);
  write_file_atomic(config.output_dir / "comparison.txt", table);
  out << table;
  return kExitOk;
}

int cmd_replay_verify(const Options& o, std::ostream& out, std::ostream& err) {
  const auto config = prepare(o, true, /*force_replay=*/true);
  if (grid_is_empty(config)) {
    err << "logllm: nothing to run: the sweep grid is empty\n";
    return kExitUsage;
  }
  const auto points = expand_grid(config);
  const auto corpus = load_corpus(config, err);
  const auto inputs = corpus.inputs();
  const auto cassette = Cassette::load(config.backend.cassette_path);

  std::size_t planned = 0;
  std::vector<std::string> missing;
  for (const auto& p : points) {
    for (auto w : p.config.window_sizes) planned += planned_digests(p.config, w, inputs).size();
    auto m = missing_digests(p.config, inputs, cassette);
    missing.insert(missing.end(), m.begin(), m.end());
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (!missing.empty()) {
    for (const auto& d : missing) out << "missing " << d << "\n";
    err << "logllm: cassette lacks " << missing.size() << " of the requests this grid needs\n";
    return kExitBackend;
  }
  out << "cassette complete: " << planned << " planned prompts across " << points.size()
      << " grid points\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::kUsage: return kExitUsage;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kBackend: return kExitBackend;
  }
  return kExitData;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Log anomaly detection with LLM prompts", "logllm"};
  app.require_subcommand(1);
  Options options;
  using Handler = int (*)(const Options&, std::ostream&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Handler>> commands = {
      {"parse", "Mine templates and write template and parsed-record dumps", cmd_parse},
      {"sequence", "Group records into windows and write sequence dumps", cmd_sequence},
      {"detect", "Run detection for one configuration and window size", cmd_detect},
      {"sweep", "Run the configured grid and write reports", cmd_sweep},
      {"replay-verify", "Check that a cassette covers a grid without running it",
       cmd_replay_verify},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, handler] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common_options(*sub, options);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return std::get<2>(commands[i])(options, out, err);
    }
    return kExitUsage;
  } catch (const MissingCassetteEntries& e) {
    for (const auto& d : e.digests()) out << "missing " << d << "\n";
    err << "logllm: cassette lacks " << e.digests().size() << " replies\n";
    return kExitBackend;
  } catch (const Error& e) {
    err << "logllm: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "logllm: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace logllm::cli
