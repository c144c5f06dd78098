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
#include <cstdio>
#include <map>
#include <sstream>

#include "json_util.hpp"
#include "logllm/error.hpp"
#include "logllm/eval.hpp"
#include "logllm/io.hpp"

namespace logllm {
namespace {

constexpr const char* kDelimitedHeader =
    "dataset,prompt_id,mode,view,injection_type,window_size,tp,fp,tn,fn,"
    "windows_evaluated,unparsable_count,excluded_count,f1,precision,recall,specificity";
constexpr std::size_t kDelimitedColumns = 17;

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t parse_count(const std::string& text, std::size_t line_no) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty() || text[0] == '-') {
    throw Error(ErrorCode::kMalformedLine,
                "line " + std::to_string(line_no) + ": bad count '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

double parse_ratio(const std::string& text, std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty()) {
    throw Error(ErrorCode::kMalformedLine,
                "line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return v;
}

template <typename T, typename Parser>
T parse_enum(const std::string& text, Parser parser, std::size_t line_no, const char* what) {
  const auto v = parser(text);
  if (!v) {
    throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no) + ": unknown " +
                                               what + " '" + text + "'");
  }
  return *v;
}

std::string format_delimited(std::span<const ResultRow> rows) {
  std::string out = kDelimitedHeader;
  out += '\n';
  for (const auto& r : rows) {
    std::ostringstream line;
    line << r.dataset << ',' << to_string(r.prompt_id) << ',' << to_string(r.mode) << ','
         << to_string(r.view) << ',' << to_string(r.injection_type) << ',' << r.window_size
         << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.tn << ','
         << r.counts.fn << ',' << r.windows_evaluated << ',' << r.unparsable_count << ','
         << r.excluded_count << ',' << format_metric(r.metrics.f1) << ','
         << format_metric(r.metrics.precision) << ',' << format_metric(r.metrics.recall) << ','
         << format_metric(r.metrics.specificity);
    out += line.str();
    out += '\n';
  }
  return out;
}

// Printed metrics are rounded; the row's exact metrics come back from its counts.
std::vector<ResultRow> parse_delimited(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<ResultRow> rows;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kDelimitedHeader) {
        throw Error(ErrorCode::kMalformedLine, "unexpected report header: " + line);
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != kDelimitedColumns) {
      throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(i) + ": expected " +
                                                 std::to_string(kDelimitedColumns) + " columns");
    }
    ResultRow r;
    r.dataset = f[0];
    r.prompt_id = parse_enum<PromptId>(f[1], parse_prompt_id, i, "prompt");
    r.mode = parse_enum<ShotMode>(f[2], parse_shot_mode, i, "mode");
    r.view = parse_enum<SequenceView>(f[3], parse_sequence_view, i, "view");
    r.injection_type = parse_enum<InjectionType>(f[4], parse_injection_type, i, "injection");
    r.window_size = parse_count(f[5], i);
    r.counts = {parse_count(f[6], i), parse_count(f[7], i), parse_count(f[8], i),
                parse_count(f[9], i)};
    r.windows_evaluated = parse_count(f[10], i);
    r.unparsable_count = parse_count(f[11], i);
    r.excluded_count = parse_count(f[12], i);
    r.metrics = compute_metrics(r.counts);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_records(std::span<const ResultRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset;
    j["prompt_id"] = to_string(r.prompt_id);
    j["mode"] = to_string(r.mode);
    j["view"] = to_string(r.view);
    j["injection_type"] = to_string(r.injection_type);
    j["window_size"] = r.window_size;
    j["tp"] = r.counts.tp;
    j["fp"] = r.counts.fp;
    j["tn"] = r.counts.tn;
    j["fn"] = r.counts.fn;
    j["windows_evaluated"] = r.windows_evaluated;
    j["unparsable_count"] = r.unparsable_count;
    j["excluded_count"] = r.excluded_count;
    j["f1"] = r.metrics.f1;
    j["precision"] = r.metrics.precision;
    j["recall"] = r.metrics.recall;
    j["specificity"] = r.metrics.specificity;
    out += detail::dump_compact(j);
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> parse_records(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      ResultRow r;
      r.dataset = j.at("dataset").get<std::string>();
      r.prompt_id = parse_enum<PromptId>(j.at("prompt_id").get<std::string>(), parse_prompt_id,
                                         i, "prompt");
      r.mode = parse_enum<ShotMode>(j.at("mode").get<std::string>(), parse_shot_mode, i, "mode");
      r.view = parse_enum<SequenceView>(j.at("view").get<std::string>(), parse_sequence_view, i,
                                        "view");
      r.injection_type = parse_enum<InjectionType>(j.at("injection_type").get<std::string>(),
                                                   parse_injection_type, i, "injection");
      r.window_size = j.at("window_size").get<std::size_t>();
      r.counts.tp = j.at("tp").get<std::size_t>();
      r.counts.fp = j.at("fp").get<std::size_t>();
      r.counts.tn = j.at("tn").get<std::size_t>();
      r.counts.fn = j.at("fn").get<std::size_t>();
      r.windows_evaluated = j.at("windows_evaluated").get<std::size_t>();
      r.unparsable_count = j.at("unparsable_count").get<std::size_t>();
      r.excluded_count = j.at("excluded_count").get<std::size_t>();
      r.metrics.f1 = j.at("f1").get<double>();
      r.metrics.precision = j.at("precision").get<double>();
      r.metrics.recall = j.at("recall").get<double>();
      r.metrics.specificity = j.at("specificity").get<double>();
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(i) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace

std::string format_report(std::span<const ResultRow> rows, ReportFormat format) {
  return format == ReportFormat::kDelimited ? format_delimited(rows) : format_records(rows);
}

std::vector<ResultRow> parse_report(std::string_view text, ReportFormat format) {
  return format == ReportFormat::kDelimited ? parse_delimited(text) : parse_records(text);
}

void write_report(std::span<const ResultRow> rows, const std::filesystem::path& path,
                  ReportFormat format) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "no rows to report");
  write_file_atomic(path, format_report(rows, format));
}

std::vector<ResultRow> read_report(const std::filesystem::path& path, ReportFormat format) {
  return parse_report(read_file(path), format);
}

std::vector<ReferenceRow> parse_reference_rows(std::string_view csv) {
  const auto lines = split_lines(csv);
  std::vector<ReferenceRow> rows;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 9) {
      throw Error(ErrorCode::kMalformedLine,
                  "reference line " + std::to_string(i) + ": expected 9 columns");
    }
    ReferenceRow r;
    r.table = f[0];
    r.dataset = f[1];
    r.method = f[2];
    r.setting = f[3];
    r.window_size = parse_count(f[4], i);
    r.f1 = parse_ratio(f[5], i);
    r.precision = parse_ratio(f[6], i);
    r.recall = parse_ratio(f[7], i);
    r.specificity = parse_ratio(f[8], i);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ReferenceRow> load_reference_rows(const std::filesystem::path& path) {
  return parse_reference_rows(read_file(path));
}

namespace {

double metric_of(const Metrics& m, char key) {
  switch (key) {
    case 'F': return m.f1;
    case 'P': return m.precision;
    case 'R': return m.recall;
    default: return m.specificity;
  }
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string format_comparison_table(std::span<const ResultRow> rows,
                                    std::span<const ReferenceRow> references) {
  std::vector<std::string> datasets;
  for (const auto& r : rows) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
  }

  std::string out;
  for (const auto& dataset : datasets) {
    std::vector<std::string> methods;
    std::map<std::pair<std::string, std::size_t>, Metrics> cells;
    for (const auto& ref : references) {
      if (ref.dataset != dataset || ref.setting != "-") continue;
      if (std::find(methods.begin(), methods.end(), ref.method) == methods.end()) {
        methods.push_back(ref.method);
      }
      cells[{ref.method, ref.window_size}] = {ref.f1, ref.precision, ref.recall,
                                              ref.specificity};
    }
    std::vector<std::size_t> sizes;
    for (const auto& r : rows) {
      if (r.dataset != dataset) continue;
      const std::string column = r.mode == ShotMode::kZeroShot ? "zero-shot" : "few-shot";
      if (std::find(methods.begin(), methods.end(), column) == methods.end()) {
        methods.push_back(column);
      }
      // First row wins when several grid points share a column.
      cells.try_emplace({column, r.window_size}, r.metrics);
      sizes.push_back(r.window_size);
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    constexpr std::size_t kWidth = 12;
    out += dataset + "\n";
    std::string header = pad("window", 8) + pad("metric", 8);
    for (const auto& m : methods) header += pad(m, kWidth);
    while (!header.empty() && header.back() == ' ') header.pop_back();
    out += header + "\n";
    for (auto w : sizes) {
      for (char key : {'F', 'P', 'R', 'S'}) {
        std::string line = pad(std::to_string(w), 8) + pad(std::string(1, key), 8);
        for (const auto& m : methods) {
          const auto it = cells.find({m, w});
          line += pad(it == cells.end() ? "-" : format_metric(metric_of(it->second, key)),
                      kWidth);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace logllm
