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

#include "fixtures.hpp"

#include <cstdlib>
#include <random>
#include <thread>

#include "json.hpp"
#include "logllm/error.hpp"
#include "logllm/io.hpp"

namespace logllm::testing {

std::filesystem::path test_data_dir() { return LOGLLM_TEST_DATA_DIR; }
std::filesystem::path repo_data_dir() { return LOGLLM_DATA_DIR; }

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("logllm-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string bgl_line(bool anomalous, const std::string& content, std::size_t seq) {
  const std::string label = anomalous ? "KERNDTLB" : "-";
  const std::string epoch = std::to_string(1117838570 + seq);
  return label + " " + epoch +
         " 2005.06.03 R02-M1-N0-C:J12-U11 2005-06-03-15.42.50.675872 "
         "R02-M1-N0-C:J12-U11 RAS KERNEL " +
         (anomalous ? "FATAL " : "INFO ") + content;
}

namespace {

std::string shape(std::size_t kind, std::mt19937_64& rng) {
  auto num = [&](std::uint64_t mod) { return std::to_string(rng() % mod); };
  switch (kind % 6) {
    case 0: return "instruction cache parity error corrected";
    case 1: return "generating core." + num(4096);
    case 2:
      return "ciod: failed to read message prefix on control stream (CioStream socket to 172.16.96." +
             num(255) + ":" + num(65536) + ")";
    case 3: return num(1000) + " double-hummer alignment exceptions";
    case 4: return "data TLB error interrupt";
    default: return "total of " + num(50) + " ddr error(s) detected and corrected";
  }
}

const char* const kWords[] = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
                              "hotel", "india", "juliet", "kilo", "lima", "mike", "november",
                              "oscar", "papa", "quebec", "romeo", "sierra", "tango"};

}  // namespace

std::vector<LogRecord> synthetic_records(const std::vector<bool>& anomalous, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LogRecord> out;
  out.reserve(anomalous.size());
  for (std::size_t i = 0; i < anomalous.size(); ++i) {
    LogRecord r;
    r.line_no = i;
    r.label = anomalous[i] ? Label::kAnomalous : Label::kNormal;
    r.timestamp = std::to_string(1117838570 + i);
    r.content = shape(static_cast<std::size_t>(rng() % 6), rng);
    r.raw_line = bgl_line(anomalous[i], r.content, i);
    out.push_back(std::move(r));
  }
  return out;
}

std::string synthetic_log_text(std::size_t n, std::size_t templates, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  templates = std::max<std::size_t>(1, std::min<std::size_t>(templates, std::size(kWords)));
  std::string out;
  out.reserve(n * 160);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = rng() % templates;
    std::string content = std::string(kWords[t]) + " request " + std::to_string(rng() % 100000) +
                          " from 10.0." + std::to_string(rng() % 256) + "." +
                          std::to_string(rng() % 256) + ":" + std::to_string(rng() % 65536);
    for (std::size_t k = 0; k < t % 4; ++k) content += " stage " + std::to_string(rng() % 10);
    content += " completed in " + std::to_string(rng() % 5000) + " ms";
    out += bgl_line(rng() % 50 == 0, content, i);
    out += '\n';
  }
  return out;
}

CompletionResponse MapBackend::complete(const PromptRequest& request) {
  ++calls;
  CompletionResponse r;
  r.request_digest = request_digest(request);
  if (auto it = replies.find(r.request_digest); it != replies.end()) {
    r.text = it->second;
  } else if (fallback) {
    r.text = fallback(request);
  } else {
    throw CassetteMiss(r.request_digest);
  }
  return r;
}

std::string chat_body(const std::string& content, const std::string& finish_reason) {
  nlohmann::json j;
  j["id"] = "chatcmpl-test";
  j["object"] = "chat.completion";
  j["choices"] = nlohmann::json::array(
      {{{"index", 0},
        {"message", {{"role", "assistant"}, {"content", content}}},
        {"finish_reason", finish_reason}}});
  return j.dump();
}

HttpResponse FakeTransport::post(const std::string&, const HttpHeaders& headers,
                                 const std::string& body) {
  std::size_t call = 0;
  {
    std::lock_guard lock(shared_->mu);
    call = shared_->bodies.size();
    shared_->bodies.push_back(body);
    shared_->headers.push_back(headers);
  }
  const int now = ++shared_->in_flight;
  int seen = shared_->max_in_flight.load();
  while (now > seen && !shared_->max_in_flight.compare_exchange_weak(seen, now)) {
  }
  if (shared_->hold.count() > 0) std::this_thread::sleep_for(shared_->hold);
  HttpResponse response;
  try {
    response = shared_->respond
                   ? shared_->respond(call)
                   : HttpResponse{200, chat_body(R"({"is_anomaly": false, "reports": "", "preventive_measures": ""})")};
  } catch (...) {
    --shared_->in_flight;
    throw;
  }
  --shared_->in_flight;
  return response;
}

std::vector<MalformedCase> load_malformed_corpus(const std::filesystem::path& path) {
  std::vector<MalformedCase> out;
  for (const auto& line : split_lines(read_file(path))) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    MalformedCase c;
    c.name = j.at("name").get<std::string>();
    c.input = j.at("input").get<std::string>();
    c.expect = j.at("expect").get<std::string>();
    if (j.contains("is_anomaly") && !j.at("is_anomaly").is_null()) {
      c.is_anomaly = j.at("is_anomaly").get<bool>();
    }
    c.reformat_reply = j.value("reformat_reply", "");
    out.push_back(std::move(c));
  }
  return out;
}

EnvGuard::EnvGuard(std::string name, const std::string& value) : name_(std::move(name)) {
  if (const char* old = std::getenv(name_.c_str())) previous_ = old;
  ::setenv(name_.c_str(), value.c_str(), 1);
}

EnvGuard::~EnvGuard() {
  if (previous_) {
    ::setenv(name_.c_str(), previous_->c_str(), 1);
  } else {
    ::unsetenv(name_.c_str());
  }
}

}  // namespace logllm::testing
