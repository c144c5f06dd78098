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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "logllm/eval.hpp"
#include "logllm/ingest.hpp"
#include "logllm/llm.hpp"

namespace logllm::testing {

std::filesystem::path test_data_dir();
std::filesystem::path repo_data_dir();

/// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// A BGL-layout line: label, epoch, date, node, time, node, RAS, KERNEL,
/// level, then `content`.
std::string bgl_line(bool anomalous, const std::string& content, std::size_t seq = 0);

/// One record per entry of `anomalous`, content drawn from a small fixed set
/// of message shapes with varying numbers.
std::vector<LogRecord> synthetic_records(const std::vector<bool>& anomalous,
                                         std::uint64_t seed = 1);

/// `n` BGL-layout lines with roughly `templates` message shapes, joined by
/// newlines.
std::string synthetic_log_text(std::size_t n, std::size_t templates, std::uint64_t seed);

/// Answers from a digest map; counts calls.
class MapBackend final : public CompletionBackend {
 public:
  std::map<std::string, std::string> replies;
  std::function<std::string(const PromptRequest&)> fallback;
  std::atomic<std::size_t> calls{0};

  CompletionResponse complete(const PromptRequest& request) override;
};

/// Records every post; replies through `respond` (default: a chat body
/// echoing an is_anomaly=false verdict).
class FakeTransport final : public HttpTransport {
 public:
  struct Shared {
    std::mutex mu;
    std::vector<std::string> bodies;
    std::vector<HttpHeaders> headers;
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
    std::function<HttpResponse(std::size_t call)> respond;
    std::chrono::milliseconds hold{0};
  };

  explicit FakeTransport(std::shared_ptr<Shared> shared) : shared_(std::move(shared)) {}
  HttpResponse post(const std::string& url, const HttpHeaders& headers,
                    const std::string& body) override;

 private:
  std::shared_ptr<Shared> shared_;
};

std::string chat_body(const std::string& content, const std::string& finish_reason = "stop");

struct MalformedCase {
  std::string name;
  std::string input;
  std::string expect;  // "direct", "extracted", "reformatted" or "unparsable"
  std::optional<bool> is_anomaly;
  std::string reformat_reply;
};

std::vector<MalformedCase> load_malformed_corpus(const std::filesystem::path& path);

/// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
 public:
  EnvGuard(std::string name, const std::string& value);
  ~EnvGuard();

 private:
  std::string name_;
  std::optional<std::string> previous_;
};

}  // namespace logllm::testing
