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

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logllm/prompts.hpp"

namespace logllm {

enum class BackendKind { kLive, kReplay, kRecord };
enum class FinishReason { kStop, kLength, kOther };

const char* to_string(BackendKind kind);
const char* to_string(FinishReason reason);
std::optional<BackendKind> parse_backend_kind(std::string_view text);
FinishReason parse_finish_reason(std::string_view text);

struct BackendConfig {
  BackendKind kind = BackendKind::kReplay;
  std::string endpoint_url;  // full chat-completions URL
  std::string auth_token_env = "OPENAI_API_KEY";
  std::string model_id = "gpt-3.5-turbo";
  std::filesystem::path cassette_path;
  std::size_t max_in_flight = 4;
  std::size_t requests_per_minute = 20;
  std::size_t max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds request_timeout{60000};

  /// Throws Error(kConfig).
  void validate() const;
};

struct CompletionResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
  std::string request_digest;
  bool operator==(const CompletionResponse&) const = default;
};

/// The byte string hashed by request_digest(): a JSON object with keys in
/// lexicographic order, no whitespace, e.g.
///   {"max_output_tokens":100,"model_id":"gpt-3.5-turbo","temperature":0.0,"text":"..."}
std::string canonical_request_form(const PromptRequest& request);

/// Lowercase hex SHA-256 of canonical_request_form().
std::string request_digest(const PromptRequest& request);

std::string sha256_hex(std::string_view bytes);

struct CassetteMetadata {
  std::string model_id;
  std::string created_at;
};

/// Digest-keyed store of recorded completions. On disk: a header line
/// {"cassette_version":1,"model_id":..,"created_at":..} followed by one
/// {"digest","finish_reason","text"} object per line.
class Cassette {
 public:
  Cassette() = default;
  explicit Cassette(CassetteMetadata metadata) : metadata_(std::move(metadata)) {}

  static Cassette parse(std::string_view text);
  static Cassette load(const std::filesystem::path& path);
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  const CassetteMetadata& metadata() const noexcept { return metadata_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(const std::string& digest) const { return entries_.count(digest) > 0; }
  const CompletionResponse* find(const std::string& digest) const;
  void insert(CompletionResponse response);

  const std::map<std::string, CompletionResponse>& entries() const noexcept {
    return entries_;
  }

 private:
  CassetteMetadata metadata_;
  std::map<std::string, CompletionResponse> entries_;
};

std::string format_cassette_entry(const CompletionResponse& response);
std::string current_utc_timestamp();

/// Appends entries to a cassette file as they arrive; safe to share across
/// threads.
class CassetteWriter {
 public:
  CassetteWriter(const std::filesystem::path& path, CassetteMetadata metadata);

  void append(const CompletionResponse& response);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

using Instant = std::chrono::steady_clock::time_point;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() = 0;
  virtual void sleep_until(Instant deadline) = 0;
};

class SteadyClock final : public Clock {
 public:
  Instant now() override { return std::chrono::steady_clock::now(); }
  void sleep_until(Instant deadline) override;
};

/// Test clock: sleeping advances time instantly to the deadline.
class ManualClock final : public Clock {
 public:
  Instant now() override;
  void sleep_until(Instant deadline) override;
  void advance(std::chrono::nanoseconds by);

 private:
  std::mutex mu_;
  Instant now_{};
};

/// Sliding-window limiter: at most `per_minute` grants inside any 60 s span.
class RateLimiter {
 public:
  RateLimiter(std::size_t per_minute, Clock& clock);

  /// Blocks until a grant is available and returns its instant.
  Instant acquire();

 private:
  std::size_t per_minute_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<Instant> granted_;
};

/// Counting gate bounding concurrent holders.
class ConcurrencyGate {
 public:
  explicit ConcurrencyGate(std::size_t limit);

  void acquire();
  void release();

  class Slot {
   public:
    explicit Slot(ConcurrencyGate& gate) : gate_(gate) { gate_.acquire(); }
    ~Slot() { gate_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    ConcurrencyGate& gate_;
  };

 private:
  std::size_t limit_;
  std::size_t in_use_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Raised by transports when no HTTP response was obtained at all.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers,
                            const std::string& body) = 0;
};

std::unique_ptr<HttpTransport> make_http_transport(std::chrono::milliseconds timeout);

using TransportFactory =
    std::function<std::unique_ptr<HttpTransport>(const BackendConfig&)>;

/// OpenAI-compatible chat-completions body: one user message, temperature,
/// max_tokens and n=1.
std::string build_chat_request_body(const PromptRequest& request);

/// Reads choices[0].message.content and finish_reason; throws ProtocolError.
CompletionResponse parse_chat_response(int status, std::string_view body,
                                       std::string digest);

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResponse complete(const PromptRequest& request) = 0;
};

class ReplayBackend final : public CompletionBackend {
 public:
  explicit ReplayBackend(Cassette cassette) : cassette_(std::move(cassette)) {}

  /// Throws CassetteMiss when the digest was never recorded.
  CompletionResponse complete(const PromptRequest& request) override;
  const Cassette& cassette() const noexcept { return cassette_; }

 private:
  Cassette cassette_;
};

class LiveBackend final : public CompletionBackend {
 public:
  LiveBackend(BackendConfig config, std::unique_ptr<HttpTransport> transport,
              std::string auth_token, Clock& clock);

  /// Retries transport failures, 429 and 5xx with exponential backoff; other
  /// non-2xx statuses raise ProtocolError at once.
  CompletionResponse complete(const PromptRequest& request) override;

 private:
  BackendConfig config_;
  std::unique_ptr<HttpTransport> transport_;
  std::string auth_token_;
  Clock& clock_;
  RateLimiter limiter_;
  ConcurrencyGate gate_;
};

class RecordingBackend final : public CompletionBackend {
 public:
  RecordingBackend(std::unique_ptr<CompletionBackend> inner,
                   std::shared_ptr<CassetteWriter> writer);

  CompletionResponse complete(const PromptRequest& request) override;

 private:
  std::unique_ptr<CompletionBackend> inner_;
  std::shared_ptr<CassetteWriter> writer_;
};

/// Reads the bearer token from the environment variable named in `config`.
std::string read_auth_token(const BackendConfig& config);

std::unique_ptr<CompletionBackend> make_backend(
    const BackendConfig& config, const TransportFactory& transport_factory = {},
    Clock* clock = nullptr);

/// One-shot convenience over make_backend().
CompletionResponse complete(const BackendConfig& config, const PromptRequest& request);

}  // namespace logllm
