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

#include "logllm/llm.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <ctime>
#include <thread>

#include "json_util.hpp"
#include "logllm/error.hpp"
#include "logllm/io.hpp"

namespace logllm {

const char* to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kLive: return "live";
    case BackendKind::kReplay: return "replay";
    case BackendKind::kRecord: return "record";
  }
  return "replay";
}

const char* to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::kStop: return "stop";
    case FinishReason::kLength: return "length";
    case FinishReason::kOther: return "other";
  }
  return "other";
}

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
  if (text == "live") return BackendKind::kLive;
  if (text == "replay") return BackendKind::kReplay;
  if (text == "record") return BackendKind::kRecord;
  return std::nullopt;
}

FinishReason parse_finish_reason(std::string_view text) {
  if (text == "stop") return FinishReason::kStop;
  if (text == "length") return FinishReason::kLength;
  return FinishReason::kOther;
}

void BackendConfig::validate() const {
  if (kind == BackendKind::kLive || kind == BackendKind::kRecord) {
    if (endpoint_url.empty()) {
      throw Error(ErrorCode::kConfig, std::string(to_string(kind)) +
                                          " backend requires endpoint_url");
    }
    if (auth_token_env.empty()) {
      throw Error(ErrorCode::kConfig, std::string(to_string(kind)) +
                                          " backend requires auth_token_env");
    }
    if (max_in_flight == 0 || requests_per_minute == 0) {
      throw Error(ErrorCode::kConfig,
                  "max_in_flight and requests_per_minute must be >= 1");
    }
  }
  if ((kind == BackendKind::kReplay || kind == BackendKind::kRecord) &&
      cassette_path.empty()) {
    throw Error(ErrorCode::kConfig, std::string(to_string(kind)) +
                                        " backend requires a cassette path");
  }
  if (model_id.empty()) throw Error(ErrorCode::kConfig, "empty model_id");
}

std::string canonical_request_form(const PromptRequest& request) {
  nlohmann::json j;  // std::map-backed: keys serialize in sorted order
  j["model_id"] = request.model_id;
  j["temperature"] = request.temperature;
  j["max_output_tokens"] = request.max_output_tokens;
  j["text"] = request.text;
  return detail::dump_compact(j);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

std::string request_digest(const PromptRequest& request) {
  return sha256_hex(canonical_request_form(request));
}

// ---- cassette ---------------------------------------------------------------

const CompletionResponse* Cassette::find(const std::string& digest) const {
  auto it = entries_.find(digest);
  return it == entries_.end() ? nullptr : &it->second;
}

void Cassette::insert(CompletionResponse response) {
  auto key = response.request_digest;
  entries_.insert_or_assign(std::move(key), std::move(response));
}

namespace {

std::string format_cassette_header(const CassetteMetadata& metadata) {
  nlohmann::ordered_json j;
  j["cassette_version"] = 1;
  j["model_id"] = metadata.model_id;
  j["created_at"] = metadata.created_at;
  return detail::dump_compact(j);
}

}  // namespace

std::string format_cassette_entry(const CompletionResponse& response) {
  nlohmann::ordered_json j;
  j["digest"] = response.request_digest;
  j["finish_reason"] = to_string(response.finish_reason);
  j["text"] = response.text;
  return detail::dump_compact(j);
}

Cassette Cassette::parse(std::string_view text) {
  Cassette cassette;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kIo,
                  "cassette line " + std::to_string(line_no) + " is not a JSON object");
    }
    try {
      if (j.contains("cassette_version")) {
        cassette.metadata_.model_id = j.value("model_id", "");
        cassette.metadata_.created_at = j.value("created_at", "");
        continue;
      }
      CompletionResponse r;
      r.request_digest = j.at("digest").get<std::string>();
      r.finish_reason = parse_finish_reason(j.value("finish_reason", "stop"));
      r.text = j.at("text").get<std::string>();
      cassette.insert(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo,
                  "cassette line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cassette;
}

Cassette Cassette::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

std::string Cassette::serialize() const {
  std::string out = format_cassette_header(metadata_) + "\n";
  for (const auto& [digest, response] : entries_) {
    out += format_cassette_entry(response);
    out += '\n';
  }
  return out;
}

void Cassette::save(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

std::string current_utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CassetteWriter::CassetteWriter(const std::filesystem::path& path,
                               CassetteMetadata metadata)
    : path_(path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) ||
                     std::filesystem::file_size(path, ec) == 0;
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::kIo, "cannot open cassette " + path.string());
  if (fresh) {
    out_ << format_cassette_header(metadata) << '\n';
    out_.flush();
  }
}

void CassetteWriter::append(const CompletionResponse& response) {
  std::lock_guard<std::mutex> lock(mu_);
  out_ << format_cassette_entry(response) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "cassette write failed: " + path_.string());
}

// ---- clocks and limits ----------------------------------------------------------

void SteadyClock::sleep_until(Instant deadline) {
  std::this_thread::sleep_until(deadline);
}

Instant ManualClock::now() {
  std::lock_guard<std::mutex> lock(mu_);
  return now_;
}

void ManualClock::sleep_until(Instant deadline) {
  std::lock_guard<std::mutex> lock(mu_);
  if (deadline > now_) now_ = deadline;
}

void ManualClock::advance(std::chrono::nanoseconds by) {
  std::lock_guard<std::mutex> lock(mu_);
  now_ += std::chrono::duration_cast<Instant::duration>(by);
}

RateLimiter::RateLimiter(std::size_t per_minute, Clock& clock)
    : per_minute_(per_minute), clock_(clock) {
  if (per_minute_ == 0) {
    throw Error(ErrorCode::kConfig, "requests_per_minute must be >= 1");
  }
}

Instant RateLimiter::acquire() {
  using namespace std::chrono_literals;
  std::unique_lock<std::mutex> lock(mu_);
  for (;;) {
    const auto now = clock_.now();
    while (!granted_.empty() && granted_.front() + 60s <= now) granted_.pop_front();
    if (granted_.size() < per_minute_) {
      granted_.push_back(now);
      return now;
    }
    const auto wake = granted_.front() + 60s;
    lock.unlock();
    clock_.sleep_until(wake);
    lock.lock();
  }
}

ConcurrencyGate::ConcurrencyGate(std::size_t limit) : limit_(limit) {
  if (limit_ == 0) throw Error(ErrorCode::kConfig, "max_in_flight must be >= 1");
}

void ConcurrencyGate::acquire() {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [this] { return in_use_ < limit_; });
  ++in_use_;
}

void ConcurrencyGate::release() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    --in_use_;
  }
  cv_.notify_one();
}

// ---- wire format ---------------------------------------------------------------

std::string build_chat_request_body(const PromptRequest& request) {
  nlohmann::ordered_json j;
  j["model"] = request.model_id;
  j["messages"] = nlohmann::ordered_json::array(
      {{{"role", "user"}, {"content", request.text}}});
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_output_tokens;
  j["n"] = request.top_choices;
  return detail::dump_compact(j);
}

CompletionResponse parse_chat_response(int status, std::string_view body,
                                       std::string digest) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ProtocolError(status, "response body is not a JSON object");
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw ProtocolError(status, "response has no choices");
  }
  const auto& first = (*choices)[0];
  CompletionResponse out;
  out.request_digest = std::move(digest);
  try {
    const auto& content = first.at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : std::string{};
    const auto reason = first.find("finish_reason");
    out.finish_reason = (reason != first.end() && reason->is_string())
                            ? parse_finish_reason(reason->get<std::string>())
                            : FinishReason::kOther;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(status, std::string("malformed choice: ") + e.what());
  }
  return out;
}

// ---- backends ------------------------------------------------------------------

CompletionResponse ReplayBackend::complete(const PromptRequest& request) {
  request.validate();
  const auto digest = request_digest(request);
  const auto* hit = cassette_.find(digest);
  if (hit == nullptr) throw CassetteMiss(digest);
  return *hit;
}

LiveBackend::LiveBackend(BackendConfig config, std::unique_ptr<HttpTransport> transport,
                         std::string auth_token, Clock& clock)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      auth_token_(std::move(auth_token)),
      clock_(clock),
      limiter_(config_.requests_per_minute, clock),
      gate_(config_.max_in_flight) {
  if (!transport_) throw Error(ErrorCode::kConfig, "live backend without transport");
}

CompletionResponse LiveBackend::complete(const PromptRequest& request) {
  request.validate();
  const auto digest = request_digest(request);
  const auto body = build_chat_request_body(request);
  const HttpHeaders headers = {{"Authorization", "Bearer " + auth_token_},
                               {"Content-Type", "application/json"}};

  ErrorCode last_code = ErrorCode::kBackendUnavailable;
  std::string last_detail;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const auto delay = config_.backoff_base * (1LL << std::min<std::size_t>(attempt - 1, 20));
      clock_.sleep_until(clock_.now() + delay);
    }
    HttpResponse response;
    try {
      limiter_.acquire();
      ConcurrencyGate::Slot slot(gate_);
      response = transport_->post(config_.endpoint_url, headers, body);
    } catch (const TransportError& e) {
      last_code = ErrorCode::kBackendUnavailable;
      last_detail = e.what();
      continue;
    }
    if (response.status >= 200 && response.status < 300) {
      return parse_chat_response(response.status, response.body, digest);
    }
    if (response.status == 429) {
      last_code = ErrorCode::kRateLimited;
    } else if (response.status >= 500 && response.status < 600) {
      last_code = ErrorCode::kServerError;
    } else {
      throw ProtocolError(response.status, response.body.substr(0, 200));
    }
    last_detail = "status " + std::to_string(response.status);
  }
  throw Error(last_code, "giving up after " + std::to_string(config_.max_retries + 1) +
                             " attempt(s): " + last_detail);
}

RecordingBackend::RecordingBackend(std::unique_ptr<CompletionBackend> inner,
                                   std::shared_ptr<CassetteWriter> writer)
    : inner_(std::move(inner)), writer_(std::move(writer)) {}

CompletionResponse RecordingBackend::complete(const PromptRequest& request) {
  auto response = inner_->complete(request);
  writer_->append(response);
  return response;
}

std::string read_auth_token(const BackendConfig& config) {
  const char* value = std::getenv(config.auth_token_env.c_str());
  if (value == nullptr || *value == '\0') {
    throw Error(ErrorCode::kConfig,
                "environment variable " + config.auth_token_env + " is not set");
  }
  return value;
}

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config,
                                                const TransportFactory& transport_factory,
                                                Clock* clock) {
  config.validate();
  if (config.kind == BackendKind::kReplay) {
    return std::make_unique<ReplayBackend>(Cassette::load(config.cassette_path));
  }
  static SteadyClock steady;
  Clock& use_clock = clock != nullptr ? *clock : steady;
  auto token = read_auth_token(config);
  auto transport = transport_factory ? transport_factory(config)
                                     : make_http_transport(config.request_timeout);
  auto live = std::make_unique<LiveBackend>(config, std::move(transport),
                                            std::move(token), use_clock);
  if (config.kind == BackendKind::kLive) return live;
  auto writer = std::make_shared<CassetteWriter>(
      config.cassette_path, CassetteMetadata{config.model_id, current_utc_timestamp()});
  return std::make_unique<RecordingBackend>(std::move(live), std::move(writer));
}

CompletionResponse complete(const BackendConfig& config, const PromptRequest& request) {
  return make_backend(config)->complete(request);
}

}  // namespace logllm
