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
#include <stdexcept>
#include <string>
#include <vector>

namespace logllm {

enum class ErrorCode {
  kIo,
  kMalformedLine,
  kRejectRateExceeded,
  kEmptyDataset,
  kInvalidArgument,
  kSamplingExhausted,
  kEmptyMessage,
  kInvalidWindowSize,
  kMissingParse,
  kInvalidInjection,
  kInvalidTemplate,
  kConfig,
  kCassetteMiss,
  kBackendUnavailable,
  kRateLimited,
  kServerError,
  kProtocolError,
  kUnrecognizedFlag,
  kUnparsableResponse,
};

/// Coarse grouping used by the command-line tool to choose an exit code.
enum class ErrorCategory { kUsage, kData, kBackend };

const char* to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

class SamplingExhausted : public Error {
 public:
  SamplingExhausted(std::vector<double> fractions_seen, double min_fraction,
                    double max_fraction);

  const std::vector<double>& fractions_seen() const noexcept {
    return fractions_seen_;
  }

 private:
  std::vector<double> fractions_seen_;
};

class CassetteMiss : public Error {
 public:
  explicit CassetteMiss(std::string digest);

  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

/// Raised once per experiment row when replay could not answer some prompts.
class MissingCassetteEntries : public Error {
 public:
  explicit MissingCassetteEntries(std::vector<std::string> digests);

  const std::vector<std::string>& digests() const noexcept { return digests_; }

 private:
  std::vector<std::string> digests_;
};

class ProtocolError : public Error {
 public:
  ProtocolError(int status, const std::string& detail);

  int status() const noexcept { return status_; }

 private:
  int status_;
};

class UnparsableResponse : public Error {
 public:
  UnparsableResponse(std::string raw_text, std::string reformatted_text);

  const std::string& raw_text() const noexcept { return raw_text_; }
  const std::string& reformatted_text() const noexcept {
    return reformatted_text_;
  }

 private:
  std::string raw_text_;
  std::string reformatted_text_;
};

}  // namespace logllm
