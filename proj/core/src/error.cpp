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

#include "logllm/error.hpp"

#include <sstream>

namespace logllm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kRejectRateExceeded: return "RejectRateExceeded";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSamplingExhausted: return "SamplingExhausted";
    case ErrorCode::kEmptyMessage: return "EmptyMessage";
    case ErrorCode::kInvalidWindowSize: return "InvalidWindowSize";
    case ErrorCode::kMissingParse: return "MissingParse";
    case ErrorCode::kInvalidInjection: return "InvalidInjection";
    case ErrorCode::kInvalidTemplate: return "InvalidTemplate";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kCassetteMiss: return "CassetteMiss";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kServerError: return "ServerError";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kUnrecognizedFlag: return "UnrecognizedFlag";
    case ErrorCode::kUnparsableResponse: return "UnparsableResponse";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidWindowSize:
    case ErrorCode::kInvalidInjection:
    case ErrorCode::kInvalidTemplate:
    case ErrorCode::kConfig:
      return ErrorCategory::kUsage;
    case ErrorCode::kCassetteMiss:
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kRateLimited:
    case ErrorCode::kServerError:
    case ErrorCode::kProtocolError:
      return ErrorCategory::kBackend;
    default:
      return ErrorCategory::kData;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

namespace {

std::string describe_fractions(const std::vector<double>& seen, double lo,
                               double hi) {
  std::ostringstream os;
  os << "no slice with anomaly fraction in [" << lo << ", " << hi
     << "] after " << seen.size() << " draws";
  if (!seen.empty()) {
    os << "; fractions seen:";
    for (std::size_t i = 0; i < seen.size() && i < 10; ++i) os << ' ' << seen[i];
    if (seen.size() > 10) os << " ...";
  }
  return os.str();
}

std::string join_digests(const std::vector<std::string>& digests) {
  std::string out = std::to_string(digests.size()) + " missing digest(s):";
  for (const auto& d : digests) out += "\n  " + d;
  return out;
}

}  // namespace

SamplingExhausted::SamplingExhausted(std::vector<double> fractions_seen,
                                     double min_fraction, double max_fraction)
    : Error(ErrorCode::kSamplingExhausted,
            describe_fractions(fractions_seen, min_fraction, max_fraction)),
      fractions_seen_(std::move(fractions_seen)) {}

CassetteMiss::CassetteMiss(std::string digest)
    : Error(ErrorCode::kCassetteMiss, "no cassette entry for " + digest),
      digest_(std::move(digest)) {}

MissingCassetteEntries::MissingCassetteEntries(std::vector<std::string> digests)
    : Error(ErrorCode::kCassetteMiss, join_digests(digests)),
      digests_(std::move(digests)) {}

ProtocolError::ProtocolError(int status, const std::string& detail)
    : Error(ErrorCode::kProtocolError,
            "status " + std::to_string(status) + ": " + detail),
      status_(status) {}

UnparsableResponse::UnparsableResponse(std::string raw_text,
                                       std::string reformatted_text)
    : Error(ErrorCode::kUnparsableResponse,
            "no structured verdict after reformat"),
      raw_text_(std::move(raw_text)),
      reformatted_text_(std::move(reformatted_text)) {}

}  // namespace logllm
