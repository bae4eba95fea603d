// Copyright 2026 The Authors.
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

#include <stdexcept>
#include <string>
#include <string_view>

namespace utterancesmith {

enum class ErrorCode {
  // extraction
  MalformedDocument,
  UnsupportedVersion,
  DecodeError,
  EmptyIdentifier,
  EmptyTemplateSet,
  // text primitives
  EmptyOrders,
  DimensionMismatch,
  KTooLarge,
  KNonPositive,
  // generation
  InvalidArgument,
  BackendUnreachable,
  BackendTimeout,
  BackendStatus,
  MalformedResponse,
  AllBackendsFailed,
  // sampling / classifier / experiment
  TooFewSentences,
  TooFewIntents,
  EmptyIntent,
  EmptyText,
  EmptyTestSet,
  UnknownIntentInTest,
  DatasetTooSmall,
  IncompleteGrid,
  // service
  StoreUnwritable,
  ProjectNotFound,
  NoSeeds,
  UnknownCandidate,
  NoModel,
  Io,
};

constexpr std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::EmptyIdentifier: return "EmptyIdentifier";
    case ErrorCode::EmptyTemplateSet: return "EmptyTemplateSet";
    case ErrorCode::EmptyOrders: return "EmptyOrders";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::KNonPositive: return "KNonPositive";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BackendUnreachable: return "BackendUnreachable";
    case ErrorCode::BackendTimeout: return "BackendTimeout";
    case ErrorCode::BackendStatus: return "BackendStatus";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::AllBackendsFailed: return "AllBackendsFailed";
    case ErrorCode::TooFewSentences: return "TooFewSentences";
    case ErrorCode::TooFewIntents: return "TooFewIntents";
    case ErrorCode::EmptyIntent: return "EmptyIntent";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::UnknownIntentInTest: return "UnknownIntentInTest";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::IncompleteGrid: return "IncompleteGrid";
    case ErrorCode::StoreUnwritable: return "StoreUnwritable";
    case ErrorCode::ProjectNotFound: return "ProjectNotFound";
    case ErrorCode::NoSeeds: return "NoSeeds";
    case ErrorCode::UnknownCandidate: return "UnknownCandidate";
    case ErrorCode::NoModel: return "NoModel";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Domain error carrying a stable, machine-readable code. The message is
/// "<code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return error_code_name(code_); }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace utterancesmith
