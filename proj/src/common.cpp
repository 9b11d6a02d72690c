// SPDX-License-Identifier: Apache-2.0
#include "avbench/common.hpp"

#include <cctype>
#include <cstdio>

namespace avbench {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoSegmentForSpeaker: return "NoSegmentForSpeaker";
    case ErrorCode::AmbiguousOverlap: return "AmbiguousOverlap";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::InsufficientDistractors: return "InsufficientDistractors";
    case ErrorCode::OverlappingBoundary: return "OverlappingBoundary";
    case ErrorCode::InsufficientIdentities: return "InsufficientIdentities";
    case ErrorCode::NoValidIntervalPair: return "NoValidIntervalPair";
    case ErrorCode::ScenesNotDisjoint: return "ScenesNotDisjoint";
    case ErrorCode::BadOptionCount: return "BadOptionCount";
    case ErrorCode::UnboundPlaceholder: return "UnboundPlaceholder";
    case ErrorCode::QuotaUnmet: return "QuotaUnmet";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnmappableSegment: return "UnmappableSegment";
    case ErrorCode::CueMismatch: return "CueMismatch";
    case ErrorCode::ModelError: return "ModelError";
    case ErrorCode::ToolError: return "ToolError";
    case ErrorCode::MalformedDecision: return "MalformedDecision";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::OutOfRangeRating: return "OutOfRangeRating";
    case ErrorCode::JudgeParseError: return "JudgeParseError";
    case ErrorCode::JudgeTransportError: return "JudgeTransportError";
    case ErrorCode::ExtractorParseError: return "ExtractorParseError";
    case ErrorCode::InvalidCategory: return "InvalidCategory";
    case ErrorCode::ZeroWeights: return "ZeroWeights";
    case ErrorCode::NonFiniteReward: return "NonFiniteReward";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::StreamLengthMismatch: return "StreamLengthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::PartitionError: return "PartitionError";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&]() {
    // strip terminal punctuation
    while (!current.empty()) {
      char c = current.back();
      if (c == '.' || c == ',' || c == '!' || c == '?' || c == ';' ||
          c == ':') {
        current.pop_back();
      } else {
        break;
      }
    }
    if (!current.empty()) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      current.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  flush();
  return tokens;
}

std::string format_time_token(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1fs", seconds);
  return buf;
}

}  // namespace avbench
