// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace avbench {

enum class ErrorCode {
  // corpus
  NoSegmentForSpeaker,
  AmbiguousOverlap,
  EmptyWindow,
  BadWindow,
  InsufficientDistractors,
  OverlappingBoundary,
  InsufficientIdentities,
  NoValidIntervalPair,
  ScenesNotDisjoint,
  BadOptionCount,
  UnboundPlaceholder,
  QuotaUnmet,
  // perception
  TransportError,
  SchemaError,
  UnmappableSegment,
  // harness
  CueMismatch,
  ModelError,
  ToolError,
  MalformedDecision,
  ModeMismatch,
  // metrics
  LengthMismatch,
  EmptyInput,
  EmptyReference,
  EmptyCorpus,
  OutOfRangeRating,
  JudgeParseError,
  JudgeTransportError,
  // extraction
  ExtractorParseError,
  // raft
  InvalidCategory,
  ZeroWeights,
  NonFiniteReward,
  DimensionMismatch,
  StreamLengthMismatch,
  ShapeMismatch,
  PartitionError,
  DivergenceDetected,
  // cli
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Closed time interval in seconds.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool overlaps(const Interval& other) const {
    return start < other.end && end > other.start;
  }
  bool operator==(const Interval& other) const {
    return start == other.start && end == other.end;
  }
};

// splitmix64-based generator: identical sequences on every platform, unlike
// the distributions in <random>.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  uint64_t uniform_int(uint64_t n) {
    // modulo bias is negligible for the small n used here
    return next_u64() % n;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

/// FNV-1a, used to derive per-item sub-seeds from string ids.
inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  SeededRng r(a ^ (b * 0x9e3779b97f4a7c15ULL));
  return r.next_u64();
}

/// Lowercase, split on whitespace, strip terminal punctuation.
std::vector<std::string> tokenize(const std::string& text);

/// Fixed-point time token, e.g. 2.0 -> "2.0s".
std::string format_time_token(double seconds);

}  // namespace avbench
