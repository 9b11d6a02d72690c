// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "avbench/common.hpp"
#include "avbench/corpus.hpp"

namespace avbench::perception {

using json = nlohmann::ordered_json;
using corpus::ClipIndex;
using corpus::ClipRecord;
using corpus::Task;
using corpus::TimedBox;

enum class CueKind { FaceCrops, VoiceSegments, Transcript, LipSync };
std::string cue_name(CueKind c);
CueKind cue_from_name(const std::string& name);
inline const std::vector<CueKind> kAllCues = {
    CueKind::FaceCrops, CueKind::VoiceSegments, CueKind::Transcript,
    CueKind::LipSync};

/// Cue requirements per task (the benchmark's cue matrix).
std::set<CueKind> required_cues(Task task);

struct WordObs {
  std::string token;
  double start = 0.0;
  double end = 0.0;
  double confidence = 1.0;
};

struct Transcript {
  std::vector<WordObs> words;  // sorted by start
  std::optional<std::string> language;
};

struct DiarizationSegment {
  double start = 0.0;
  double end = 0.0;
  std::string speaker_id;
  bool overlap = false;
};

constexpr int kEmbeddingDim = 16;

struct FaceTrackObs {
  std::string track_id;
  std::string identity;
  Interval span;
  std::vector<TimedBox> boxes;
  std::vector<double> embedding;  // unit L2 norm
};

struct SyncEstimate {
  double offset = 0.0;      // seconds, signed
  double confidence = 1.0;  // in [0,1]
  std::map<std::string, std::string> mapping;  // segment id -> track id
};

/// Segment ids used in SyncEstimate mappings: "seg_<index>".
std::string segment_id(size_t index);

struct NoiseProfile {
  double timestamp_jitter_sigma = 0.0;
  double word_error_rate = 0.0;
  double boundary_jitter_sigma = 0.0;
  double track_swap_prob = 0.0;
  uint64_t seed = 0;

  bool is_zero() const {
    return timestamp_jitter_sigma == 0.0 && word_error_rate == 0.0 &&
           boundary_jitter_sigma == 0.0 && track_swap_prob == 0.0;
  }
};

struct CueBundle {
  std::map<CueKind, json> payloads;
};

// ---------------------------------------------------------------------------
// Mock tools: pure functions of (clip, profile)
// ---------------------------------------------------------------------------

Transcript mock_asr(const ClipRecord& clip, const NoiseProfile& profile);
std::vector<DiarizationSegment> mock_diarization(const ClipRecord& clip,
                                                 const NoiseProfile& profile);
std::vector<FaceTrackObs> mock_face_tracks(const ClipRecord& clip,
                                           const NoiseProfile& profile);
SyncEstimate mock_av_sync(const ClipRecord& clip, const NoiseProfile& profile);

// ---------------------------------------------------------------------------
// Tool client with on-disk cache
// ---------------------------------------------------------------------------

enum class ToolKind { Asr, Diarization, FaceTracks, AvSync };
std::string tool_name(ToolKind t);
ToolKind tool_from_name(const std::string& name);
inline const std::vector<ToolKind> kAllTools = {
    ToolKind::Asr, ToolKind::Diarization, ToolKind::FaceTracks,
    ToolKind::AvSync};

/// Cue kind each tool supplies.
CueKind cue_for_tool(ToolKind t);
ToolKind tool_for_cue(CueKind c);

struct ToolRequest {
  ToolKind tool = ToolKind::Asr;
  std::string clip_id;
  json params = json::object();
};

using ToolOutput = std::variant<Transcript, std::vector<DiarizationSegment>,
                                std::vector<FaceTrackObs>, SyncEstimate>;

json to_json(const Transcript& t);
json to_json(const std::vector<DiarizationSegment>& segs);
json to_json(const std::vector<FaceTrackObs>& tracks);
json to_json(const SyncEstimate& s);

/// Parses a tool payload, enforcing the type invariants (SchemaError).
ToolOutput parse_tool_output(ToolKind tool, const json& payload);

class Transport {
 public:
  virtual ~Transport() = default;
  virtual json fetch(const ToolRequest& request) = 0;
};

/// Serves requests from the seeded mocks; byte-identical to direct calls.
class MockTransport : public Transport {
 public:
  MockTransport(const ClipIndex* clips, NoiseProfile profile)
      : clips_(clips), profile_(profile) {}
  json fetch(const ToolRequest& request) override;
  int calls() const { return calls_; }

 private:
  const ClipIndex* clips_;
  NoiseProfile profile_;
  int calls_ = 0;
};

/// POST {clip_id, params} to the per-tool endpoint roots.
class RemoteTransport : public Transport {
 public:
  /// `endpoints` keyed by tool kind; missing entries raise TransportError.
  explicit RemoteTransport(std::map<ToolKind, std::string> endpoints)
      : endpoints_(std::move(endpoints)) {}
  /// Reads TOOL_ASR_URL, TOOL_DIAR_URL, TOOL_FACE_URL, TOOL_SYNC_URL.
  static RemoteTransport from_env();
  json fetch(const ToolRequest& request) override;

 private:
  std::map<ToolKind, std::string> endpoints_;
};

class ToolClient {
 public:
  /// `cache_root` may be empty to disable caching.
  ToolClient(Transport& transport, std::filesystem::path cache_root)
      : transport_(&transport), cache_root_(std::move(cache_root)) {}

  /// Responses are cached on disk keyed by (tool, clip_id, params hash);
  /// cache hits bypass the transport. Writes are atomic (temp + rename).
  ToolOutput call(const ToolRequest& request);
  json call_raw(const ToolRequest& request);

 private:
  Transport* transport_;
  std::filesystem::path cache_root_;
};

}  // namespace avbench::perception
