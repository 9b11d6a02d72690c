// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "avbench/common.hpp"

namespace avbench::corpus {

using json = nlohmann::ordered_json;

enum class Source { AVA, VoxCeleb2, FriendsMMC, AMI, YouTube, Synthetic };
enum class Task { STG, AVDS, AVSA, NSP, SRID, CSNL };

std::string source_name(Source s);
Source source_from_name(const std::string& name);
std::string task_name(Task t);
Task task_from_name(const std::string& name);
inline const std::vector<Task> kAllTasks = {Task::STG,  Task::AVDS,
                                            Task::AVSA, Task::NSP,
                                            Task::SRID, Task::CSNL};

struct SpeechSegment {
  double start = 0.0;
  double end = 0.0;
  std::string speaker_id;
  std::vector<std::string> text;

  Interval interval() const { return {start, end}; }
};

struct TimedBox {
  double t = 0.0;
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
};

struct FaceTrack {
  std::string track_id;
  std::string identity;
  Interval span;
  std::vector<TimedBox> boxes;
};

struct ClipRecord {
  std::string clip_id;
  Source source = Source::Synthetic;
  double duration = 0.0;
  std::vector<SpeechSegment> segments;  // sorted by start
  std::vector<FaceTrack> face_tracks;
  std::vector<double> scene_breaks;

  /// Speakers plus face-track identities.
  std::set<std::string> identities() const;
  bool check_invariants(std::string* why = nullptr) const;
};

struct Option {
  char label = 'A';
  std::string content;
};

struct GoldAnswer {
  // interval | choice label | reference text | same/different
  std::variant<Interval, char, std::string, bool> value;

  bool is_interval() const { return std::holds_alternative<Interval>(value); }
  bool is_choice() const { return std::holds_alternative<char>(value); }
  bool is_text() const { return std::holds_alternative<std::string>(value); }
  bool is_boolean() const { return std::holds_alternative<bool>(value); }
};

struct QaItem {
  std::string sample_id;
  Task task = Task::STG;
  std::vector<std::string> clip_refs;
  std::string question;
  std::vector<Option> options;  // exactly 4 for MCQ tasks, else empty
  GoldAnswer gold;
  std::optional<Interval> window;
  // identity labels the question references; used by grounding validation
  std::vector<std::string> mentions;
  // AVDS turn bundle (segments intersecting the window, annotated order)
  std::vector<SpeechSegment> turns;

  bool is_mcq() const {
    return task == Task::AVSA || task == Task::NSP || task == Task::SRID ||
           task == Task::CSNL;
  }
  /// Label of the gold option (MCQ tasks only).
  char gold_label() const;
  /// Content of the gold option (MCQ tasks only).
  std::string gold_content() const;
};

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string message;
};

enum class Verdict { Accept, Repair, Discard };

struct ValidationReport {
  std::string sample_id;
  std::vector<ValidationCheck> checks;
  Verdict verdict = Verdict::Discard;

  bool accepted() const { return verdict == Verdict::Accept; }
};

struct DatasetStats {
  std::map<std::string, int> per_task;  // task name -> count
  int total = 0;
  double mean_clip_duration = 0.0;
  int unique_identities = 0;
};

/// Externally authored cross-scene narrative item (never auto-constructed).
struct CsnlRecord {
  std::string record_id;
  std::vector<std::string> clip_refs;
  std::vector<Interval> scenes;  // >= 2, pairwise disjoint
  std::string question;
  std::vector<Option> options;  // exactly 4
  char gold_label = 'A';
  std::vector<std::string> mentions;
  bool coherence_ok = true;  // Likert screening outcome, ingest-time flag
};

using ClipIndex = std::map<std::string, ClipRecord>;

// ---------------------------------------------------------------------------
// Per-task builders
// ---------------------------------------------------------------------------

/// Speaker temporal grounding. Picks the earliest-start valid segment for
/// `speaker`; segments fully covered by another speaker's speech are invalid.
QaItem extract_stg(const ClipRecord& clip, const std::string& speaker,
                   uint64_t seed = 0);

/// Dialogue summarization turn bundle: every segment intersecting `window`,
/// in annotated order. Window length must be <= 40 s.
QaItem extract_avds(const ClipRecord& clip, const Interval& window,
                    uint64_t seed = 0);

/// Speaker association: gold is the co-visible face track whose identity
/// matches the segment's speaker; three seeded distractors.
QaItem extract_avsa(const ClipRecord& clip, size_t segment_index,
                    uint64_t seed = 0);

/// Next speaker prediction around the boundary after turn `boundary_index`.
QaItem extract_nsp(const ClipRecord& clip, size_t boundary_index,
                   uint64_t seed = 0);

/// Re-identification pair; same-clip interval pairs must be separated by at
/// least `min_gap` seconds. Earliest-start valid pair wins.
QaItem extract_srid(const ClipRecord& clip_a, const ClipRecord& clip_b,
                    const std::string& identity_a,
                    const std::string& identity_b, double min_gap,
                    uint64_t seed = 0);

/// Validates and converts an externally authored CSNL record.
QaItem ingest_csnl(const CsnlRecord& record);

/// Runs the five mismatch-detection checks.
ValidationReport validate(const QaItem& item, const ClipIndex& clips);

struct Manifest {
  std::vector<ClipRecord> clips;
  std::vector<CsnlRecord> csnl;
};

struct Quotas {
  std::map<Task, int> wanted;

  static Quotas benchmark_default() {
    return {{{Task::STG, 400},
             {Task::AVDS, 400},
             {Task::AVSA, 400},
             {Task::NSP, 400},
             {Task::SRID, 400},
             {Task::CSNL, 100}}};
  }
};

constexpr double kAvdsWindowLength = 40.0;  // window slides with stride len/2
constexpr double kSridMinGap = 10.0;

std::pair<std::vector<QaItem>, DatasetStats> build_dataset(
    const Manifest& manifest, const Quotas& quotas, uint64_t seed);

// ---------------------------------------------------------------------------
// JSONL persistence
// ---------------------------------------------------------------------------

json to_json(const ClipRecord& clip);
ClipRecord clip_from_json(const json& j);
json to_json(const QaItem& item);
QaItem item_from_json(const json& j);
json to_json(const DatasetStats& stats);
json to_json(const CsnlRecord& rec);
CsnlRecord csnl_from_json(const json& j);

std::vector<ClipRecord> load_clips_jsonl(const std::string& path);
void save_clips_jsonl(const std::string& path,
                      const std::vector<ClipRecord>& clips);
std::vector<QaItem> load_dataset_jsonl(const std::string& path);
void save_dataset_jsonl(const std::string& path,
                        const std::vector<QaItem>& items);
std::vector<CsnlRecord> load_csnl_jsonl(const std::string& path);
void save_csnl_jsonl(const std::string& path,
                     const std::vector<CsnlRecord>& records);

}  // namespace avbench::corpus
