// SPDX-License-Identifier: Apache-2.0
#include "avbench/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "avbench/templates.hpp"

namespace avbench::corpus {

std::string source_name(Source s) {
  switch (s) {
    case Source::AVA: return "AVA";
    case Source::VoxCeleb2: return "VoxCeleb2";
    case Source::FriendsMMC: return "FriendsMMC";
    case Source::AMI: return "AMI";
    case Source::YouTube: return "YouTube";
    case Source::Synthetic: return "Synthetic";
  }
  return "Synthetic";
}

Source source_from_name(const std::string& name) {
  if (name == "AVA") return Source::AVA;
  if (name == "VoxCeleb2") return Source::VoxCeleb2;
  if (name == "FriendsMMC") return Source::FriendsMMC;
  if (name == "AMI") return Source::AMI;
  if (name == "YouTube") return Source::YouTube;
  if (name == "Synthetic") return Source::Synthetic;
  throw Error(ErrorCode::SchemaError, "unknown source: " + name);
}

std::string task_name(Task t) {
  switch (t) {
    case Task::STG: return "STG";
    case Task::AVDS: return "AVDS";
    case Task::AVSA: return "AVSA";
    case Task::NSP: return "NSP";
    case Task::SRID: return "SRID";
    case Task::CSNL: return "CSNL";
  }
  return "STG";
}

Task task_from_name(const std::string& name) {
  for (Task t : kAllTasks) {
    if (task_name(t) == name) return t;
  }
  throw Error(ErrorCode::SchemaError, "unknown task: " + name);
}

std::set<std::string> ClipRecord::identities() const {
  std::set<std::string> ids;
  for (const auto& s : segments) ids.insert(s.speaker_id);
  for (const auto& t : face_tracks) ids.insert(t.identity);
  return ids;
}

bool ClipRecord::check_invariants(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (duration <= 0.0) return fail("non-positive duration");
  double prev_start = -1.0;
  for (const auto& s : segments) {
    if (!(0.0 <= s.start && s.start < s.end && s.end <= duration))
      return fail("segment outside [0,duration]");
    if (s.speaker_id.empty()) return fail("empty speaker id");
    if (s.start < prev_start) return fail("segments not sorted");
    prev_start = s.start;
  }
  for (const auto& t : face_tracks) {
    if (!(0.0 <= t.span.start && t.span.start < t.span.end &&
          t.span.end <= duration))
      return fail("face track span outside clip");
    for (const auto& b : t.boxes) {
      if (b.t < t.span.start || b.t > t.span.end)
        return fail("box timestamp outside track span");
    }
  }
  return true;
}

char QaItem::gold_label() const {
  if (gold.is_choice()) return std::get<char>(gold.value);
  if (gold.is_boolean()) {
    std::string want = gold_content();
    for (const auto& o : options) {
      if (o.content == want) return o.label;
    }
  }
  throw Error(ErrorCode::SchemaError, "no gold label for " + sample_id);
}

std::string QaItem::gold_content() const {
  if (gold.is_boolean()) {
    return std::get<bool>(gold.value) ? "Same speaker" : "Different speakers";
  }
  if (gold.is_choice()) {
    char l = std::get<char>(gold.value);
    for (const auto& o : options) {
      if (o.label == l) return o.content;
    }
  }
  throw Error(ErrorCode::SchemaError, "no gold content for " + sample_id);
}

namespace {

constexpr char kLabels[] = {'A', 'B', 'C', 'D'};

int pick_template(SeededRng& rng) {
  return 1 + static_cast<int>(rng.uniform_int(kTemplatesPerTask));
}

/// Builds the 4 options from gold + 3 distractor contents, shuffling the
/// final order with `rng`. Returns the gold label.
char assign_options(QaItem& item, const std::string& gold_content,
                    const std::vector<std::string>& distractors,
                    SeededRng& rng) {
  std::vector<std::string> contents = {gold_content};
  contents.insert(contents.end(), distractors.begin(), distractors.end());
  rng.shuffle(contents);
  item.options.clear();
  char gold_label = 'A';
  for (size_t i = 0; i < contents.size(); ++i) {
    item.options.push_back({kLabels[i], contents[i]});
    if (contents[i] == gold_content) gold_label = kLabels[i];
  }
  item.gold.value = gold_label;
  return gold_label;
}

}  // namespace

QaItem extract_stg(const ClipRecord& clip, const std::string& speaker,
                   uint64_t seed) {
  std::vector<const SpeechSegment*> own;
  for (const auto& s : clip.segments) {
    if (s.speaker_id == speaker) own.push_back(&s);
  }
  if (own.empty()) {
    throw Error(ErrorCode::NoSegmentForSpeaker, speaker + " in " + clip.clip_id);
  }
  // a candidate fully covered by another speaker's segment is ambiguous
  std::vector<const SpeechSegment*> valid;
  for (const auto* s : own) {
    bool covered = false;
    for (const auto& other : clip.segments) {
      if (other.speaker_id == speaker) continue;
      if (other.start <= s->start && other.end >= s->end) {
        covered = true;
        break;
      }
    }
    if (!covered) valid.push_back(s);
  }
  if (valid.empty()) {
    throw Error(ErrorCode::AmbiguousOverlap, speaker + " in " + clip.clip_id);
  }
  // tie-break: earliest start
  const SpeechSegment* chosen = valid.front();
  for (const auto* s : valid) {
    if (s->start < chosen->start) chosen = s;
  }

  QaItem item;
  item.sample_id = "stg:" + clip.clip_id + ":" + speaker;
  item.task = Task::STG;
  item.clip_refs = {clip.clip_id};
  item.gold.value = chosen->interval();
  item.window = chosen->interval();
  item.turns = {*chosen};
  item.mentions = {speaker};

  SeededRng rng(mix_seed(seed, fnv1a(item.sample_id)));
  TemplateContext ctx;
  // the asked-for quantity is a unit word, not the gold timestamp
  ctx.time_tokens = {"time (in seconds)", "time (in seconds)"};
  ctx.descriptors = {speaker, speaker};
  item.question = render_question(Task::STG, ctx, pick_template(rng));
  return item;
}

QaItem extract_avds(const ClipRecord& clip, const Interval& window,
                    uint64_t seed) {
  if (window.length() <= 0.0 || window.length() > kAvdsWindowLength ||
      window.start < 0.0 || window.end > clip.duration) {
    throw Error(ErrorCode::BadWindow, clip.clip_id);
  }
  std::vector<SpeechSegment> bundle;
  for (const auto& s : clip.segments) {
    if (s.interval().overlaps(window)) bundle.push_back(s);
  }
  if (bundle.empty()) {
    throw Error(ErrorCode::EmptyWindow, clip.clip_id);
  }

  QaItem item;
  item.sample_id = "avds:" + clip.clip_id + ":" + format_time_token(window.start);
  item.task = Task::AVDS;
  item.clip_refs = {clip.clip_id};
  item.window = window;
  item.turns = bundle;
  for (const auto& s : bundle) {
    if (std::find(item.mentions.begin(), item.mentions.end(), s.speaker_id) ==
        item.mentions.end()) {
      item.mentions.push_back(s.speaker_id);
    }
  }
  // gold reference text: ordered concatenation of the window's turn texts
  std::string ref;
  for (const auto& s : bundle) {
    for (const auto& tok : s.text) {
      if (!ref.empty()) ref += ' ';
      ref += tok;
    }
  }
  item.gold.value = ref;

  SeededRng rng(mix_seed(seed, fnv1a(item.sample_id)));
  TemplateContext ctx;
  ctx.time_tokens = {format_time_token(window.start),
                     format_time_token(window.end)};
  ctx.descriptors = {bundle.front().speaker_id};
  ctx.outfit_descriptors = {bundle.front().speaker_id};
  item.question = render_question(Task::AVDS, ctx, pick_template(rng));
  return item;
}

QaItem extract_avsa(const ClipRecord& clip, size_t segment_index,
                    uint64_t seed) {
  if (segment_index >= clip.segments.size()) {
    throw Error(ErrorCode::ConfigError,
                "segment index out of range in " + clip.clip_id);
  }
  const SpeechSegment& seg = clip.segments[segment_index];

  std::set<std::string> covisible;
  for (const auto& t : clip.face_tracks) {
    if (t.span.overlaps(seg.interval())) covisible.insert(t.identity);
  }
  std::vector<std::string> others;
  for (const auto& id : covisible) {
    if (id != seg.speaker_id) others.push_back(id);
  }
  if (!covisible.count(seg.speaker_id) || others.size() < 3) {
    throw Error(ErrorCode::InsufficientDistractors,
                clip.clip_id + " segment " + std::to_string(segment_index));
  }

  QaItem item;
  item.sample_id = "avsa:" + clip.clip_id + ":" + std::to_string(segment_index);
  item.task = Task::AVSA;
  item.clip_refs = {clip.clip_id};
  item.window = seg.interval();
  item.turns = {seg};

  SeededRng rng(mix_seed(seed, fnv1a(item.sample_id)));
  // distractors: first 3 of the seeded shuffle of the other identities
  rng.shuffle(others);
  others.resize(3);
  assign_options(item, seg.speaker_id, others, rng);
  for (const auto& o : item.options) item.mentions.push_back(o.content);

  TemplateContext ctx;
  ctx.time_tokens = {format_time_token(seg.start)};
  item.question = render_question(Task::AVSA, ctx, pick_template(rng));
  return item;
}

QaItem extract_nsp(const ClipRecord& clip, size_t boundary_index,
                   uint64_t seed) {
  if (boundary_index + 1 >= clip.segments.size()) {
    throw Error(ErrorCode::ConfigError,
                "boundary index out of range in " + clip.clip_id);
  }
  const SpeechSegment& before = clip.segments[boundary_index];
  const SpeechSegment& after = clip.segments[boundary_index + 1];
  if (before.end > after.start) {
    throw Error(ErrorCode::OverlappingBoundary, clip.clip_id);
  }

  std::vector<std::string> others;
  for (const auto& id : clip.identities()) {
    if (id != after.speaker_id) others.push_back(id);
  }
  if (others.size() < 3) {
    throw Error(ErrorCode::InsufficientIdentities, clip.clip_id);
  }

  QaItem item;
  item.sample_id = "nsp:" + clip.clip_id + ":" + std::to_string(boundary_index);
  item.task = Task::NSP;
  item.clip_refs = {clip.clip_id};
  item.window = Interval{0.0, before.end};
  item.turns.assign(clip.segments.begin(),
                    clip.segments.begin() + boundary_index + 1);

  SeededRng rng(mix_seed(seed, fnv1a(item.sample_id)));
  rng.shuffle(others);
  others.resize(3);
  assign_options(item, after.speaker_id, others, rng);
  for (const auto& o : item.options) item.mentions.push_back(o.content);

  TemplateContext ctx;
  ctx.time_tokens = {format_time_token(before.end),
                     format_time_token(before.end)};
  item.question = render_question(Task::NSP, ctx, pick_template(rng));
  return item;
}

QaItem extract_srid(const ClipRecord& clip_a, const ClipRecord& clip_b,
                    const std::string& identity_a,
                    const std::string& identity_b, double min_gap,
                    uint64_t seed) {
  std::vector<const SpeechSegment*> segs_a, segs_b;
  for (const auto& s : clip_a.segments) {
    if (s.speaker_id == identity_a) segs_a.push_back(&s);
  }
  for (const auto& s : clip_b.segments) {
    if (s.speaker_id == identity_b) segs_b.push_back(&s);
  }
  bool same_clip = clip_a.clip_id == clip_b.clip_id;

  const SpeechSegment* pick_a = nullptr;
  const SpeechSegment* pick_b = nullptr;
  for (const auto* a : segs_a) {
    for (const auto* b : segs_b) {
      if (same_clip) {
        if (a == b) continue;
        double gap = std::max(a->start, b->start) - std::min(a->end, b->end);
        if (gap < min_gap) continue;  // cross-clip pairs always allowed
      }
      if (!pick_a || a->start < pick_a->start ||
          (a->start == pick_a->start && b->start < pick_b->start)) {
        pick_a = a;
        pick_b = b;
      }
    }
  }
  if (!pick_a) {
    throw Error(ErrorCode::NoValidIntervalPair,
                identity_a + "/" + identity_b);
  }

  QaItem item;
  item.sample_id = "srid:" + clip_a.clip_id + ":" + identity_a + ":" +
                   clip_b.clip_id + ":" + identity_b;
  item.task = Task::SRID;
  item.clip_refs = {clip_a.clip_id};
  if (!same_clip) item.clip_refs.push_back(clip_b.clip_id);
  item.turns = {*pick_a, *pick_b};
  item.mentions = {identity_a};
  if (identity_b != identity_a) item.mentions.push_back(identity_b);

  bool same = identity_a == identity_b;
  item.gold.value = same;

  SeededRng rng(mix_seed(seed, fnv1a(item.sample_id)));
  std::string gold_content = same ? "Same speaker" : "Different speakers";
  std::vector<std::string> contents = {"Same speaker", "Different speakers",
                                       "Same voice, different person",
                                       "Cannot be determined"};
  rng.shuffle(contents);
  item.options.clear();
  for (size_t i = 0; i < contents.size(); ++i) {
    item.options.push_back({kLabels[i], contents[i]});
  }
  // gold stays the boolean; gold_label() resolves through the option contents

  TemplateContext ctx;
  ctx.time_tokens = {format_time_token(pick_a->start),
                     format_time_token(pick_b->start)};
  ctx.descriptors = {identity_a};
  item.question = render_question(Task::SRID, ctx, pick_template(rng));
  return item;
}

QaItem ingest_csnl(const CsnlRecord& record) {
  if (record.options.size() != 4) {
    throw Error(ErrorCode::BadOptionCount,
                record.record_id + ": " + std::to_string(record.options.size()));
  }
  if (record.scenes.size() < 2) {
    throw Error(ErrorCode::ScenesNotDisjoint,
                record.record_id + ": fewer than 2 scenes");
  }
  for (size_t i = 0; i < record.scenes.size(); ++i) {
    for (size_t j = i + 1; j < record.scenes.size(); ++j) {
      if (record.scenes[i].overlaps(record.scenes[j])) {
        throw Error(ErrorCode::ScenesNotDisjoint, record.record_id);
      }
    }
  }
  bool gold_found = false;
  for (const auto& o : record.options) {
    if (o.label == record.gold_label) gold_found = true;
  }
  if (!gold_found) {
    throw Error(ErrorCode::BadOptionCount,
                record.record_id + ": gold label not among options");
  }
  if (!record.coherence_ok) {
    throw Error(ErrorCode::ConfigError,
                record.record_id + ": failed coherence screening");
  }

  QaItem item;
  item.sample_id = "csnl:" + record.record_id;
  item.task = Task::CSNL;
  item.clip_refs = record.clip_refs;
  item.question = record.question;
  item.options = record.options;
  item.gold.value = record.gold_label;
  item.mentions = record.mentions;
  return item;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationReport validate(const QaItem& item, const ClipIndex& clips) {
  ValidationReport report;
  report.sample_id = item.sample_id;

  std::vector<const ClipRecord*> refs;
  bool refs_ok = true;
  std::string missing;
  for (const auto& id : item.clip_refs) {
    auto it = clips.find(id);
    if (it == clips.end()) {
      refs_ok = false;
      missing = id;
    } else {
      refs.push_back(&it->second);
    }
  }
  std::set<std::string> known_ids;
  std::set<std::string> known_speakers;
  double max_duration = 0.0;
  for (const auto* c : refs) {
    for (const auto& id : c->identities()) known_ids.insert(id);
    for (const auto& s : c->segments) known_speakers.insert(s.speaker_id);
    max_duration = std::max(max_duration, c->duration);
  }

  // 1. speaker-label consistency: every turn speaker is annotated somewhere
  {
    bool ok = refs_ok;
    std::string msg;
    for (const auto& t : item.turns) {
      if (!known_speakers.count(t.speaker_id)) {
        ok = false;
        msg = "unknown speaker " + t.speaker_id;
      }
    }
    if (!refs_ok) msg = "unresolved clip ref " + missing;
    report.checks.push_back({"speaker_consistency", ok, msg});
  }

  // 2. timestamp alignment: attached turns coincide with annotated segments
  {
    bool ok = true;
    std::string msg;
    for (const auto& t : item.turns) {
      bool found = false;
      for (const auto* c : refs) {
        for (const auto& s : c->segments) {
          if (s.speaker_id == t.speaker_id &&
              std::abs(s.start - t.start) < 1e-9 &&
              std::abs(s.end - t.end) < 1e-9) {
            found = true;
          }
        }
      }
      if (!found) {
        ok = false;
        msg = "turn not aligned to an annotated segment";
      }
    }
    report.checks.push_back({"timestamp_alignment", ok, msg});
  }

  // 3. span validity
  {
    bool ok = true;
    std::string msg;
    auto check_span = [&](const Interval& iv) {
      if (!(0.0 <= iv.start && iv.start < iv.end &&
            (refs.empty() || iv.end <= max_duration + 1e-9))) {
        ok = false;
        msg = "invalid span";
      }
    };
    if (item.gold.is_interval()) check_span(std::get<Interval>(item.gold.value));
    if (item.window) check_span(*item.window);
    report.checks.push_back({"span_validity", ok, msg});
  }

  // 4. grounding: no unresolved placeholders, all mentioned entities exist
  {
    bool ok = refs_ok;
    std::string msg = refs_ok ? "" : "unresolved clip ref " + missing;
    if (item.question.find('<') != std::string::npos) {
      ok = false;
      msg = "unresolved placeholder in question";
    }
    for (const auto& m : item.mentions) {
      if (!known_ids.count(m)) {
        ok = false;
        msg = "entity " + m + " absent from metadata";
      }
    }
    report.checks.push_back({"grounding", ok, msg});
  }

  // 5. cross-modal consistency: identity-centric tasks need a matching face
  //    track for each mentioned speaker
  {
    bool ok = true;
    std::string msg;
    if (item.task == Task::STG || item.task == Task::AVSA ||
        item.task == Task::SRID) {
      for (const auto& m : item.mentions) {
        bool visible = false;
        for (const auto* c : refs) {
          for (const auto& t : c->face_tracks) {
            if (t.identity == m) visible = true;
          }
        }
        if (!visible) {
          ok = false;
          msg = "no face track for " + m;
        }
      }
    }
    // MCQ shape is part of cross-modal/reference consistency
    if (item.is_mcq()) {
      if (item.options.size() != 4) {
        ok = false;
        msg = "MCQ without 4 options";
      } else {
        try {
          (void)item.gold_label();
        } catch (const Error&) {
          ok = false;
          msg = "no resolvable gold option";
        }
      }
    }
    report.checks.push_back({"cross_modal", ok, msg});
  }

  bool all_pass = true;
  bool only_timestamp_failed = true;
  for (const auto& c : report.checks) {
    if (!c.pass) {
      all_pass = false;
      if (c.name != "timestamp_alignment") only_timestamp_failed = false;
    }
  }
  report.verdict = all_pass ? Verdict::Accept
                            : (only_timestamp_failed ? Verdict::Repair
                                                     : Verdict::Discard);
  return report;
}

// ---------------------------------------------------------------------------
// Dataset assembly
// ---------------------------------------------------------------------------

std::pair<std::vector<QaItem>, DatasetStats> build_dataset(
    const Manifest& manifest, const Quotas& quotas, uint64_t seed) {
  ClipIndex index;
  for (const auto& c : manifest.clips) index[c.clip_id] = c;

  std::vector<QaItem> out;
  DatasetStats stats;

  auto want = [&](Task t) {
    auto it = quotas.wanted.find(t);
    return it == quotas.wanted.end() ? 0 : it->second;
  };

  for (Task task : kAllTasks) {
    int quota = want(task);
    stats.per_task[task_name(task)] = 0;
    if (quota == 0) continue;
    int accepted = 0;

    auto offer = [&](QaItem&& item) {
      if (accepted >= quota) return;
      if (!validate(item, index).accepted()) return;
      out.push_back(std::move(item));
      ++accepted;
    };

    for (const auto& [clip_id, clip] : index) {
      if (accepted >= quota) break;
      switch (task) {
        case Task::STG: {
          std::set<std::string> speakers;
          for (const auto& s : clip.segments) speakers.insert(s.speaker_id);
          for (const auto& spk : speakers) {
            if (accepted >= quota) break;
            try {
              offer(extract_stg(clip, spk, seed));
            } catch (const Error&) {
            }
          }
          break;
        }
        case Task::AVDS: {
          double stride = kAvdsWindowLength / 2.0;
          for (double start = 0.0; start < clip.duration; start += stride) {
            if (accepted >= quota) break;
            Interval w{start, std::min(start + kAvdsWindowLength,
                                       clip.duration)};
            if (w.length() <= 0.0) break;
            try {
              offer(extract_avds(clip, w, seed));
            } catch (const Error&) {
            }
          }
          break;
        }
        case Task::AVSA: {
          for (size_t i = 0; i < clip.segments.size(); ++i) {
            if (accepted >= quota) break;
            try {
              offer(extract_avsa(clip, i, seed));
            } catch (const Error&) {
            }
          }
          break;
        }
        case Task::NSP: {
          for (size_t b = 0; b + 1 < clip.segments.size(); ++b) {
            if (accepted >= quota) break;
            try {
              offer(extract_nsp(clip, b, seed));
            } catch (const Error&) {
            }
          }
          break;
        }
        case Task::SRID: {
          std::vector<std::string> ids;
          for (const auto& s : clip.segments) {
            if (std::find(ids.begin(), ids.end(), s.speaker_id) == ids.end())
              ids.push_back(s.speaker_id);
          }
          std::sort(ids.begin(), ids.end());
          for (size_t i = 0; i < ids.size(); ++i) {
            for (size_t j = i; j < ids.size(); ++j) {
              if (accepted >= quota) break;
              try {
                offer(extract_srid(clip, clip, ids[i], ids[j], kSridMinGap,
                                   seed));
              } catch (const Error&) {
              }
            }
          }
          break;
        }
        case Task::CSNL:
          break;  // handled outside the clip loop
      }
    }

    if (task == Task::CSNL) {
      for (const auto& rec : manifest.csnl) {
        if (accepted >= quota) break;
        try {
          offer(ingest_csnl(rec));
        } catch (const Error&) {
        }
      }
    }

    if (accepted < quota) {
      std::ostringstream msg;
      msg << task_name(task) << " achieved " << accepted << " of " << quota;
      throw Error(ErrorCode::QuotaUnmet, msg.str());
    }
    stats.per_task[task_name(task)] = accepted;
    stats.total += accepted;
  }

  double dur_sum = 0.0;
  std::set<std::string> all_ids;
  for (const auto& c : manifest.clips) {
    dur_sum += c.duration;
    for (const auto& id : c.identities()) all_ids.insert(id);
  }
  stats.mean_clip_duration =
      manifest.clips.empty() ? 0.0 : dur_sum / manifest.clips.size();
  stats.unique_identities = static_cast<int>(all_ids.size());
  return {out, stats};
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json interval_to_json(const Interval& iv) {
  return json{{"start", iv.start}, {"end", iv.end}};
}

Interval interval_from_json(const json& j) {
  return {j.at("start").get<double>(), j.at("end").get<double>()};
}

json options_to_json(const std::vector<Option>& options) {
  json arr = json::array();
  for (const auto& o : options) {
    arr.push_back({{"label", std::string(1, o.label)}, {"content", o.content}});
  }
  return arr;
}

std::vector<Option> options_from_json(const json& j) {
  std::vector<Option> out;
  for (const auto& o : j) {
    std::string label = o.at("label").get<std::string>();
    if (label.size() != 1)
      throw Error(ErrorCode::SchemaError, "bad option label");
    out.push_back({label[0], o.at("content").get<std::string>()});
  }
  return out;
}

}  // namespace

json to_json(const ClipRecord& clip) {
  json segs = json::array();
  for (const auto& s : clip.segments) {
    segs.push_back({{"start", s.start},
                    {"end", s.end},
                    {"speaker_id", s.speaker_id},
                    {"text", s.text}});
  }
  json tracks = json::array();
  for (const auto& t : clip.face_tracks) {
    json boxes = json::array();
    for (const auto& b : t.boxes) {
      boxes.push_back({{"t", b.t}, {"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
    }
    tracks.push_back({{"track_id", t.track_id},
                      {"identity", t.identity},
                      {"span", interval_to_json(t.span)},
                      {"boxes", boxes}});
  }
  return json{{"clip_id", clip.clip_id},
              {"source", source_name(clip.source)},
              {"duration", clip.duration},
              {"segments", segs},
              {"face_tracks", tracks},
              {"scene_breaks", clip.scene_breaks}};
}

ClipRecord clip_from_json(const json& j) {
  ClipRecord c;
  c.clip_id = j.at("clip_id").get<std::string>();
  c.source = source_from_name(j.at("source").get<std::string>());
  c.duration = j.at("duration").get<double>();
  for (const auto& s : j.at("segments")) {
    SpeechSegment seg;
    seg.start = s.at("start").get<double>();
    seg.end = s.at("end").get<double>();
    seg.speaker_id = s.at("speaker_id").get<std::string>();
    seg.text = s.at("text").get<std::vector<std::string>>();
    c.segments.push_back(seg);
  }
  for (const auto& t : j.at("face_tracks")) {
    FaceTrack ft;
    ft.track_id = t.at("track_id").get<std::string>();
    ft.identity = t.at("identity").get<std::string>();
    ft.span = interval_from_json(t.at("span"));
    for (const auto& b : t.at("boxes")) {
      ft.boxes.push_back({b.at("t").get<double>(), b.at("x").get<double>(),
                          b.at("y").get<double>(), b.at("w").get<double>(),
                          b.at("h").get<double>()});
    }
    c.face_tracks.push_back(ft);
  }
  c.scene_breaks = j.at("scene_breaks").get<std::vector<double>>();
  std::string why;
  if (!c.check_invariants(&why)) {
    throw Error(ErrorCode::SchemaError, c.clip_id + ": " + why);
  }
  return c;
}

json to_json(const QaItem& item) {
  json gold;
  if (item.gold.is_interval()) {
    gold = {{"kind", "interval"},
            {"value", interval_to_json(std::get<Interval>(item.gold.value))}};
  } else if (item.gold.is_choice()) {
    gold = {{"kind", "choice"},
            {"value", std::string(1, std::get<char>(item.gold.value))}};
  } else if (item.gold.is_text()) {
    gold = {{"kind", "text"}, {"value", std::get<std::string>(item.gold.value)}};
  } else {
    gold = {{"kind", "boolean"}, {"value", std::get<bool>(item.gold.value)}};
  }
  json turns = json::array();
  for (const auto& s : item.turns) {
    turns.push_back({{"start", s.start},
                     {"end", s.end},
                     {"speaker_id", s.speaker_id},
                     {"text", s.text}});
  }
  json j{{"sample_id", item.sample_id},
         {"task", task_name(item.task)},
         {"clip_refs", item.clip_refs},
         {"question", item.question},
         {"options", options_to_json(item.options)},
         {"gold", gold},
         {"mentions", item.mentions},
         {"turns", turns}};
  if (item.window) j["window"] = interval_to_json(*item.window);
  return j;
}

QaItem item_from_json(const json& j) {
  QaItem item;
  item.sample_id = j.at("sample_id").get<std::string>();
  item.task = task_from_name(j.at("task").get<std::string>());
  item.clip_refs = j.at("clip_refs").get<std::vector<std::string>>();
  item.question = j.at("question").get<std::string>();
  item.options = options_from_json(j.at("options"));
  const json& gold = j.at("gold");
  std::string kind = gold.at("kind").get<std::string>();
  if (kind == "interval") {
    item.gold.value = interval_from_json(gold.at("value"));
  } else if (kind == "choice") {
    std::string v = gold.at("value").get<std::string>();
    if (v.size() != 1) throw Error(ErrorCode::SchemaError, "bad gold label");
    item.gold.value = v[0];
  } else if (kind == "text") {
    item.gold.value = gold.at("value").get<std::string>();
  } else if (kind == "boolean") {
    item.gold.value = gold.at("value").get<bool>();
  } else {
    throw Error(ErrorCode::SchemaError, "unknown gold kind " + kind);
  }
  item.mentions = j.at("mentions").get<std::vector<std::string>>();
  for (const auto& s : j.at("turns")) {
    SpeechSegment seg;
    seg.start = s.at("start").get<double>();
    seg.end = s.at("end").get<double>();
    seg.speaker_id = s.at("speaker_id").get<std::string>();
    seg.text = s.at("text").get<std::vector<std::string>>();
    item.turns.push_back(seg);
  }
  if (j.contains("window")) item.window = interval_from_json(j.at("window"));
  return item;
}

json to_json(const DatasetStats& stats) {
  return json{{"per_task", stats.per_task},
              {"total", stats.total},
              {"mean_clip_duration", stats.mean_clip_duration},
              {"unique_identities", stats.unique_identities}};
}

json to_json(const CsnlRecord& rec) {
  json scenes = json::array();
  for (const auto& s : rec.scenes) scenes.push_back(interval_to_json(s));
  return json{{"record_id", rec.record_id},
              {"clip_refs", rec.clip_refs},
              {"scenes", scenes},
              {"question", rec.question},
              {"options", options_to_json(rec.options)},
              {"gold_label", std::string(1, rec.gold_label)},
              {"mentions", rec.mentions},
              {"coherence_ok", rec.coherence_ok}};
}

CsnlRecord csnl_from_json(const json& j) {
  CsnlRecord rec;
  rec.record_id = j.at("record_id").get<std::string>();
  rec.clip_refs = j.at("clip_refs").get<std::vector<std::string>>();
  for (const auto& s : j.at("scenes")) rec.scenes.push_back(interval_from_json(s));
  rec.question = j.at("question").get<std::string>();
  rec.options = options_from_json(j.at("options"));
  std::string g = j.at("gold_label").get<std::string>();
  if (g.size() != 1) throw Error(ErrorCode::SchemaError, "bad gold label");
  rec.gold_label = g[0];
  rec.mentions = j.at("mentions").get<std::vector<std::string>>();
  rec.coherence_ok = j.at("coherence_ok").get<bool>();
  return rec;
}

namespace {

template <typename T, typename FromJson>
std::vector<T> load_jsonl(const std::string& path, FromJson from) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<T> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(from(json::parse(line)));
  }
  return out;
}

template <typename T, typename ToJson>
void save_jsonl(const std::string& path, const std::vector<T>& items,
                ToJson to) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const auto& item : items) out << to(item).dump() << '\n';
}

}  // namespace

std::vector<ClipRecord> load_clips_jsonl(const std::string& path) {
  return load_jsonl<ClipRecord>(path, clip_from_json);
}

void save_clips_jsonl(const std::string& path,
                      const std::vector<ClipRecord>& clips) {
  save_jsonl(path, clips, [](const ClipRecord& c) { return to_json(c); });
}

std::vector<QaItem> load_dataset_jsonl(const std::string& path) {
  return load_jsonl<QaItem>(path, item_from_json);
}

void save_dataset_jsonl(const std::string& path,
                        const std::vector<QaItem>& items) {
  save_jsonl(path, items, [](const QaItem& i) { return to_json(i); });
}

std::vector<CsnlRecord> load_csnl_jsonl(const std::string& path) {
  return load_jsonl<CsnlRecord>(path, csnl_from_json);
}

void save_csnl_jsonl(const std::string& path,
                     const std::vector<CsnlRecord>& records) {
  save_jsonl(path, records, [](const CsnlRecord& r) { return to_json(r); });
}

}  // namespace avbench::corpus
