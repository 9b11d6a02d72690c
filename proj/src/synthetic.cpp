// SPDX-License-Identifier: Apache-2.0
#include "avbench/synthetic.hpp"

#include <array>
#include <string>

namespace avbench::synthetic {

using corpus::ClipRecord;
using corpus::CsnlRecord;
using corpus::FaceTrack;
using corpus::Manifest;
using corpus::SpeechSegment;

namespace {

const std::array<const char*, 24> kLexicon = {
    "meeting",  "budget",   "schedule", "camera",   "kitchen",  "project",
    "weekend",  "question", "answer",   "coffee",   "report",   "travel",
    "garden",   "music",    "problem",  "detail",   "minute",   "window",
    "table",    "story",    "plan",     "update",   "decision", "summary"};

std::vector<std::string> make_utterance(SeededRng& rng) {
  size_t len = 6 + rng.uniform_int(5);
  std::vector<std::string> words;
  words.reserve(len);
  for (size_t i = 0; i < len; ++i)
    words.push_back(kLexicon[rng.uniform_int(kLexicon.size())]);
  return words;
}

std::string two_digit(int n) {
  std::string s = std::to_string(n);
  return s.size() < 2 ? "0" + s : s;
}

ClipRecord make_clip(int index, const ManifestSpec& spec, SeededRng& rng) {
  ClipRecord clip;
  clip.clip_id = "clip" + two_digit(index);
  clip.source = corpus::Source::Synthetic;
  clip.duration = spec.clip_duration;
  clip.scene_breaks = {spec.clip_duration / 3.0, 2.0 * spec.clip_duration / 3.0};

  std::vector<std::string> speakers;
  for (int s = 0; s < spec.speakers_per_clip; ++s)
    speakers.push_back(clip.clip_id + "_p" + std::to_string(s));
  // vary which speaker opens each clip
  std::vector<std::string> order = speakers;
  rng.shuffle(order);

  double slot = spec.clip_duration / spec.segments_per_clip;
  for (int k = 0; k < spec.segments_per_clip; ++k) {
    SpeechSegment seg;
    seg.start = k * slot + 1.0;
    seg.end = seg.start + slot - 2.0;
    seg.speaker_id = order[k % order.size()];
    seg.text = make_utterance(rng);
    clip.segments.push_back(std::move(seg));
  }

  for (const auto& spk : speakers) {
    FaceTrack track;
    track.track_id = spk + "_t0";
    track.identity = spk;
    track.span = {0.0, clip.duration};
    for (double t = 0.0; t <= clip.duration; t += clip.duration / 4.0)
      track.boxes.push_back({t, 0.1 + 0.1 * (&spk - &speakers[0]), 0.2,
                             0.15, 0.2});
    clip.face_tracks.push_back(std::move(track));
  }
  return clip;
}

CsnlRecord make_csnl(int index, const Manifest& manifest, SeededRng& rng) {
  const auto& clips = manifest.clips;
  const ClipRecord& first = clips[index % clips.size()];
  const ClipRecord& second = clips[(index + 1) % clips.size()];

  CsnlRecord rec;
  rec.record_id = "csnl" + std::to_string(index);
  rec.clip_refs = {first.clip_id, second.clip_id};
  rec.scenes = {{0.0, first.duration / 3.0},
                {first.duration / 2.0, first.duration}};
  rec.question =
      "Across the two scenes, which statement best describes how the "
      "conversation started by " +
      first.segments.front().speaker_id + " develops later on?";
  rec.options = {
      {'A', "The same participants continue the earlier discussion"},
      {'B', "A different group starts an unrelated conversation"},
      {'C', "The discussion is abandoned without a follow-up"},
      {'D', "Only background noise is heard in the later scene"}};
  rec.gold_label = "ABCD"[rng.uniform_int(4)];
  rec.mentions = {first.segments.front().speaker_id};
  rec.coherence_ok = true;
  return rec;
}

}  // namespace

Manifest make_manifest(const ManifestSpec& spec) {
  SeededRng rng(mix_seed(spec.seed, 0x73796e7468ULL));
  Manifest manifest;
  manifest.clips.reserve(spec.n_clips);
  for (int i = 0; i < spec.n_clips; ++i)
    manifest.clips.push_back(make_clip(i, spec, rng));
  for (int i = 0; i < spec.n_csnl; ++i)
    manifest.csnl.push_back(make_csnl(i, manifest, rng));
  return manifest;
}

}  // namespace avbench::synthetic
