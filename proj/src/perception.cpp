// SPDX-License-Identifier: Apache-2.0
#include "avbench/perception.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#ifndef _WIN32
#define CPPHTTPLIB_NO_EXCEPTIONS_SUPPRESSION 1
#endif
#include <httplib.h>

namespace avbench::perception {

std::string cue_name(CueKind c) {
  switch (c) {
    case CueKind::FaceCrops: return "FaceCrops";
    case CueKind::VoiceSegments: return "VoiceSegments";
    case CueKind::Transcript: return "Transcript";
    case CueKind::LipSync: return "LipSync";
  }
  return "FaceCrops";
}

CueKind cue_from_name(const std::string& name) {
  for (CueKind c : kAllCues) {
    if (cue_name(c) == name) return c;
  }
  throw Error(ErrorCode::SchemaError, "unknown cue: " + name);
}

std::set<CueKind> required_cues(Task task) {
  using C = CueKind;
  switch (task) {
    case Task::STG: return {C::FaceCrops, C::LipSync};
    case Task::AVDS:
      return {C::FaceCrops, C::VoiceSegments, C::Transcript, C::LipSync};
    case Task::AVSA: return {C::FaceCrops, C::VoiceSegments};
    case Task::NSP: return {C::Transcript, C::LipSync};
    case Task::SRID: return {C::FaceCrops, C::LipSync};
    case Task::CSNL:
      return {C::FaceCrops, C::VoiceSegments, C::Transcript, C::LipSync};
  }
  return {};
}

std::string segment_id(size_t index) { return "seg_" + std::to_string(index); }

namespace {

uint64_t clip_seed(const ClipRecord& clip, const NoiseProfile& profile,
                   const char* tool_tag) {
  return mix_seed(profile.seed, fnv1a(clip.clip_id + ":" + tool_tag));
}

/// Gaussian jitter clipped so that a perturbed interval never inverts.
double clipped_jitter(SeededRng& rng, double sigma, double max_abs) {
  if (sigma <= 0.0) return 0.0;
  double j = rng.normal() * sigma;
  return std::clamp(j, -max_abs, max_abs);
}

}  // namespace

Transcript mock_asr(const ClipRecord& clip, const NoiseProfile& profile) {
  SeededRng rng(clip_seed(clip, profile, "asr"));
  Transcript out;
  out.language = "en";
  for (const auto& seg : clip.segments) {
    size_t n = seg.text.size();
    if (n == 0) continue;
    double step = (seg.end - seg.start) / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      WordObs w;
      w.token = seg.text[i];
      w.start = seg.start + step * static_cast<double>(i);
      w.end = w.start + step;
      w.confidence = 1.0;
      if (!profile.is_zero()) {
        double max_abs = 0.45 * step;
        w.start += clipped_jitter(rng, profile.timestamp_jitter_sigma, max_abs);
        w.end += clipped_jitter(rng, profile.timestamp_jitter_sigma, max_abs);
        if (w.end <= w.start) w.end = w.start + 1e-3;
        if (rng.uniform() < profile.word_error_rate) {
          w.token = "[sub]" + w.token;
          w.confidence = 0.5;
        }
      }
      out.words.push_back(std::move(w));
    }
  }
  std::stable_sort(out.words.begin(), out.words.end(),
                   [](const WordObs& a, const WordObs& b) {
                     return a.start < b.start;
                   });
  return out;
}

std::vector<DiarizationSegment> mock_diarization(const ClipRecord& clip,
                                                 const NoiseProfile& profile) {
  SeededRng rng(clip_seed(clip, profile, "diar"));
  std::vector<DiarizationSegment> out;
  for (size_t i = 0; i < clip.segments.size(); ++i) {
    const auto& s = clip.segments[i];
    DiarizationSegment d;
    d.start = s.start;
    d.end = s.end;
    d.speaker_id = s.speaker_id;
    for (size_t j = 0; j < clip.segments.size(); ++j) {
      if (j == i) continue;
      if (s.interval().overlaps(clip.segments[j].interval())) {
        d.overlap = true;
        break;
      }
    }
    if (profile.boundary_jitter_sigma > 0.0) {
      double max_abs = 0.45 * (d.end - d.start);
      d.start += clipped_jitter(rng, profile.boundary_jitter_sigma, max_abs);
      d.end += clipped_jitter(rng, profile.boundary_jitter_sigma, max_abs);
      d.start = std::max(0.0, d.start);
      d.end = std::min(clip.duration, std::max(d.end, d.start + 1e-3));
    }
    out.push_back(d);
  }
  return out;
}

namespace {

std::vector<double> random_unit_vector(SeededRng& rng) {
  std::vector<double> v(kEmbeddingDim);
  double norm = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot;
}

}  // namespace

std::vector<FaceTrackObs> mock_face_tracks(const ClipRecord& clip,
                                           const NoiseProfile& profile) {
  SeededRng rng(clip_seed(clip, profile, "face"));

  // identity embeddings: rejection-sampled so distinct identities stay
  // nearly orthogonal (|cos| < 0.25) within the clip
  std::vector<std::string> identities;
  for (const auto& t : clip.face_tracks) {
    if (std::find(identities.begin(), identities.end(), t.identity) ==
        identities.end()) {
      identities.push_back(t.identity);
    }
  }
  std::sort(identities.begin(), identities.end());
  std::map<std::string, std::vector<double>> id_emb;
  std::vector<std::vector<double>> accepted;
  for (const auto& id : identities) {
    std::vector<double> cand;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      cand = random_unit_vector(rng);
      bool ok = true;
      for (const auto& prev : accepted) {
        if (std::abs(cosine(cand, prev)) >= 0.25) {
          ok = false;
          break;
        }
      }
      if (ok) break;
    }
    accepted.push_back(cand);
    id_emb[id] = cand;
  }

  std::vector<FaceTrackObs> out;
  for (const auto& t : clip.face_tracks) {
    FaceTrackObs obs;
    obs.track_id = t.track_id;
    obs.identity = t.identity;
    obs.span = t.span;
    obs.boxes = t.boxes;
    obs.embedding = id_emb[t.identity];
    if (profile.timestamp_jitter_sigma > 0.0) {
      // per-observation embedding noise reuses the jitter knob, renormalized
      double norm = 0.0;
      for (double& x : obs.embedding) {
        x += rng.normal() * profile.timestamp_jitter_sigma * 0.1;
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (double& x : obs.embedding) x /= norm;
    }
    out.push_back(std::move(obs));
  }

  if (out.size() >= 2 && rng.uniform() < profile.track_swap_prob) {
    size_t i = rng.uniform_int(out.size());
    size_t j = rng.uniform_int(out.size() - 1);
    if (j >= i) ++j;
    std::swap(out[i].track_id, out[j].track_id);
  }
  return out;
}

SyncEstimate mock_av_sync(const ClipRecord& clip, const NoiseProfile& profile) {
  SeededRng rng(clip_seed(clip, profile, "sync"));
  SyncEstimate est;
  est.offset = profile.timestamp_jitter_sigma > 0.0
                   ? rng.normal() * profile.timestamp_jitter_sigma
                   : 0.0;
  est.confidence = std::clamp(1.0 - std::abs(est.offset), 0.0, 1.0);
  for (size_t i = 0; i < clip.segments.size(); ++i) {
    const auto& seg = clip.segments[i];
    const corpus::FaceTrack* match = nullptr;
    for (const auto& t : clip.face_tracks) {
      if (t.identity == seg.speaker_id && t.span.overlaps(seg.interval())) {
        match = &t;
        break;
      }
    }
    if (!match) {
      throw Error(ErrorCode::UnmappableSegment,
                  clip.clip_id + " " + segment_id(i) + " speaker " +
                      seg.speaker_id);
    }
    est.mapping[segment_id(i)] = match->track_id;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Serialization + schema validation
// ---------------------------------------------------------------------------

std::string tool_name(ToolKind t) {
  switch (t) {
    case ToolKind::Asr: return "asr";
    case ToolKind::Diarization: return "diarization";
    case ToolKind::FaceTracks: return "face_tracks";
    case ToolKind::AvSync: return "av_sync";
  }
  return "asr";
}

ToolKind tool_from_name(const std::string& name) {
  for (ToolKind t : kAllTools) {
    if (tool_name(t) == name) return t;
  }
  throw Error(ErrorCode::SchemaError, "unknown tool: " + name);
}

CueKind cue_for_tool(ToolKind t) {
  switch (t) {
    case ToolKind::Asr: return CueKind::Transcript;
    case ToolKind::Diarization: return CueKind::VoiceSegments;
    case ToolKind::FaceTracks: return CueKind::FaceCrops;
    case ToolKind::AvSync: return CueKind::LipSync;
  }
  return CueKind::Transcript;
}

ToolKind tool_for_cue(CueKind c) {
  switch (c) {
    case CueKind::Transcript: return ToolKind::Asr;
    case CueKind::VoiceSegments: return ToolKind::Diarization;
    case CueKind::FaceCrops: return ToolKind::FaceTracks;
    case CueKind::LipSync: return ToolKind::AvSync;
  }
  return ToolKind::Asr;
}

json to_json(const Transcript& t) {
  json words = json::array();
  for (const auto& w : t.words) {
    words.push_back({{"token", w.token},
                     {"start", w.start},
                     {"end", w.end},
                     {"confidence", w.confidence}});
  }
  json j{{"words", words}};
  if (t.language) j["language"] = *t.language;
  return j;
}

json to_json(const std::vector<DiarizationSegment>& segs) {
  json arr = json::array();
  for (const auto& s : segs) {
    arr.push_back({{"start", s.start},
                   {"end", s.end},
                   {"speaker_id", s.speaker_id},
                   {"overlap", s.overlap}});
  }
  return json{{"segments", arr}};
}

json to_json(const std::vector<FaceTrackObs>& tracks) {
  json arr = json::array();
  for (const auto& t : tracks) {
    json boxes = json::array();
    for (const auto& b : t.boxes) {
      boxes.push_back({{"t", b.t}, {"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
    }
    arr.push_back({{"track_id", t.track_id},
                   {"identity", t.identity},
                   {"span", {{"start", t.span.start}, {"end", t.span.end}}},
                   {"boxes", boxes},
                   {"embedding", t.embedding}});
  }
  return json{{"tracks", arr}};
}

json to_json(const SyncEstimate& s) {
  return json{{"offset", s.offset},
              {"confidence", s.confidence},
              {"mapping", s.mapping}};
}

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::SchemaError, what);
}

Transcript transcript_from_json(const json& j) {
  Transcript t;
  double prev = -1e300;
  for (const auto& w : j.at("words")) {
    WordObs o;
    o.token = w.at("token").get<std::string>();
    o.start = w.at("start").get<double>();
    o.end = w.at("end").get<double>();
    o.confidence = w.at("confidence").get<double>();
    require(o.start < o.end, "word start >= end");
    require(o.confidence >= 0.0 && o.confidence <= 1.0,
            "word confidence outside [0,1]");
    require(o.start >= prev, "words not sorted by start");
    prev = o.start;
    t.words.push_back(std::move(o));
  }
  if (j.contains("language")) t.language = j.at("language").get<std::string>();
  return t;
}

std::vector<DiarizationSegment> diarization_from_json(const json& j) {
  std::vector<DiarizationSegment> out;
  for (const auto& s : j.at("segments")) {
    DiarizationSegment d;
    d.start = s.at("start").get<double>();
    d.end = s.at("end").get<double>();
    d.speaker_id = s.at("speaker_id").get<std::string>();
    d.overlap = s.at("overlap").get<bool>();
    require(d.start < d.end, "diarization start >= end");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<FaceTrackObs> face_tracks_from_json(const json& j) {
  std::vector<FaceTrackObs> out;
  for (const auto& t : j.at("tracks")) {
    FaceTrackObs obs;
    obs.track_id = t.at("track_id").get<std::string>();
    obs.identity = t.at("identity").get<std::string>();
    obs.span = {t.at("span").at("start").get<double>(),
                t.at("span").at("end").get<double>()};
    require(obs.span.start < obs.span.end, "track span start >= end");
    for (const auto& b : t.at("boxes")) {
      obs.boxes.push_back({b.at("t").get<double>(), b.at("x").get<double>(),
                           b.at("y").get<double>(), b.at("w").get<double>(),
                           b.at("h").get<double>()});
    }
    obs.embedding = t.at("embedding").get<std::vector<double>>();
    double norm = 0.0;
    for (double x : obs.embedding) norm += x * x;
    require(std::abs(std::sqrt(norm) - 1.0) <= 1e-6,
            "embedding not unit-normalized");
    out.push_back(std::move(obs));
  }
  return out;
}

SyncEstimate sync_from_json(const json& j) {
  SyncEstimate s;
  s.offset = j.at("offset").get<double>();
  s.confidence = j.at("confidence").get<double>();
  require(s.confidence >= 0.0 && s.confidence <= 1.0,
          "sync confidence outside [0,1]");
  for (const auto& [k, v] : j.at("mapping").items()) {
    s.mapping[k] = v.get<std::string>();
  }
  return s;
}

}  // namespace

ToolOutput parse_tool_output(ToolKind tool, const json& payload) {
  try {
    switch (tool) {
      case ToolKind::Asr: return transcript_from_json(payload);
      case ToolKind::Diarization: return diarization_from_json(payload);
      case ToolKind::FaceTracks: return face_tracks_from_json(payload);
      case ToolKind::AvSync: return sync_from_json(payload);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
  throw Error(ErrorCode::SchemaError, "unknown tool kind");
}

json MockTransport::fetch(const ToolRequest& request) {
  ++calls_;
  auto it = clips_->find(request.clip_id);
  if (it == clips_->end()) {
    throw Error(ErrorCode::TransportError, "unknown clip " + request.clip_id);
  }
  const ClipRecord& clip = it->second;
  switch (request.tool) {
    case ToolKind::Asr: return to_json(mock_asr(clip, profile_));
    case ToolKind::Diarization:
      return to_json(mock_diarization(clip, profile_));
    case ToolKind::FaceTracks:
      return to_json(mock_face_tracks(clip, profile_));
    case ToolKind::AvSync: return to_json(mock_av_sync(clip, profile_));
  }
  throw Error(ErrorCode::TransportError, "unknown tool kind");
}

RemoteTransport RemoteTransport::from_env() {
  std::map<ToolKind, std::string> endpoints;
  auto grab = [&](ToolKind t, const char* var) {
    const char* v = std::getenv(var);
    if (v && *v) endpoints[t] = v;
  };
  grab(ToolKind::Asr, "TOOL_ASR_URL");
  grab(ToolKind::Diarization, "TOOL_DIAR_URL");
  grab(ToolKind::FaceTracks, "TOOL_FACE_URL");
  grab(ToolKind::AvSync, "TOOL_SYNC_URL");
  return RemoteTransport(std::move(endpoints));
}

json RemoteTransport::fetch(const ToolRequest& request) {
  auto it = endpoints_.find(request.tool);
  if (it == endpoints_.end()) {
    throw Error(ErrorCode::TransportError,
                "no endpoint for " + tool_name(request.tool));
  }
  // split scheme://host:port from path
  std::string url = it->second;
  std::string path = "/";
  size_t scheme = url.find("://");
  size_t slash = scheme == std::string::npos ? url.find('/')
                                             : url.find('/', scheme + 3);
  if (slash != std::string::npos) {
    path = url.substr(slash);
    url = url.substr(0, slash);
  }
  httplib::Client client(url);
  client.set_read_timeout(30, 0);
  json body{{"clip_id", request.clip_id}, {"params", request.params}};
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res || res->status != 200) {
    throw Error(ErrorCode::TransportError,
                tool_name(request.tool) + " endpoint failed");
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, e.what());
  }
}

json ToolClient::call_raw(const ToolRequest& request) {
  namespace fs = std::filesystem;
  fs::path cache_file;
  if (!cache_root_.empty()) {
    uint64_t params_hash = fnv1a(request.params.dump());
    cache_file = cache_root_ / (tool_name(request.tool) + "_" +
                                request.clip_id + "_" +
                                std::to_string(params_hash) + ".json");
    if (fs::exists(cache_file)) {
      std::ifstream in(cache_file);
      try {
        return json::parse(in);
      } catch (const json::exception&) {
        // corrupt cache entry: fall through and refetch
      }
    }
  }
  json payload = transport_->fetch(request);
  if (!cache_file.empty()) {
    fs::create_directories(cache_root_);
    // unique temp name so concurrent writers never collide pre-rename
    fs::path tmp = cache_file;
    tmp += ".tmp" + std::to_string(
                        std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
      std::ofstream out(tmp);
      out << payload.dump();
    }
    fs::rename(tmp, cache_file);  // atomic on POSIX
  }
  return payload;
}

ToolOutput ToolClient::call(const ToolRequest& request) {
  return parse_tool_output(request.tool, call_raw(request));
}

}  // namespace avbench::perception
