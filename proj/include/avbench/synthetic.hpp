// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "avbench/corpus.hpp"

namespace avbench::synthetic {

struct ManifestSpec {
  int n_clips = 70;
  int n_csnl = 100;
  int speakers_per_clip = 6;
  int segments_per_clip = 12;
  double clip_duration = 120.0;
  uint64_t seed = 0;
};

/// Deterministic synthetic annotation manifest sized so the default quotas
/// (400 per automated task, 100 CSNL) are reachable.
corpus::Manifest make_manifest(const ManifestSpec& spec);

}  // namespace avbench::synthetic
