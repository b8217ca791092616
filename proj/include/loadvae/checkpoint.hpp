#pragma once

#include <cstdint>
#include <string>

#include "loadvae/adam.hpp"
#include "loadvae/baseline.hpp"
#include "loadvae/vae.hpp"

namespace loadvae {

/// Bumped whenever the on-disk layout changes; readers reject other versions.
inline constexpr int kCheckpointVersion = 1;

/// Model checkpoints are one JSON header line (dims, seed, step count,
/// clamp bounds, format version) terminated by '\n', followed by the
/// parameter arrays as raw little-endian 8-byte IEEE-754 doubles in the
/// order w1, b1, w2, b2, w3, b3, w4, b4, w5, b5, then the first and second
/// Adam moments in the same array order.
struct VaeCheckpoint {
  VaeParams params;
  AdamState adam;
  std::size_t step_count = 0;
  std::uint64_t seed = 0;
  VaeOptions options;
};

void save_vae_checkpoint(const std::string& path, const VaeCheckpoint& ckpt);

/// Rejects unknown format strings, version or dimension mismatches, and
/// truncated payloads.
VaeCheckpoint load_vae_checkpoint(const std::string& path);

/// Factor checkpoints use the same envelope: a JSON header (dims, rank,
/// seed, format version) followed by P then Q as little-endian doubles.
struct LfaCheckpoint {
  FactorMatrices factors;
  std::uint64_t seed = 0;
};

void save_lfa_checkpoint(const std::string& path, const LfaCheckpoint& ckpt);
LfaCheckpoint load_lfa_checkpoint(const std::string& path);

}  // namespace loadvae
