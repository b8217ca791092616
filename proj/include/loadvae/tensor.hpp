#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace loadvae {

/// Position of one entry in a k x N x M load tensor (channel, day, slot).
struct EntryIndex {
  std::size_t channel = 0;
  std::size_t day = 0;
  std::size_t slot = 0;

  friend auto operator<=>(const EntryIndex&, const EntryIndex&) = default;
};

/// Per-channel min/max over the observed entries, recorded by normalize so
/// predictions can be mapped back to raw units.
struct ChannelStats {
  double min = 0.0;
  double max = 0.0;
};

/// One monitored channel as ingested from disk: n_days x m_slots values
/// (row-major) plus observed flags. Values at unobserved cells are ignored.
struct ChannelMatrix {
  std::size_t n_days = 0;
  std::size_t m_slots = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> observed;
};

/// Dense k x N x M observation tensor. Storage is channel-major, then day,
/// then slot. `observed` marks the known set; every unobserved cell stores
/// exactly 0.0. `channel_stats` is present if and only if the tensor holds
/// normalized values.
struct HdiTensor {
  std::size_t k = 0;
  std::size_t n_days = 0;
  std::size_t m_slots = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> observed;
  std::optional<std::vector<ChannelStats>> channel_stats;

  std::size_t size() const { return k * n_days * m_slots; }

  std::size_t flat(const EntryIndex& e) const {
    return (e.channel * n_days + e.day) * m_slots + e.slot;
  }

  EntryIndex unflat(std::size_t i) const {
    return EntryIndex{i / (n_days * m_slots), (i / m_slots) % n_days,
                      i % m_slots};
  }

  bool is_observed(const EntryIndex& e) const { return observed[flat(e)] != 0; }
  double at(const EntryIndex& e) const { return values[flat(e)]; }
  bool normalized() const { return channel_stats.has_value(); }
  std::size_t observed_count() const;
};

/// Disjoint partition of the observed set into train/valid/test entries.
struct EntrySplit {
  std::vector<EntryIndex> train;
  std::vector<EntryIndex> valid;
  std::vector<EntryIndex> test;
};

enum class SplitRole { kTrain, kValid, kTest };

/// One time slot viewed as a length-(k*N) vector: position c*N + n carries
/// the entry for channel c on day n. `mask` marks entries visible under the
/// requested role; `x` is exactly 0.0 wherever `mask` is false.
struct SlotVector {
  std::size_t slot_index = 0;
  std::vector<double> x;
  std::vector<std::uint8_t> mask;
};

/// Assembles per-channel matrices into one tensor. All channels must share
/// the same nonzero day/slot dimensions, and every observed value must be
/// finite.
HdiTensor build_tensor(const std::vector<ChannelMatrix>& channels);

/// Min-max normalizes each channel over its observed entries into [0, 1],
/// recording the per-channel stats. Requires a not-yet-normalized tensor and
/// at least two distinct observed values per channel.
HdiTensor normalize(const HdiTensor& t);

/// Maps normalized predictions back to raw units using the stats recorded by
/// normalize. Requires a normalized tensor.
std::vector<std::pair<EntryIndex, double>> denormalize(
    const HdiTensor& t,
    const std::vector<std::pair<EntryIndex, double>>& predictions);

/// Keeps a uniform random subset of floor(density * k*N*M) observed entries
/// and hides the rest. density must lie in (0, 1] and the requested count
/// must not exceed the current observed count.
HdiTensor apply_sparsity(const HdiTensor& t, double density,
                         std::uint64_t seed);

/// Uniform random 60/20/20 partition of the observed entries: floor(0.6*n)
/// train, floor(0.2*n) validation, remainder test. Requires at least five
/// observed entries so every part is nonempty.
EntrySplit split_entries(const HdiTensor& t, std::uint64_t seed);

/// Slices a normalized tensor into M slot vectors for one split role. The
/// mask is true exactly where an entry is observed and belongs to the role.
std::vector<SlotVector> vectorize(const HdiTensor& t, const EntrySplit& split,
                                  SplitRole role);

/// Deployment view: like vectorize, but every observed entry is visible
/// regardless of split membership.
std::vector<SlotVector> vectorize_observed(const HdiTensor& t);

}  // namespace loadvae
