#include "loadvae/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "loadvae/rng.hpp"

namespace loadvae {
namespace {

std::string pos_str(const EntryIndex& e) {
  return "(" + std::to_string(e.channel) + ", " + std::to_string(e.day) +
         ", " + std::to_string(e.slot) + ")";
}

// Collects the flat indices of all observed entries in storage order.
std::vector<std::size_t> observed_indices(const HdiTensor& t) {
  std::vector<std::size_t> out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.observed[i] != 0) out.push_back(i);
  }
  return out;
}

}  // namespace

std::size_t HdiTensor::observed_count() const {
  return static_cast<std::size_t>(
      std::count(observed.begin(), observed.end(), std::uint8_t{1}));
}

HdiTensor build_tensor(const std::vector<ChannelMatrix>& channels) {
  if (channels.empty()) {
    throw std::invalid_argument("build_tensor: no channels given");
  }
  const std::size_t n_days = channels.front().n_days;
  const std::size_t m_slots = channels.front().m_slots;
  if (n_days == 0 || m_slots == 0) {
    throw std::invalid_argument("build_tensor: zero-sized day/slot dimension");
  }
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const ChannelMatrix& ch = channels[c];
    if (ch.n_days != n_days || ch.m_slots != m_slots) {
      throw std::invalid_argument(
          "build_tensor: channel " + std::to_string(c) +
          " has shape " + std::to_string(ch.n_days) + "x" +
          std::to_string(ch.m_slots) + ", expected " + std::to_string(n_days) +
          "x" + std::to_string(m_slots));
    }
    const std::size_t cells = n_days * m_slots;
    if (ch.values.size() != cells || ch.observed.size() != cells) {
      throw std::invalid_argument("build_tensor: channel " + std::to_string(c) +
                                  " buffer sizes do not match its shape");
    }
  }

  HdiTensor t;
  t.k = channels.size();
  t.n_days = n_days;
  t.m_slots = m_slots;
  t.values.assign(t.size(), 0.0);
  t.observed.assign(t.size(), 0);
  for (std::size_t c = 0; c < t.k; ++c) {
    const ChannelMatrix& ch = channels[c];
    for (std::size_t i = 0; i < n_days * m_slots; ++i) {
      if (ch.observed[i] == 0) continue;
      if (!std::isfinite(ch.values[i])) {
        throw std::invalid_argument(
            "build_tensor: non-finite observed value in channel " +
            std::to_string(c) + " at cell " + std::to_string(i));
      }
      const std::size_t flat = c * n_days * m_slots + i;
      t.values[flat] = ch.values[i];
      t.observed[flat] = 1;
    }
  }
  return t;
}

HdiTensor normalize(const HdiTensor& t) {
  if (t.normalized()) {
    throw std::invalid_argument("normalize: tensor is already normalized");
  }
  std::vector<ChannelStats> stats(t.k);
  const std::size_t per_channel = t.n_days * t.m_slots;
  for (std::size_t c = 0; c < t.k; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = c * per_channel; i < (c + 1) * per_channel; ++i) {
      if (t.observed[i] == 0) continue;
      lo = std::min(lo, t.values[i]);
      hi = std::max(hi, t.values[i]);
    }
    if (!(lo < hi)) {
      throw std::invalid_argument(
          "normalize: channel " + std::to_string(c) +
          " needs at least two distinct observed values");
    }
    stats[c] = ChannelStats{lo, hi};
  }

  HdiTensor out = t;
  for (std::size_t c = 0; c < t.k; ++c) {
    const double span = stats[c].max - stats[c].min;
    for (std::size_t i = c * per_channel; i < (c + 1) * per_channel; ++i) {
      if (t.observed[i] == 0) continue;
      out.values[i] = (t.values[i] - stats[c].min) / span;
    }
  }
  out.channel_stats = std::move(stats);
  return out;
}

std::vector<std::pair<EntryIndex, double>> denormalize(
    const HdiTensor& t,
    const std::vector<std::pair<EntryIndex, double>>& predictions) {
  if (!t.normalized()) {
    throw std::invalid_argument(
        "denormalize: tensor carries no channel stats (not normalized)");
  }
  const std::vector<ChannelStats>& stats = *t.channel_stats;
  std::vector<std::pair<EntryIndex, double>> out;
  out.reserve(predictions.size());
  for (const auto& [pos, value] : predictions) {
    if (pos.channel >= t.k || pos.day >= t.n_days || pos.slot >= t.m_slots) {
      throw std::invalid_argument("denormalize: position " + pos_str(pos) +
                                  " is out of range");
    }
    const ChannelStats& s = stats[pos.channel];
    out.emplace_back(pos, value * (s.max - s.min) + s.min);
  }
  return out;
}

HdiTensor apply_sparsity(const HdiTensor& t, double density,
                         std::uint64_t seed) {
  if (!(density > 0.0) || density > 1.0) {
    throw std::invalid_argument("apply_sparsity: density must be in (0, 1]");
  }
  // The epsilon absorbs the parse error of decimal densities (0.05 etc.) so
  // the kept count matches the exact-arithmetic floor.
  const std::size_t target = static_cast<std::size_t>(
      std::floor(density * static_cast<double>(t.size()) + 1e-9));
  std::vector<std::size_t> idx = observed_indices(t);
  if (target > idx.size()) {
    throw std::invalid_argument(
        "apply_sparsity: requested " + std::to_string(target) +
        " observed entries but only " + std::to_string(idx.size()) +
        " are observed");
  }

  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(target);

  HdiTensor out = t;
  std::fill(out.observed.begin(), out.observed.end(), std::uint8_t{0});
  std::fill(out.values.begin(), out.values.end(), 0.0);
  for (std::size_t i : idx) {
    out.observed[i] = 1;
    out.values[i] = t.values[i];
  }
  return out;
}

EntrySplit split_entries(const HdiTensor& t, std::uint64_t seed) {
  std::vector<std::size_t> idx = observed_indices(t);
  const std::size_t n = idx.size();
  if (n < 5) {
    throw std::invalid_argument(
        "split_entries: need at least 5 observed entries, have " +
        std::to_string(n));
  }
  Rng rng(seed);
  rng.shuffle(idx);

  // Integer arithmetic keeps the 60/20/20 cut exact; the test part absorbs
  // the rounding remainder.
  const std::size_t n_train = 6 * n / 10;
  const std::size_t n_valid = 2 * n / 10;

  EntrySplit split;
  split.train.reserve(n_train);
  split.valid.reserve(n_valid);
  split.test.reserve(n - n_train - n_valid);
  for (std::size_t i = 0; i < n; ++i) {
    EntryIndex e = t.unflat(idx[i]);
    if (i < n_train) {
      split.train.push_back(e);
    } else if (i < n_train + n_valid) {
      split.valid.push_back(e);
    } else {
      split.test.push_back(e);
    }
  }
  return split;
}

namespace {

std::vector<SlotVector> vectorize_with_flags(
    const HdiTensor& t, const std::vector<std::uint8_t>& visible) {
  const std::size_t dim = t.k * t.n_days;
  std::vector<SlotVector> out(t.m_slots);
  for (std::size_t m = 0; m < t.m_slots; ++m) {
    SlotVector& v = out[m];
    v.slot_index = m;
    v.x.assign(dim, 0.0);
    v.mask.assign(dim, 0);
  }
  for (std::size_t c = 0; c < t.k; ++c) {
    for (std::size_t n = 0; n < t.n_days; ++n) {
      const std::size_t row = c * t.n_days + n;
      const std::size_t base = (c * t.n_days + n) * t.m_slots;
      for (std::size_t m = 0; m < t.m_slots; ++m) {
        if (visible[base + m] == 0) continue;
        out[m].x[row] = t.values[base + m];
        out[m].mask[row] = 1;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<SlotVector> vectorize(const HdiTensor& t, const EntrySplit& split,
                                  SplitRole role) {
  if (!t.normalized()) {
    throw std::invalid_argument("vectorize: tensor must be normalized first");
  }
  const std::vector<EntryIndex>* members = nullptr;
  switch (role) {
    case SplitRole::kTrain: members = &split.train; break;
    case SplitRole::kValid: members = &split.valid; break;
    case SplitRole::kTest: members = &split.test; break;
  }

  std::vector<std::uint8_t> visible(t.size(), 0);
  for (const EntryIndex& e : *members) {
    if (e.channel >= t.k || e.day >= t.n_days || e.slot >= t.m_slots) {
      throw std::invalid_argument("vectorize: split position " + pos_str(e) +
                                  " is out of range");
    }
    const std::size_t flat = t.flat(e);
    if (t.observed[flat] == 0) {
      throw std::invalid_argument("vectorize: split position " + pos_str(e) +
                                  " is not observed in the tensor");
    }
    visible[flat] = 1;
  }
  return vectorize_with_flags(t, visible);
}

std::vector<SlotVector> vectorize_observed(const HdiTensor& t) {
  if (!t.normalized()) {
    throw std::invalid_argument(
        "vectorize_observed: tensor must be normalized first");
  }
  return vectorize_with_flags(t, t.observed);
}

}  // namespace loadvae
