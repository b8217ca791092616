#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "loadvae/tensor.hpp"

namespace loadvae {

/// Shape of one generated channel. The signal is
///   base + daily_amplitude  * sin(2*pi * slot / m_slots)
///        + weekly_amplitude * sin(2*pi * (day mod 7) / 7)
///        + noise_sigma      * gaussian draw
/// Both sinusoids have zero mean over their periods, so a channel's sample
/// mean stays near `base`.
struct SyntheticChannel {
  double base = 10.0;
  double daily_amplitude = 3.0;
  double weekly_amplitude = 1.0;
  double noise_sigma = 0.4;
};

struct SyntheticSpec {
  std::size_t n_days = 0;
  std::size_t m_slots = 0;
  std::vector<SyntheticChannel> channels;
};

/// Default channel profile: base 10 + 5c, daily amplitude 3 + c, weekly
/// amplitude 1 + c/2, and noise sigma at 5% of the noiseless range
/// 2 * (daily + weekly). Bases sit far enough above the swings that values
/// stay positive.
SyntheticSpec default_synthetic_spec(std::size_t k, std::size_t n_days,
                                     std::size_t m_slots);

/// Fully observed synthetic load tensor, deterministic given the seed. One
/// Gaussian draw is consumed per cell in storage order, so the same seed
/// yields the same noiseless signal whatever the sigmas are.
HdiTensor generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Same with the default channel profile.
HdiTensor generate_synthetic(std::size_t k, std::size_t n_days,
                             std::size_t m_slots, std::uint64_t seed);

}  // namespace loadvae
