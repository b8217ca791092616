#pragma once

#include <cstddef>

#include "loadvae/vae.hpp"

namespace loadvae {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second raw moments, one slot per parameter array.
struct AdamState {
  VaeGradients m;
  VaeGradients v;
};

/// Zeroed moments matching p's shapes.
AdamState init_adam_state(const VaeParams& p);

/// One bias-corrected Adam update, in place:
///   m <- beta1 m + (1-beta1) g        mhat = m / (1 - beta1^t)
///   v <- beta2 v + (1-beta2) g^2      vhat = v / (1 - beta2^t)
///   p <- p - lr * mhat / (sqrt(vhat) + epsilon)
/// step_index t is 1-based. A zero gradient with zero moments leaves both
/// parameters and moments exactly unchanged.
void adam_step(VaeParams& p, const VaeGradients& g, AdamState& s,
               std::size_t step_index, const AdamConfig& cfg);

}  // namespace loadvae
