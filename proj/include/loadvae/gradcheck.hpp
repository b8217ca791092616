#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "loadvae/vae.hpp"

namespace loadvae {

struct GradCheckSettings {
  int trials = 100;
  std::size_t input_dim = 9;
  std::size_t hidden_dim = 7;
  std::size_t latent_dim = 3;
  double fd_step = 1e-5;   ///< central-difference half-width
  double rel_tol = 1e-4;   ///< relative tolerance per coordinate
  double abs_floor = 1e-7; ///< below this absolute gap a coordinate passes
  /// A trial is redrawn when any ReLU pre-activation or log-variance
  /// pre-activation sits closer than this to its kink, so the central
  /// difference never straddles a nondifferentiable point. Wider than the
  /// perturbations a 1e-5 step can cause through two layers.
  double kink_guard = 1e-3;
  bool mu_relu = false;
  /// Negative control: adds a visible error to one analytic gradient entry,
  /// which must make the check fail.
  bool corrupt = false;
};

struct GradCheckBlock {
  std::string name;        ///< parameter array (w1, b1, ..., b5)
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  int trials = 0;
  double rel_tol = 0.0;
  bool passed = false;
};

/// Compares the hand-derived gradients against central finite differences of
/// the forward loss over seeded random (params, input, noise) triples, with
/// the noise draw held fixed. The forward loss is the only piece shared with
/// the implementation under test.
GradCheckReport run_gradient_check(std::uint64_t seed,
                                   const GradCheckSettings& settings = {});

/// One pass/fail table as text, one line per parameter array.
std::string format_report(const GradCheckReport& report);

}  // namespace loadvae
