#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "loadvae/rng.hpp"
#include "loadvae/tensor.hpp"

namespace loadvae {

/// The log-variance head is clamped to this range so exp() stays finite and
/// the loss cannot blow up through the variance path.
inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

/// Weights of the two-layer encoder / two-layer decoder. Matrices are
/// row-major with shapes
///   w1: hidden x input   (encoder hidden),        b1: hidden
///   w2: latent x hidden  (posterior mean head),   b2: latent
///   w3: latent x hidden  (log-variance head),     b3: latent
///   w4: hidden x latent  (decoder hidden),        b4: hidden
///   w5: input x hidden   (reconstruction head),   b5: input
struct VaeParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t latent_dim = 0;
  std::vector<double> w1, b1, w2, b2, w3, b3, w4, b4, w5, b5;
};

struct VaeOptions {
  /// Ablation switch: pass the posterior mean through ReLU as well. The
  /// default identity head lets the mean go negative, which the latent prior
  /// is centered on.
  bool mu_relu = false;
};

struct EncoderOutput {
  std::vector<double> h;       ///< post-ReLU hidden activations
  std::vector<double> mu;      ///< posterior mean
  std::vector<double> logvar;  ///< clamped to [kLogVarMin, kLogVarMax]
};

struct LatentSample {
  std::vector<double> eps;  ///< the standard-normal draw used
  std::vector<double> z;    ///< mu + exp(logvar/2) * eps
};

struct LossBreakdown {
  double recon = 0.0;  ///< masked squared-error term
  double kl = 0.0;     ///< divergence from the standard-normal prior
  double total = 0.0;  ///< recon + kl
  std::size_t observed_count = 0;  ///< entries the recon term summed over
};

/// Same shapes as VaeParams; also reused as the per-array slots of the
/// optimizer moments.
struct VaeGradients {
  std::vector<double> w1, b1, w2, b2, w3, b3, w4, b4, w5, b5;
};

/// Everything one forward evaluation produces, kept so the backward pass can
/// reuse the intermediates instead of recomputing them.
struct ForwardPass {
  EncoderOutput enc;
  LatentSample sample;
  std::vector<double> dec_hidden;  ///< post-ReLU decoder hidden activations
  std::vector<double> x_hat;
  LossBreakdown loss;
};

/// Xavier-uniform weights (bound sqrt(6 / (fan_in + fan_out)), drawn in
/// declaration order w1, w2, w3, w4, w5), zero biases. Deterministic given
/// the seed.
VaeParams init_params(std::size_t input_dim, std::size_t hidden_dim,
                      std::size_t latent_dim, std::uint64_t seed);

EncoderOutput encoder_forward(const VaeParams& p, const SlotVector& x,
                              const VaeOptions& opt = {});

/// Draws eps ~ N(0, I) from rng and forms z = mu + exp(logvar/2) * eps.
LatentSample reparameterize(const EncoderOutput& e, Rng& rng);

/// Decodes z through ReLU hidden and sigmoid output. Entries are strictly
/// inside (0, 1).
std::vector<double> decoder_forward(const VaeParams& p,
                                    const std::vector<double>& z);

/// Closed-form divergence of the diagonal-Gaussian posterior from N(0, I):
/// 0.5 * sum_i (mu_i^2 + sigma_i^2 - log sigma_i^2 - 1). Nonnegative; zero
/// exactly when mu = 0 and logvar = 0.
double kl_divergence(const EncoderOutput& e);

/// 0.5 * sum over mask-true entries of (x_i - x_hat_i)^2, with the count of
/// entries summed over.
std::pair<double, std::size_t> recon_loss(const std::vector<double>& x_hat,
                                          const SlotVector& x);

/// Full forward pass for one slot vector: encode, sample, decode, loss.
ForwardPass total_loss(const VaeParams& p, const SlotVector& x, Rng& rng,
                       const VaeOptions& opt = {});

/// Forward pass with a caller-fixed noise draw, for gradient checks and any
/// other use that must hold eps constant across evaluations.
ForwardPass total_loss_with_eps(const VaeParams& p, const SlotVector& x,
                                const std::vector<double>& eps,
                                const VaeOptions& opt = {});

/// Analytic gradient of the total loss for one slot vector, chained by hand
/// through decoder, reparameterization, and encoder with eps held fixed.
/// ReLU contributes zero slope at and below zero pre-activation; the
/// log-variance clamp contributes zero slope at and beyond its bounds.
VaeGradients backward(const VaeParams& p, const SlotVector& x,
                      const ForwardPass& f, const VaeOptions& opt = {});

/// Zero-filled gradient buffers matching p's shapes.
VaeGradients zero_gradients(const VaeParams& p);

/// acc += g, entrywise across all ten arrays.
void accumulate(VaeGradients& acc, const VaeGradients& g);

/// g *= s, entrywise across all ten arrays.
void scale(VaeGradients& g, double s);

}  // namespace loadvae
