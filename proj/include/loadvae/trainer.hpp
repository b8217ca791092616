#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "loadvae/adam.hpp"
#include "loadvae/tensor.hpp"
#include "loadvae/vae.hpp"

namespace loadvae {

struct TrainConfig {
  std::size_t hidden_dim = 64;
  std::size_t latent_dim = 8;
  std::size_t epochs_max = 200;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  /// Stop after this many consecutive epochs without a new best validation
  /// RMSE.
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  VaeOptions vae;
};

struct EpochRecord {
  std::size_t epoch = 0;    ///< 1-based
  double train_loss = 0.0;  ///< mean per-vector total loss over the epoch
  double valid_rmse = 0.0;
  double valid_mae = 0.0;
  /// Kept at zero: training output is a pure function of its inputs, and a
  /// measured wall time would make reruns differ. Timing is reported by the
  /// command line instead.
  std::int64_t wall_ms = 0;
};

struct TrainResult {
  VaeParams params;  ///< parameters of the best-validation epoch
  AdamState adam;    ///< optimizer moments at that epoch
  std::size_t step_count = 0;  ///< Adam steps taken up to that epoch
  std::size_t best_epoch = 0;  ///< 1-based
  std::vector<EpochRecord> history;
};

/// Trains on the train-split view of a normalized tensor: seeded shuffling
/// into mini-batches, one Adam step per batch on the mean of the per-vector
/// gradients, and a validation pass per epoch that encodes the train-visible
/// vectors and scores the decoded means against the validation entries.
/// Only train-split entries ever enter the encoder input or the loss mask.
/// Deterministic given (t, split, cfg); a non-finite loss aborts with a
/// diagnostic naming the epoch, batch, and parameter norms.
TrainResult train(const HdiTensor& t, const EntrySplit& split,
                  const TrainConfig& cfg);

/// Fills every unobserved position: each slot vector is encoded with all
/// observed entries visible, decoded at the posterior mean (no sampling),
/// and read off at the missing positions. Values are in normalized units,
/// listed in (channel, day, slot) order.
std::vector<std::pair<EntryIndex, double>> impute(const VaeParams& p,
                                                  const HdiTensor& t,
                                                  const VaeOptions& opt = {});

/// Same decoding path restricted to the given positions, in their order.
std::vector<double> predict_at(const VaeParams& p, const HdiTensor& t,
                               const std::vector<EntryIndex>& positions,
                               const VaeOptions& opt = {});

}  // namespace loadvae
