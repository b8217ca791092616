#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "loadvae/tensor.hpp"

namespace loadvae {

/// Low-rank factors of the (k*N) x M matrix view of the tensor, where row
/// c*N + n holds channel c / day n and columns are time slots. Both factor
/// matrices are row-major with `rank` columns.
struct FactorMatrices {
  std::size_t k = 0;
  std::size_t n_days = 0;
  std::size_t m_slots = 0;
  std::size_t rank = 0;
  std::vector<double> p;  ///< (k*N) x rank
  std::vector<double> q;  ///< M x rank

  std::size_t rows() const { return k * n_days; }
  double predict(std::size_t row, std::size_t col) const;
};

/// Entry-wise SGD on the squared error with L2 shrinkage on both factors:
/// for a training entry x at (row, col) with error e = x - p_row . q_col,
///   p_row += lr * (e * q_col - lambda * p_row)
///   q_col += lr * (e * p_row_before - lambda * q_col)
/// Factors start uniform in [0, 0.1] from the seed; entries are revisited in
/// a fresh seeded shuffle every epoch. Tracks validation RMSE per epoch with
/// the same patience rule as the network trainer and returns the best
/// factors. Aborts if the epoch training loss exceeds 1e6 (divergence) or
/// turns non-finite.
FactorMatrices lfa_train(const HdiTensor& t, const EntrySplit& split,
                         std::size_t rank, double lr, double lambda,
                         std::size_t epochs, std::uint64_t seed,
                         std::size_t patience = 10);

/// Inner products at the requested positions, in their order. Predictions
/// are not clamped to [0, 1].
std::vector<double> lfa_predict(const FactorMatrices& f,
                                const std::vector<EntryIndex>& positions);

/// Per-channel mean of the training-split values, repeated at the requested
/// positions. A position whose channel has no training entries is an error.
std::vector<double> mean_impute(const HdiTensor& t, const EntrySplit& split,
                                const std::vector<EntryIndex>& positions);

}  // namespace loadvae
