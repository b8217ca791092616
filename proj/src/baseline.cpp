#include "loadvae/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "loadvae/rng.hpp"

namespace loadvae {

double FactorMatrices::predict(std::size_t row, std::size_t col) const {
  const double* pr = p.data() + row * rank;
  const double* qc = q.data() + col * rank;
  double acc = 0.0;
  for (std::size_t r = 0; r < rank; ++r) {
    acc += pr[r] * qc[r];
  }
  return acc;
}

namespace {

double split_rmse(const FactorMatrices& f, const HdiTensor& t,
                  const std::vector<EntryIndex>& entries) {
  if (entries.empty()) return 0.0;
  double se = 0.0;
  for (const EntryIndex& e : entries) {
    const double pred = f.predict(e.channel * t.n_days + e.day, e.slot);
    const double d = pred - t.at(e);
    se += d * d;
  }
  return std::sqrt(se / static_cast<double>(entries.size()));
}

}  // namespace

FactorMatrices lfa_train(const HdiTensor& t, const EntrySplit& split,
                         std::size_t rank, double lr, double lambda,
                         std::size_t epochs, std::uint64_t seed,
                         std::size_t patience) {
  if (!t.normalized()) {
    throw std::invalid_argument("lfa_train: tensor must be normalized");
  }
  if (rank == 0 || rank >= std::min(t.k * t.n_days, t.m_slots)) {
    throw std::invalid_argument(
        "lfa_train: rank must be in [1, min(k*N, M))");
  }
  if (epochs == 0) {
    throw std::invalid_argument("lfa_train: epochs must be > 0");
  }
  if (split.train.empty()) {
    throw std::invalid_argument("lfa_train: no training entries");
  }

  FactorMatrices f;
  f.k = t.k;
  f.n_days = t.n_days;
  f.m_slots = t.m_slots;
  f.rank = rank;
  f.p.resize(f.rows() * rank);
  f.q.resize(t.m_slots * rank);
  Rng init_rng(derive_seed(seed, 0));
  for (double& v : f.p) v = init_rng.uniform(0.0, 0.1);
  for (double& v : f.q) v = init_rng.uniform(0.0, 0.1);

  std::vector<EntryIndex> order = split.train;
  Rng rng(derive_seed(seed, 1));

  FactorMatrices best = f;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_best = 0;
  std::vector<double> row_before(rank);

  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    rng.shuffle(order);
    double loss = 0.0;
    for (const EntryIndex& e : order) {
      const std::size_t row = e.channel * t.n_days + e.day;
      double* pr = f.p.data() + row * rank;
      double* qc = f.q.data() + e.slot * rank;
      double pred = 0.0;
      for (std::size_t r = 0; r < rank; ++r) {
        pred += pr[r] * qc[r];
      }
      const double err = t.at(e) - pred;
      loss += 0.5 * err * err;
      // Both factors step from their pre-update values.
      std::copy(pr, pr + rank, row_before.begin());
      for (std::size_t r = 0; r < rank; ++r) {
        pr[r] += lr * (err * qc[r] - lambda * pr[r]);
        qc[r] += lr * (err * row_before[r] - lambda * qc[r]);
      }
    }
    if (!std::isfinite(loss) || loss > 1e6) {
      throw std::runtime_error(
          "lfa_train: diverged at epoch " + std::to_string(epoch) +
          " (training loss " + std::to_string(loss) + ")");
    }

    const double valid_rmse = split_rmse(f, t, split.valid);
    if (valid_rmse < best_rmse) {
      best_rmse = valid_rmse;
      best = f;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= patience) break;
    }
  }
  return best;
}

std::vector<double> lfa_predict(const FactorMatrices& f,
                                const std::vector<EntryIndex>& positions) {
  std::vector<double> out;
  out.reserve(positions.size());
  for (const EntryIndex& e : positions) {
    if (e.channel >= f.k || e.day >= f.n_days || e.slot >= f.m_slots) {
      throw std::invalid_argument("lfa_predict: position out of range");
    }
    out.push_back(f.predict(e.channel * f.n_days + e.day, e.slot));
  }
  return out;
}

std::vector<double> mean_impute(const HdiTensor& t, const EntrySplit& split,
                                const std::vector<EntryIndex>& positions) {
  std::vector<double> sum(t.k, 0.0);
  std::vector<std::size_t> count(t.k, 0);
  for (const EntryIndex& e : split.train) {
    sum[e.channel] += t.at(e);
    ++count[e.channel];
  }
  std::vector<double> out;
  out.reserve(positions.size());
  for (const EntryIndex& e : positions) {
    if (e.channel >= t.k || e.day >= t.n_days || e.slot >= t.m_slots) {
      throw std::invalid_argument("mean_impute: position out of range");
    }
    if (count[e.channel] == 0) {
      throw std::invalid_argument(
          "mean_impute: channel " + std::to_string(e.channel) +
          " has no training entries");
    }
    out.push_back(sum[e.channel] / static_cast<double>(count[e.channel]));
  }
  return out;
}

}  // namespace loadvae
