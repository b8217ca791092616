#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "loadvae/tensor.hpp"

namespace loadvae {

/// Root mean squared error over paired samples. Lengths must match, be
/// nonzero, and all values must be finite.
double rmse(const std::vector<double>& truth, const std::vector<double>& pred);

/// Mean absolute error under the same preconditions.
double mae(const std::vector<double>& truth, const std::vector<double>& pred);

/// Relative improvement of `ours` over `other`, in percent:
/// (other - ours) / other * 100.
double improvement_percent(double ours, double other);

struct MetricReport {
  std::string model_name;
  std::string dataset_label;
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n = 0;    ///< held-out entries scored
  std::string scale;    ///< "normalized" or "raw"
  std::string positions_hash;  ///< FNV-1a over the scored position list
};

/// FNV-1a (64-bit) over the position list, as a hex string. Lets reports
/// assert that two models were scored on the identical held-out set.
std::string positions_hash(const std::vector<EntryIndex>& positions);

using PredictFn =
    std::function<std::vector<double>(const std::vector<EntryIndex>&)>;

/// Scores a model on the test-split entries of a normalized tensor. With
/// `raw`, both truth and predictions are mapped back to raw units first.
/// Non-finite predictions are an error naming the offending position.
MetricReport evaluate_model(const PredictFn& predict, const HdiTensor& t,
                            const EntrySplit& split,
                            const std::string& model_name,
                            const std::string& dataset_label,
                            bool raw = false);

}  // namespace loadvae
