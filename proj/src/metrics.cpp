#include "loadvae/metrics.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace loadvae {
namespace {

void check_pair(const std::vector<double>& truth,
                const std::vector<double>& pred, const char* where) {
  if (truth.empty() || truth.size() != pred.size()) {
    throw std::invalid_argument(
        std::string(where) + ": need equal nonzero lengths, got " +
        std::to_string(truth.size()) + " and " + std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!std::isfinite(truth[i]) || !std::isfinite(pred[i])) {
      throw std::invalid_argument(std::string(where) +
                                  ": non-finite value at index " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

double rmse(const std::vector<double>& truth, const std::vector<double>& pred) {
  check_pair(truth, pred, "rmse");
  double se = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - pred[i];
    se += d * d;
  }
  return std::sqrt(se / static_cast<double>(truth.size()));
}

double mae(const std::vector<double>& truth, const std::vector<double>& pred) {
  check_pair(truth, pred, "mae");
  double ae = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ae += std::abs(truth[i] - pred[i]);
  }
  return ae / static_cast<double>(truth.size());
}

double improvement_percent(double ours, double other) {
  if (other == 0.0) {
    throw std::invalid_argument("improvement_percent: reference is zero");
  }
  return (other - ours) / other * 100.0;
}

std::string positions_hash(const std::vector<EntryIndex>& positions) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  for (const EntryIndex& e : positions) {
    mix(e.channel);
    mix(e.day);
    mix(e.slot);
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

MetricReport evaluate_model(const PredictFn& predict, const HdiTensor& t,
                            const EntrySplit& split,
                            const std::string& model_name,
                            const std::string& dataset_label, bool raw) {
  if (!t.normalized()) {
    throw std::invalid_argument("evaluate_model: tensor must be normalized");
  }
  if (split.test.empty()) {
    throw std::invalid_argument("evaluate_model: empty test split");
  }
  const std::vector<EntryIndex>& positions = split.test;

  std::vector<double> pred = predict(positions);
  if (pred.size() != positions.size()) {
    throw std::runtime_error("evaluate_model: model returned " +
                             std::to_string(pred.size()) +
                             " predictions for " +
                             std::to_string(positions.size()) + " positions");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i])) {
      const EntryIndex& e = positions[i];
      throw std::runtime_error(
          "evaluate_model: non-finite prediction at (" +
          std::to_string(e.channel) + ", " + std::to_string(e.day) + ", " +
          std::to_string(e.slot) + ")");
    }
  }

  std::vector<double> truth;
  truth.reserve(positions.size());
  for (const EntryIndex& e : positions) {
    truth.push_back(t.at(e));
  }

  if (raw) {
    std::vector<std::pair<EntryIndex, double>> paired;
    paired.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      paired.emplace_back(positions[i], pred[i]);
    }
    const auto raw_pred = denormalize(t, paired);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      paired[i].second = truth[i];
    }
    const auto raw_truth = denormalize(t, paired);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      pred[i] = raw_pred[i].second;
      truth[i] = raw_truth[i].second;
    }
  }

  MetricReport report;
  report.model_name = model_name;
  report.dataset_label = dataset_label;
  report.rmse = rmse(truth, pred);
  report.mae = mae(truth, pred);
  report.n = positions.size();
  report.scale = raw ? "raw" : "normalized";
  report.positions_hash = positions_hash(positions);
  // Root mean square dominates the mean absolute deviation; anything else
  // means the aggregation itself is broken.
  if (report.rmse < report.mae - 1e-12) {
    throw std::runtime_error("evaluate_model: rmse fell below mae");
  }
  return report;
}

}  // namespace loadvae
