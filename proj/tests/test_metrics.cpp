#include <doctest.h>
#include <loadvae/metrics.hpp>
#include <loadvae/rng.hpp>
#include <loadvae/synthetic.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "test_support.hpp"

using namespace loadvae;

TEST_CASE("metrics: unit-error fixture scores exactly 1 on both measures") {
  const std::vector<double> truth = {1.0, 0.0};
  const std::vector<double> pred = {0.0, 1.0};
  CHECK(rmse(truth, pred) == 1.0);
  CHECK(mae(truth, pred) == 1.0);
}

TEST_CASE("metrics: hand-computed fixtures") {
  // Squared errors 9 and 16: rmse = sqrt(12.5), mae = 3.5.
  CHECK(rmse({3.0, 4.0}, {0.0, 0.0}) ==
        doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK(mae({3.0, 4.0}, {0.0, 0.0}) == 3.5);

  CHECK(rmse({2.5}, {2.5}) == 0.0);
  CHECK(mae({2.5}, {2.5}) == 0.0);

  // A constant error makes the two measures coincide.
  const std::vector<double> t = {0.1, 0.5, 0.9, 0.3};
  std::vector<double> p = t;
  for (double& v : p) v += 0.25;
  CHECK(rmse(t, p) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(mae(t, p) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("metrics: root mean square dominates mean absolute error") {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<double> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng.uniform(-10.0, 10.0);
      pred[i] = rng.uniform(-10.0, 10.0);
    }
    CHECK(rmse(truth, pred) >= mae(truth, pred) - 1e-12);
  }
}

TEST_CASE("metrics: argument validation") {
  CHECK_THROWS_AS(rmse({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(rmse({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(mae({1.0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(
      rmse({std::numeric_limits<double>::quiet_NaN()}, {0.0}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      mae({0.0}, {std::numeric_limits<double>::infinity()}),
      std::invalid_argument);
}

TEST_CASE("metrics: relative improvement in percent") {
  // 0.1384 vs 0.1507 is an 8.16% error reduction.
  const double got = improvement_percent(0.1384, 0.1507);
  CHECK(got == doctest::Approx(8.16).epsilon(0.002));
  CHECK(got > 8.15);
  CHECK(got < 8.17);

  CHECK(improvement_percent(0.5, 0.5) == 0.0);
  CHECK(improvement_percent(0.2, 0.1) == -100.0);  // ours worse: negative
  CHECK_THROWS_AS(improvement_percent(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("metrics: position digests separate different held-out sets") {
  const std::vector<EntryIndex> a = {{0, 1, 2}, {1, 0, 5}};
  const std::vector<EntryIndex> b = {{1, 0, 5}, {0, 1, 2}};
  const std::vector<EntryIndex> c = {{0, 1, 2}, {1, 0, 6}};
  CHECK(positions_hash(a) == positions_hash(a));
  CHECK(positions_hash(a) != positions_hash(b));  // order matters
  CHECK(positions_hash(a) != positions_hash(c));
  CHECK_FALSE(positions_hash({}).empty());
}

TEST_CASE("metrics: evaluate_model scores the test split") {
  HdiTensor t = normalize(generate_synthetic(2, 6, 24, 70));
  EntrySplit split = split_entries(t, 71);

  // An oracle that reads the truth back scores zero.
  const PredictFn oracle = [&](const std::vector<EntryIndex>& pos) {
    std::vector<double> out;
    for (const EntryIndex& e : pos) out.push_back(t.at(e));
    return out;
  };
  MetricReport perfect =
      evaluate_model(oracle, t, split, "oracle", "synthetic-unit");
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.mae == 0.0);
  CHECK(perfect.n == split.test.size());
  CHECK(perfect.model_name == "oracle");
  CHECK(perfect.dataset_label == "synthetic-unit");
  CHECK(perfect.scale == "normalized");
  CHECK(perfect.positions_hash == positions_hash(split.test));

  // A constant predictor must match an independent accumulation.
  const PredictFn constant = [](const std::vector<EntryIndex>& pos) {
    return std::vector<double>(pos.size(), 0.4);
  };
  MetricReport flat = evaluate_model(constant, t, split, "flat", "d");
  double se = 0.0, ae = 0.0;
  for (const EntryIndex& e : split.test) {
    const double d = t.at(e) - 0.4;
    se += d * d;
    ae += std::abs(d);
  }
  const double n = static_cast<double>(split.test.size());
  CHECK(flat.rmse == doctest::Approx(std::sqrt(se / n)).epsilon(1e-14));
  CHECK(flat.mae == doctest::Approx(ae / n).epsilon(1e-14));
}

TEST_CASE("metrics: scores are invariant under test-set reordering") {
  HdiTensor t = normalize(generate_synthetic(1, 8, 16, 80));
  EntrySplit split = split_entries(t, 81);
  const PredictFn constant = [](const std::vector<EntryIndex>& pos) {
    return std::vector<double>(pos.size(), 0.35);
  };
  MetricReport before = evaluate_model(constant, t, split, "m", "d");

  EntrySplit shuffled = split;
  std::reverse(shuffled.test.begin(), shuffled.test.end());
  MetricReport after = evaluate_model(constant, t, shuffled, "m", "d");

  CHECK(testsup::bits_equal(before.rmse, after.rmse));
  CHECK(testsup::bits_equal(before.mae, after.mae));
  CHECK(before.positions_hash != after.positions_hash);
}

TEST_CASE("metrics: raw scale undoes the per-channel normalization") {
  // Single channel: raw errors are normalized errors times the span.
  HdiTensor raw = testsup::full_tensor(
      1, 2, 4, {12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0, 26.0});
  HdiTensor t = normalize(raw);
  EntrySplit split;
  split.train = {EntryIndex{0, 0, 0}, EntryIndex{0, 0, 1}, EntryIndex{0, 0, 2}};
  split.valid = {EntryIndex{0, 0, 3}, EntryIndex{0, 1, 0}};
  split.test = {EntryIndex{0, 1, 1}, EntryIndex{0, 1, 2}, EntryIndex{0, 1, 3}};

  const PredictFn constant = [](const std::vector<EntryIndex>& pos) {
    return std::vector<double>(pos.size(), 0.5);
  };
  MetricReport norm_scale = evaluate_model(constant, t, split, "m", "d", false);
  MetricReport raw_scale = evaluate_model(constant, t, split, "m", "d", true);

  const double span = 26.0 - 12.0;
  CHECK(raw_scale.scale == "raw");
  CHECK(raw_scale.rmse ==
        doctest::Approx(span * norm_scale.rmse).epsilon(1e-12));
  CHECK(raw_scale.mae == doctest::Approx(span * norm_scale.mae).epsilon(1e-12));
}

TEST_CASE("metrics: evaluate_model rejects broken models and inputs") {
  HdiTensor t = normalize(generate_synthetic(1, 6, 12, 90));
  EntrySplit split = split_entries(t, 91);

  const PredictFn short_model = [](const std::vector<EntryIndex>& pos) {
    return std::vector<double>(pos.size() - 1, 0.5);
  };
  CHECK_THROWS_AS(evaluate_model(short_model, t, split, "m", "d"),
                  std::runtime_error);

  const PredictFn nan_model = [](const std::vector<EntryIndex>& pos) {
    std::vector<double> out(pos.size(), 0.5);
    out.back() = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  const std::string msg = testsup::thrown_message<std::runtime_error>(
      [&] { evaluate_model(nan_model, t, split, "m", "d"); });
  CHECK(testsup::contains(msg, "non-finite prediction"));
  CHECK(testsup::contains(msg, "("));  // names the offending position

  EntrySplit empty = split;
  empty.test.clear();
  const PredictFn constant = [](const std::vector<EntryIndex>& pos) {
    return std::vector<double>(pos.size(), 0.5);
  };
  CHECK_THROWS_AS(evaluate_model(constant, t, empty, "m", "d"),
                  std::invalid_argument);

  HdiTensor not_norm = generate_synthetic(1, 6, 12, 90);
  CHECK_THROWS_AS(evaluate_model(constant, not_norm, split, "m", "d"),
                  std::invalid_argument);
}
