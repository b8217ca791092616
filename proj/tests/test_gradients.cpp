#include <doctest.h>
#include <loadvae/gradcheck.hpp>
#include <loadvae/rng.hpp>
#include <loadvae/vae.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "test_support.hpp"

using namespace loadvae;

namespace {

VaeParams small_net(std::uint64_t seed) {
  VaeParams p = init_params(6, 5, 3, seed);
  Rng rng(derive_seed(seed, 17));
  for (auto* b : {&p.b1, &p.b2, &p.b3, &p.b4, &p.b5}) {
    for (double& v : *b) v = rng.uniform(-0.3, 0.3);
  }
  return p;
}

SlotVector slot_for(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  SlotVector v;
  v.x.assign(dim, 0.0);
  v.mask.assign(dim, 0);
  for (std::size_t i = 0; i < dim; ++i) {
    if (rng.next_unit() < 0.75) {
      v.mask[i] = 1;
      v.x[i] = rng.next_unit();
    }
  }
  return v;
}

}  // namespace

TEST_CASE("gradients: finite differences confirm the analytic pass") {
  GradCheckSettings s;
  s.trials = 40;  // the acceptance run does 100+; keep the unit suite quick
  GradCheckReport report = run_gradient_check(1234, s);
  CHECK(report.passed);
  CHECK(report.trials == 40);
  REQUIRE(report.blocks.size() == 10);
  for (const auto& b : report.blocks) {
    CAPTURE(b.name);
    CHECK(b.max_rel_err <= s.rel_tol);
  }
}

TEST_CASE("gradients: finite differences confirm the mean-ReLU variant") {
  GradCheckSettings s;
  s.trials = 25;
  s.mu_relu = true;
  GradCheckReport report = run_gradient_check(99, s);
  CHECK(report.passed);
}

TEST_CASE("gradients: an injected gradient error is caught") {
  GradCheckSettings s;
  s.trials = 5;
  s.corrupt = true;
  GradCheckReport report = run_gradient_check(7, s);
  CHECK_FALSE(report.passed);
}

TEST_CASE("gradients: report formatting names every array") {
  GradCheckSettings s;
  s.trials = 3;
  GradCheckReport report = run_gradient_check(11, s);
  const std::string text = format_report(report);
  for (const char* name : {"w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4",
                           "w5", "b5"}) {
    CHECK(testsup::contains(text, name));
  }
}

TEST_CASE("gradients: output-bias gradient equals the masked sigmoid delta") {
  VaeParams p = small_net(5);
  SlotVector x = slot_for(6, 6);
  Rng rng(7);
  ForwardPass f = total_loss(p, x, rng);
  VaeGradients g = backward(p, x, f);

  for (std::size_t i = 0; i < 6; ++i) {
    const double want = x.mask[i] == 0
                            ? 0.0
                            : (f.x_hat[i] - x.x[i]) * f.x_hat[i] *
                                  (1.0 - f.x_hat[i]);
    CHECK(g.b5[i] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("gradients: every gradient vanishes at the flat point") {
  // Zero params, all-hidden input: reconstruction deltas are masked away and
  // the divergence sits at its minimum, so the whole gradient is exactly 0.
  VaeParams p = init_params(5, 4, 2, 8);
  for (auto* w : {&p.w1, &p.w2, &p.w3, &p.w4, &p.w5}) {
    std::fill(w->begin(), w->end(), 0.0);
  }
  SlotVector x;
  x.x.assign(5, 0.0);
  x.mask.assign(5, 0);
  Rng rng(9);
  ForwardPass f = total_loss(p, x, rng);
  VaeGradients g = backward(p, x, f);

  for (const auto* arr : {&g.w1, &g.b1, &g.w2, &g.b2, &g.w3, &g.b3, &g.w4,
                          &g.b4, &g.w5, &g.b5}) {
    for (double v : *arr) {
      CHECK(v == 0.0);
    }
  }
}

TEST_CASE("gradients: saturated logvar clamp blocks its head") {
  VaeParams p = small_net(10);
  std::fill(p.w3.begin(), p.w3.end(), 0.0);
  p.b3.assign(3, 25.0);  // clamps to +10, derivative must be zero
  SlotVector x = slot_for(6, 11);
  Rng rng(12);
  ForwardPass f = total_loss(p, x, rng);
  REQUIRE(f.enc.logvar == std::vector<double>(3, 10.0));

  VaeGradients g = backward(p, x, f);
  CHECK(std::all_of(g.w3.begin(), g.w3.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(g.b3.begin(), g.b3.end(), [](double v) { return v == 0.0; }));
  // The mean head is unaffected by the clamp.
  CHECK(std::any_of(g.b2.begin(), g.b2.end(), [](double v) { return v != 0.0; }));
}

TEST_CASE("gradients: dead encoder units contribute nothing") {
  VaeParams p = small_net(13);
  p.b1.assign(5, -100.0);  // every hidden unit rests below the ReLU kink
  SlotVector x = slot_for(6, 14);
  Rng rng(15);
  ForwardPass f = total_loss(p, x, rng);
  REQUIRE(f.enc.h == std::vector<double>(5, 0.0));

  VaeGradients g = backward(p, x, f);
  CHECK(std::all_of(g.w1.begin(), g.w1.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(g.b1.begin(), g.b1.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("gradients: clamped mean head blocks the mean path") {
  VaeParams p = small_net(16);
  std::fill(p.w2.begin(), p.w2.end(), 0.0);
  p.b2.assign(3, -0.5);  // ReLU pins mu at zero when the ablation is on
  SlotVector x = slot_for(6, 17);
  Rng rng(18);
  const VaeOptions opt{true};
  ForwardPass f = total_loss(p, x, rng, opt);
  REQUIRE(f.enc.mu == std::vector<double>(3, 0.0));

  VaeGradients g = backward(p, x, f, opt);
  CHECK(std::all_of(g.w2.begin(), g.w2.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(g.b2.begin(), g.b2.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("gradients: backward validates the recorded intermediates") {
  VaeParams p = small_net(19);
  SlotVector x = slot_for(6, 20);
  Rng rng(21);
  ForwardPass f = total_loss(p, x, rng);
  f.enc.h.pop_back();
  CHECK_THROWS_AS(backward(p, x, f), std::invalid_argument);
}

TEST_CASE("gradients: per-coordinate finite difference on a tiny fixture") {
  // Redundant with the batched checker, but pinned here so a regression in
  // the checker itself cannot mask one in backward.
  VaeParams p = small_net(30);
  SlotVector x = slot_for(6, 31);
  std::vector<double> eps = {0.4, -1.1, 0.2};

  ForwardPass f = total_loss_with_eps(p, x, eps);
  VaeGradients g = backward(p, x, f);

  const double h = 1e-6;
  auto loss_at = [&](VaeParams q) {
    return total_loss_with_eps(q, x, eps).loss.total;
  };

  // Probe a handful of coordinates across three arrays.
  struct Probe {
    std::vector<double> VaeParams::*array;
    std::vector<double> VaeGradients::*grad;
    std::size_t index;
  };
  const Probe probes[] = {
      {&VaeParams::w1, &VaeGradients::w1, 0},
      {&VaeParams::w1, &VaeGradients::w1, 17},
      {&VaeParams::w4, &VaeGradients::w4, 5},
      {&VaeParams::b2, &VaeGradients::b2, 1},
      {&VaeParams::w5, &VaeGradients::w5, 12},
  };
  for (const Probe& pr : probes) {
    VaeParams up = p;
    VaeParams down = p;
    (up.*(pr.array))[pr.index] += h;
    (down.*(pr.array))[pr.index] -= h;
    const double fd = (loss_at(up) - loss_at(down)) / (2.0 * h);
    const double analytic = (g.*(pr.grad))[pr.index];
    CHECK(analytic == doctest::Approx(fd).epsilon(5e-4));
  }
}
