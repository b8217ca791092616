#include "loadvae/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace loadvae {
namespace {

void step_array(std::vector<double>& p, const std::vector<double>& g,
                std::vector<double>& m, std::vector<double>& v,
                double corr1, double corr2, const AdamConfig& cfg) {
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw std::invalid_argument("adam_step: gradient/state shape mismatch");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = m[i] / corr1;
    const double vhat = v[i] / corr2;
    p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

}  // namespace

AdamState init_adam_state(const VaeParams& p) {
  return AdamState{zero_gradients(p), zero_gradients(p)};
}

void adam_step(VaeParams& p, const VaeGradients& g, AdamState& s,
               std::size_t step_index, const AdamConfig& cfg) {
  if (step_index == 0) {
    throw std::invalid_argument("adam_step: step_index is 1-based");
  }
  const double t = static_cast<double>(step_index);
  const double corr1 = 1.0 - std::pow(cfg.beta1, t);
  const double corr2 = 1.0 - std::pow(cfg.beta2, t);
  step_array(p.w1, g.w1, s.m.w1, s.v.w1, corr1, corr2, cfg);
  step_array(p.b1, g.b1, s.m.b1, s.v.b1, corr1, corr2, cfg);
  step_array(p.w2, g.w2, s.m.w2, s.v.w2, corr1, corr2, cfg);
  step_array(p.b2, g.b2, s.m.b2, s.v.b2, corr1, corr2, cfg);
  step_array(p.w3, g.w3, s.m.w3, s.v.w3, corr1, corr2, cfg);
  step_array(p.b3, g.b3, s.m.b3, s.v.b3, corr1, corr2, cfg);
  step_array(p.w4, g.w4, s.m.w4, s.v.w4, corr1, corr2, cfg);
  step_array(p.b4, g.b4, s.m.b4, s.v.b4, corr1, corr2, cfg);
  step_array(p.w5, g.w5, s.m.w5, s.v.w5, corr1, corr2, cfg);
  step_array(p.b5, g.b5, s.m.b5, s.v.b5, corr1, corr2, cfg);
}

}  // namespace loadvae
