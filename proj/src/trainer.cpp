#include "loadvae/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "loadvae/rng.hpp"

namespace loadvae {
namespace {

double l2_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

std::string param_norms(const VaeParams& p) {
  std::ostringstream out;
  out << "|w1|=" << l2_norm(p.w1) << " |w2|=" << l2_norm(p.w2)
      << " |w3|=" << l2_norm(p.w3) << " |w4|=" << l2_norm(p.w4)
      << " |w5|=" << l2_norm(p.w5);
  return out.str();
}

// Decodes the posterior mean of every slot vector in `inputs` and scores the
// predictions at the mask-true positions of `targets`.
std::pair<double, double> masked_rmse_mae(const VaeParams& p,
                                          const std::vector<SlotVector>& inputs,
                                          const std::vector<SlotVector>& targets,
                                          const VaeOptions& opt) {
  double se = 0.0;
  double ae = 0.0;
  std::size_t n = 0;
  for (std::size_t m = 0; m < inputs.size(); ++m) {
    const SlotVector& target = targets[m];
    bool any = false;
    for (std::uint8_t f : target.mask) {
      if (f != 0) {
        any = true;
        break;
      }
    }
    if (!any) continue;
    const EncoderOutput e = encoder_forward(p, inputs[m], opt);
    const std::vector<double> x_hat = decoder_forward(p, e.mu);
    for (std::size_t i = 0; i < target.mask.size(); ++i) {
      if (target.mask[i] == 0) continue;
      const double d = x_hat[i] - target.x[i];
      se += d * d;
      ae += std::abs(d);
      ++n;
    }
  }
  if (n == 0) {
    return {0.0, 0.0};
  }
  const double dn = static_cast<double>(n);
  return {std::sqrt(se / dn), ae / dn};
}

}  // namespace

TrainResult train(const HdiTensor& t, const EntrySplit& split,
                  const TrainConfig& cfg) {
  if (!t.normalized()) {
    throw std::invalid_argument("train: tensor must be normalized");
  }
  if (cfg.epochs_max == 0 || cfg.batch_size == 0) {
    throw std::invalid_argument("train: epochs_max and batch_size must be > 0");
  }
  const std::vector<SlotVector> train_vecs =
      vectorize(t, split, SplitRole::kTrain);
  const std::vector<SlotVector> valid_vecs =
      vectorize(t, split, SplitRole::kValid);

  std::size_t train_entries = 0;
  for (const SlotVector& v : train_vecs) {
    for (std::uint8_t f : v.mask) train_entries += f;
  }
  if (train_entries == 0) {
    throw std::invalid_argument("train: no training entries in any vector");
  }

  const std::size_t input_dim = t.k * t.n_days;
  VaeParams params = init_params(input_dim, cfg.hidden_dim, cfg.latent_dim,
                                 derive_seed(cfg.seed, 0));
  AdamState adam = init_adam_state(params);
  const AdamConfig adam_cfg{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps_adam};
  Rng rng(derive_seed(cfg.seed, 1));

  TrainResult result;
  VaeParams best_params = params;
  AdamState best_adam = adam;
  std::size_t best_steps = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t epochs_since_best = 0;
  std::size_t step = 0;

  std::vector<std::size_t> order(train_vecs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.epochs_max; ++epoch) {
    rng.shuffle(order);
    double epoch_loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t end =
          std::min(start + cfg.batch_size, order.size());
      const std::size_t batch = end - start;

      VaeGradients grad_sum = zero_gradients(params);
      double batch_loss_sum = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const SlotVector& v = train_vecs[order[i]];
        const ForwardPass f = total_loss(params, v, rng, cfg.vae);
        batch_loss_sum += f.loss.total;
        accumulate(grad_sum, backward(params, v, f, cfg.vae));
      }
      if (!std::isfinite(batch_loss_sum)) {
        std::ostringstream msg;
        msg << "train: non-finite loss at epoch " << epoch << ", batch "
            << start / cfg.batch_size << "; " << param_norms(params);
        throw std::runtime_error(msg.str());
      }
      epoch_loss_sum += batch_loss_sum;
      scale(grad_sum, 1.0 / static_cast<double>(batch));
      adam_step(params, grad_sum, adam, ++step, adam_cfg);
    }

    auto [valid_rmse, valid_mae] =
        masked_rmse_mae(params, train_vecs, valid_vecs, cfg.vae);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss_sum / static_cast<double>(train_vecs.size());
    rec.valid_rmse = valid_rmse;
    rec.valid_mae = valid_mae;
    result.history.push_back(rec);

    if (valid_rmse < best_rmse) {
      best_rmse = valid_rmse;
      best_params = params;
      best_adam = adam;
      best_steps = step;
      best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
    }
  }

  result.params = std::move(best_params);
  result.adam = std::move(best_adam);
  result.step_count = best_steps;
  result.best_epoch = best_epoch;
  return result;
}

namespace {

// Posterior-mean reconstruction of every slot vector, with all observed
// entries visible to the encoder.
std::vector<std::vector<double>> reconstruct_all(const VaeParams& p,
                                                 const HdiTensor& t,
                                                 const VaeOptions& opt) {
  const std::vector<SlotVector> vecs = vectorize_observed(t);
  std::vector<std::vector<double>> x_hat(vecs.size());
  for (std::size_t m = 0; m < vecs.size(); ++m) {
    const EncoderOutput e = encoder_forward(p, vecs[m], opt);
    x_hat[m] = decoder_forward(p, e.mu);
  }
  return x_hat;
}

}  // namespace

std::vector<std::pair<EntryIndex, double>> impute(const VaeParams& p,
                                                  const HdiTensor& t,
                                                  const VaeOptions& opt) {
  if (p.input_dim != t.k * t.n_days) {
    throw std::invalid_argument("impute: model input dim " +
                                std::to_string(p.input_dim) +
                                " does not match tensor k*N " +
                                std::to_string(t.k * t.n_days));
  }
  const std::vector<std::vector<double>> x_hat = reconstruct_all(p, t, opt);
  std::vector<std::pair<EntryIndex, double>> out;
  out.reserve(t.size() - t.observed_count());
  for (std::size_t c = 0; c < t.k; ++c) {
    for (std::size_t n = 0; n < t.n_days; ++n) {
      const std::size_t row = c * t.n_days + n;
      for (std::size_t m = 0; m < t.m_slots; ++m) {
        const EntryIndex e{c, n, m};
        if (t.is_observed(e)) continue;
        out.emplace_back(e, x_hat[m][row]);
      }
    }
  }
  return out;
}

std::vector<double> predict_at(const VaeParams& p, const HdiTensor& t,
                               const std::vector<EntryIndex>& positions,
                               const VaeOptions& opt) {
  if (p.input_dim != t.k * t.n_days) {
    throw std::invalid_argument("predict_at: model input dim " +
                                std::to_string(p.input_dim) +
                                " does not match tensor k*N " +
                                std::to_string(t.k * t.n_days));
  }
  const std::vector<SlotVector> vecs = vectorize_observed(t);
  // Decode only the slots that are actually asked about.
  std::vector<std::vector<double>> cache(t.m_slots);
  std::vector<double> out;
  out.reserve(positions.size());
  for (const EntryIndex& e : positions) {
    if (e.channel >= t.k || e.day >= t.n_days || e.slot >= t.m_slots) {
      throw std::invalid_argument("predict_at: position out of range");
    }
    if (cache[e.slot].empty()) {
      const EncoderOutput enc = encoder_forward(p, vecs[e.slot], opt);
      cache[e.slot] = decoder_forward(p, enc.mu);
    }
    out.push_back(cache[e.slot][e.channel * t.n_days + e.day]);
  }
  return out;
}

}  // namespace loadvae
