#include "loadvae/vae.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace loadvae {
namespace {

// Sigmoid outputs are nudged off the exact endpoints so the open-interval
// contract survives rounding (1/(1+exp(-u)) rounds to 1.0 once u > ~37).
constexpr double kSigmoidGuard = 1e-15;

double stable_sigmoid(double u) {
  double s = 0.0;
  if (u >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-u));
  } else {
    const double e = std::exp(u);
    s = e / (1.0 + e);
  }
  if (s < kSigmoidGuard) s = kSigmoidGuard;
  if (s > 1.0 - kSigmoidGuard) s = 1.0 - kSigmoidGuard;
  return s;
}

// y = A x + b with A row-major rows x cols.
void affine(const std::vector<double>& a, const std::vector<double>& b,
            std::size_t rows, std::size_t cols, const std::vector<double>& x,
            std::vector<double>& y) {
  y.assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = b[i];
    const double* row = a.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      acc += row[j] * x[j];
    }
    y[i] = acc;
  }
}

// x += A^T y with A row-major rows x cols.
void add_matvec_transposed(const std::vector<double>& a, std::size_t rows,
                           std::size_t cols, const std::vector<double>& y,
                           std::vector<double>& x) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = a.data() + i * cols;
    const double yi = y[i];
    for (std::size_t j = 0; j < cols; ++j) {
      x[j] += row[j] * yi;
    }
  }
}

// grad += delta * v^T (outer product), grad row-major rows x cols.
void add_outer(std::vector<double>& grad, const std::vector<double>& delta,
               const std::vector<double>& v, std::size_t rows,
               std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = grad.data() + i * cols;
    const double di = delta[i];
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] += di * v[j];
    }
  }
}

void check_params(const VaeParams& p, const char* where) {
  const std::size_t in = p.input_dim;
  const std::size_t hid = p.hidden_dim;
  const std::size_t lat = p.latent_dim;
  if (in == 0 || hid == 0 || lat == 0) {
    throw std::invalid_argument(std::string(where) + ": zero dimension");
  }
  const bool ok = p.w1.size() == hid * in && p.b1.size() == hid &&
                  p.w2.size() == lat * hid && p.b2.size() == lat &&
                  p.w3.size() == lat * hid && p.b3.size() == lat &&
                  p.w4.size() == hid * lat && p.b4.size() == hid &&
                  p.w5.size() == in * hid && p.b5.size() == in;
  if (!ok) {
    throw std::invalid_argument(std::string(where) +
                                ": parameter array sizes do not match dims");
  }
}

void check_input(const VaeParams& p, const SlotVector& x, const char* where) {
  if (x.x.size() != p.input_dim || x.mask.size() != p.input_dim) {
    throw std::invalid_argument(
        std::string(where) + ": slot vector has length " +
        std::to_string(x.x.size()) + "/" + std::to_string(x.mask.size()) +
        ", expected " + std::to_string(p.input_dim));
  }
}

}  // namespace

VaeParams init_params(std::size_t input_dim, std::size_t hidden_dim,
                      std::size_t latent_dim, std::uint64_t seed) {
  if (input_dim == 0 || hidden_dim == 0 || latent_dim == 0) {
    throw std::invalid_argument("init_params: zero dimension");
  }
  VaeParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.latent_dim = latent_dim;

  Rng rng(seed);
  auto fill = [&rng](std::vector<double>& w, std::size_t fan_out,
                     std::size_t fan_in) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    w.resize(fan_out * fan_in);
    for (double& v : w) {
      v = rng.uniform(-bound, bound);
    }
  };
  fill(p.w1, hidden_dim, input_dim);
  fill(p.w2, latent_dim, hidden_dim);
  fill(p.w3, latent_dim, hidden_dim);
  fill(p.w4, hidden_dim, latent_dim);
  fill(p.w5, input_dim, hidden_dim);
  p.b1.assign(hidden_dim, 0.0);
  p.b2.assign(latent_dim, 0.0);
  p.b3.assign(latent_dim, 0.0);
  p.b4.assign(hidden_dim, 0.0);
  p.b5.assign(input_dim, 0.0);
  return p;
}

EncoderOutput encoder_forward(const VaeParams& p, const SlotVector& x,
                              const VaeOptions& opt) {
  check_params(p, "encoder_forward");
  check_input(p, x, "encoder_forward");

  EncoderOutput e;
  affine(p.w1, p.b1, p.hidden_dim, p.input_dim, x.x, e.h);
  for (double& v : e.h) {
    if (v < 0.0) v = 0.0;
  }
  affine(p.w2, p.b2, p.latent_dim, p.hidden_dim, e.h, e.mu);
  if (opt.mu_relu) {
    for (double& v : e.mu) {
      if (v < 0.0) v = 0.0;
    }
  }
  affine(p.w3, p.b3, p.latent_dim, p.hidden_dim, e.h, e.logvar);
  for (double& v : e.logvar) {
    if (v < kLogVarMin) v = kLogVarMin;
    if (v > kLogVarMax) v = kLogVarMax;
  }
  return e;
}

LatentSample reparameterize(const EncoderOutput& e, Rng& rng) {
  LatentSample s;
  s.eps.resize(e.mu.size());
  s.z.resize(e.mu.size());
  for (std::size_t i = 0; i < e.mu.size(); ++i) {
    s.eps[i] = rng.gaussian();
    s.z[i] = e.mu[i] + std::exp(0.5 * e.logvar[i]) * s.eps[i];
  }
  return s;
}

namespace {

// Decoder forward that also hands back the post-ReLU hidden layer.
std::vector<double> decode_trace(const VaeParams& p,
                                 const std::vector<double>& z,
                                 std::vector<double>& hidden) {
  affine(p.w4, p.b4, p.hidden_dim, p.latent_dim, z, hidden);
  for (double& v : hidden) {
    if (v < 0.0) v = 0.0;
  }
  std::vector<double> x_hat;
  affine(p.w5, p.b5, p.input_dim, p.hidden_dim, hidden, x_hat);
  for (double& v : x_hat) {
    v = stable_sigmoid(v);
  }
  return x_hat;
}

}  // namespace

std::vector<double> decoder_forward(const VaeParams& p,
                                    const std::vector<double>& z) {
  check_params(p, "decoder_forward");
  if (z.size() != p.latent_dim) {
    throw std::invalid_argument("decoder_forward: z has length " +
                                std::to_string(z.size()) + ", expected " +
                                std::to_string(p.latent_dim));
  }
  std::vector<double> hidden;
  return decode_trace(p, z, hidden);
}

double kl_divergence(const EncoderOutput& e) {
  if (e.mu.size() != e.logvar.size()) {
    throw std::invalid_argument("kl_divergence: mu/logvar length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < e.mu.size(); ++i) {
    acc += e.mu[i] * e.mu[i] + std::exp(e.logvar[i]) - e.logvar[i] - 1.0;
  }
  // The sum is nonnegative in exact arithmetic; clip the rounding residue.
  double kl = 0.5 * acc;
  return kl < 0.0 ? 0.0 : kl;
}

std::pair<double, std::size_t> recon_loss(const std::vector<double>& x_hat,
                                          const SlotVector& x) {
  if (x_hat.size() != x.x.size() || x.mask.size() != x.x.size()) {
    throw std::invalid_argument("recon_loss: length mismatch");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < x_hat.size(); ++i) {
    if (x.mask[i] == 0) continue;
    const double d = x.x[i] - x_hat[i];
    acc += d * d;
    ++count;
  }
  return {0.5 * acc, count};
}

ForwardPass total_loss(const VaeParams& p, const SlotVector& x, Rng& rng,
                       const VaeOptions& opt) {
  ForwardPass f;
  f.enc = encoder_forward(p, x, opt);
  f.sample = reparameterize(f.enc, rng);
  f.x_hat = decode_trace(p, f.sample.z, f.dec_hidden);
  auto [recon, count] = recon_loss(f.x_hat, x);
  f.loss.recon = recon;
  f.loss.observed_count = count;
  f.loss.kl = kl_divergence(f.enc);
  f.loss.total = f.loss.recon + f.loss.kl;
  return f;
}

ForwardPass total_loss_with_eps(const VaeParams& p, const SlotVector& x,
                                const std::vector<double>& eps,
                                const VaeOptions& opt) {
  if (eps.size() != p.latent_dim) {
    throw std::invalid_argument("total_loss_with_eps: eps has length " +
                                std::to_string(eps.size()) + ", expected " +
                                std::to_string(p.latent_dim));
  }
  ForwardPass f;
  f.enc = encoder_forward(p, x, opt);
  f.sample.eps = eps;
  f.sample.z.resize(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    f.sample.z[i] = f.enc.mu[i] + std::exp(0.5 * f.enc.logvar[i]) * eps[i];
  }
  f.x_hat = decode_trace(p, f.sample.z, f.dec_hidden);
  auto [recon, count] = recon_loss(f.x_hat, x);
  f.loss.recon = recon;
  f.loss.observed_count = count;
  f.loss.kl = kl_divergence(f.enc);
  f.loss.total = f.loss.recon + f.loss.kl;
  return f;
}

VaeGradients backward(const VaeParams& p, const SlotVector& x,
                      const ForwardPass& f, const VaeOptions& opt) {
  check_params(p, "backward");
  check_input(p, x, "backward");
  const std::size_t in = p.input_dim;
  const std::size_t hid = p.hidden_dim;
  const std::size_t lat = p.latent_dim;
  if (f.enc.h.size() != hid || f.enc.mu.size() != lat ||
      f.enc.logvar.size() != lat || f.sample.z.size() != lat ||
      f.sample.eps.size() != lat || f.dec_hidden.size() != hid ||
      f.x_hat.size() != in) {
    throw std::invalid_argument(
        "backward: forward intermediates do not match parameter dims");
  }

  VaeGradients g = zero_gradients(p);

  // Output head: masked squared error through the sigmoid.
  std::vector<double> delta5(in, 0.0);
  for (std::size_t i = 0; i < in; ++i) {
    if (x.mask[i] == 0) continue;
    const double s = f.x_hat[i];
    delta5[i] = (s - x.x[i]) * s * (1.0 - s);
  }
  add_outer(g.w5, delta5, f.dec_hidden, in, hid);
  g.b5 = delta5;

  // Decoder hidden ReLU.
  std::vector<double> d_hidden(hid, 0.0);
  add_matvec_transposed(p.w5, in, hid, delta5, d_hidden);
  std::vector<double> delta4(hid, 0.0);
  for (std::size_t i = 0; i < hid; ++i) {
    delta4[i] = f.dec_hidden[i] > 0.0 ? d_hidden[i] : 0.0;
  }
  add_outer(g.w4, delta4, f.sample.z, hid, lat);
  g.b4 = delta4;

  // Into the latent: dz from the decoder, then split over the mean and
  // log-variance heads. With eps fixed, z = mu + exp(logvar/2) * eps gives
  // dz/dmu = 1 and dz/dlogvar = eps * exp(logvar/2) / 2.
  std::vector<double> dz(lat, 0.0);
  add_matvec_transposed(p.w4, hid, lat, delta4, dz);

  std::vector<double> delta2(lat, 0.0);
  std::vector<double> delta3(lat, 0.0);
  for (std::size_t j = 0; j < lat; ++j) {
    const double mu = f.enc.mu[j];
    const double lv = f.enc.logvar[j];
    const double sigma = std::exp(0.5 * lv);

    double d_mu = dz[j] + mu;  // recon path + d(KL)/d(mu)
    if (opt.mu_relu && !(mu > 0.0)) d_mu = 0.0;
    delta2[j] = d_mu;

    const double d_lv =
        dz[j] * 0.5 * sigma * f.sample.eps[j] + 0.5 * (std::exp(lv) - 1.0);
    const bool inside = lv > kLogVarMin && lv < kLogVarMax;
    delta3[j] = inside ? d_lv : 0.0;
  }
  add_outer(g.w2, delta2, f.enc.h, lat, hid);
  g.b2 = delta2;
  add_outer(g.w3, delta3, f.enc.h, lat, hid);
  g.b3 = delta3;

  // Encoder hidden ReLU back to the input weights.
  std::vector<double> dh(hid, 0.0);
  add_matvec_transposed(p.w2, lat, hid, delta2, dh);
  add_matvec_transposed(p.w3, lat, hid, delta3, dh);
  std::vector<double> delta1(hid, 0.0);
  for (std::size_t i = 0; i < hid; ++i) {
    delta1[i] = f.enc.h[i] > 0.0 ? dh[i] : 0.0;
  }
  add_outer(g.w1, delta1, x.x, hid, in);
  g.b1 = delta1;

  return g;
}

VaeGradients zero_gradients(const VaeParams& p) {
  VaeGradients g;
  g.w1.assign(p.w1.size(), 0.0);
  g.b1.assign(p.b1.size(), 0.0);
  g.w2.assign(p.w2.size(), 0.0);
  g.b2.assign(p.b2.size(), 0.0);
  g.w3.assign(p.w3.size(), 0.0);
  g.b3.assign(p.b3.size(), 0.0);
  g.w4.assign(p.w4.size(), 0.0);
  g.b4.assign(p.b4.size(), 0.0);
  g.w5.assign(p.w5.size(), 0.0);
  g.b5.assign(p.b5.size(), 0.0);
  return g;
}

namespace {

template <typename Fn>
void for_each_array(VaeGradients& a, const VaeGradients& b, Fn&& fn) {
  fn(a.w1, b.w1);
  fn(a.b1, b.b1);
  fn(a.w2, b.w2);
  fn(a.b2, b.b2);
  fn(a.w3, b.w3);
  fn(a.b3, b.b3);
  fn(a.w4, b.w4);
  fn(a.b4, b.b4);
  fn(a.w5, b.w5);
  fn(a.b5, b.b5);
}

}  // namespace

void accumulate(VaeGradients& acc, const VaeGradients& g) {
  for_each_array(acc, g, [](std::vector<double>& a,
                            const std::vector<double>& b) {
    if (a.size() != b.size()) {
      throw std::invalid_argument("accumulate: gradient shape mismatch");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] += b[i];
    }
  });
}

void scale(VaeGradients& g, double s) {
  for_each_array(g, g, [s](std::vector<double>& a, const std::vector<double>&) {
    for (double& v : a) {
      v *= s;
    }
  });
}

}  // namespace loadvae
