#include "loadvae/config.hpp"

#include <filesystem>
#include <stdexcept>

#include "loadvae/csv_io.hpp"

namespace loadvae {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& what) {
  throw std::runtime_error("config " + origin + ": " + path + ": " + what);
}

void require_object(const json& j, const std::string& origin,
                    const std::string& path) {
  if (!j.is_object()) {
    fail(origin, path, "must be an object");
  }
}

void reject_unknown_keys(const json& j, const std::string& origin,
                         const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail(origin, path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

double get_double(const json& j, const std::string& origin,
                  const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_number()) fail(origin, path + "." + key, "must be a number");
  return v.get<double>();
}

std::size_t get_size(const json& j, const std::string& origin,
                     const std::string& path, const char* key,
                     std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_number_unsigned()) {
    fail(origin, path + "." + key, "must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& j, const std::string& origin,
                       const std::string& path, const char* key,
                       std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_number_unsigned()) {
    fail(origin, path + "." + key, "must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& origin,
              const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_boolean()) fail(origin, path + "." + key, "must be a boolean");
  return v.get<bool>();
}

SyntheticSpec parse_synthetic(const json& j, const std::string& origin) {
  const std::string path = "dataset.synthetic";
  require_object(j, origin, path);
  reject_unknown_keys(j, origin, path,
                      {"k", "n_days", "m_slots", "channels"});
  const std::size_t k = get_size(j, origin, path, "k", 0);
  const std::size_t n_days = get_size(j, origin, path, "n_days", 0);
  const std::size_t m_slots = get_size(j, origin, path, "m_slots", 0);
  if (k == 0 || n_days == 0 || m_slots == 0) {
    fail(origin, path, "'k', 'n_days' and 'm_slots' must be positive");
  }
  SyntheticSpec spec = default_synthetic_spec(k, n_days, m_slots);
  if (j.contains("channels")) {
    const json& chans = j["channels"];
    if (!chans.is_array() || chans.size() != k) {
      fail(origin, path + ".channels", "must be an array of length k");
    }
    for (std::size_t c = 0; c < k; ++c) {
      const json& ch = chans[c];
      const std::string cpath = path + ".channels[" + std::to_string(c) + "]";
      require_object(ch, origin, cpath);
      reject_unknown_keys(ch, origin, cpath,
                          {"base", "daily_amplitude", "weekly_amplitude",
                           "noise_sigma"});
      SyntheticChannel& out = spec.channels[c];
      out.base = get_double(ch, origin, cpath, "base", out.base);
      out.daily_amplitude =
          get_double(ch, origin, cpath, "daily_amplitude",
                     out.daily_amplitude);
      out.weekly_amplitude =
          get_double(ch, origin, cpath, "weekly_amplitude",
                     out.weekly_amplitude);
      out.noise_sigma =
          get_double(ch, origin, cpath, "noise_sigma", out.noise_sigma);
      if (out.noise_sigma < 0.0) {
        fail(origin, cpath + ".noise_sigma", "must be nonnegative");
      }
    }
  }
  return spec;
}

}  // namespace

RunConfig parse_run_config(const std::string& text,
                           const std::string& origin) {
  const json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw std::runtime_error("config " + origin + ": not valid JSON");
  }
  require_object(j, origin, "(root)");
  reject_unknown_keys(j, origin, "",
                      {"dataset", "density", "seeds", "train", "lfa",
                       "out_dir"});

  RunConfig cfg;

  if (!j.contains("dataset")) {
    fail(origin, "dataset", "is required");
  }
  const json& ds = j["dataset"];
  require_object(ds, origin, "dataset");
  reject_unknown_keys(ds, origin, "dataset",
                      {"manifest", "synthetic", "label"});
  const bool has_manifest = ds.contains("manifest");
  const bool has_synth = ds.contains("synthetic");
  if (has_manifest == has_synth) {
    fail(origin, "dataset",
         "exactly one of 'manifest' or 'synthetic' must be present");
  }
  if (has_manifest) {
    if (!ds["manifest"].is_string()) {
      fail(origin, "dataset.manifest", "must be a string path");
    }
    cfg.manifest = ds["manifest"].get<std::string>();
  } else {
    cfg.synthetic = parse_synthetic(ds["synthetic"], origin);
  }
  if (ds.contains("label")) {
    if (!ds["label"].is_string()) {
      fail(origin, "dataset.label", "must be a string");
    }
    cfg.dataset_label = ds["label"].get<std::string>();
  }

  cfg.density = get_double(j, origin, "", "density", cfg.density);
  if (!(cfg.density > 0.0) || cfg.density > 1.0) {
    fail(origin, "density", "must be in (0, 1]");
  }

  if (j.contains("seeds")) {
    const json& seeds = j["seeds"];
    require_object(seeds, origin, "seeds");
    reject_unknown_keys(seeds, origin, "seeds", {"data", "split", "model"});
    cfg.seed_data = get_seed(seeds, origin, "seeds", "data", cfg.seed_data);
    cfg.seed_split =
        get_seed(seeds, origin, "seeds", "split", cfg.seed_split);
    cfg.seed_model =
        get_seed(seeds, origin, "seeds", "model", cfg.seed_model);
  }

  if (j.contains("train")) {
    const json& tr = j["train"];
    require_object(tr, origin, "train");
    reject_unknown_keys(tr, origin, "train",
                        {"hidden_dim", "latent_dim", "epochs_max",
                         "batch_size", "lr", "beta1", "beta2", "eps_adam",
                         "patience", "mu_relu"});
    TrainConfig& t = cfg.train;
    t.hidden_dim = get_size(tr, origin, "train", "hidden_dim", t.hidden_dim);
    t.latent_dim = get_size(tr, origin, "train", "latent_dim", t.latent_dim);
    t.epochs_max = get_size(tr, origin, "train", "epochs_max", t.epochs_max);
    t.batch_size = get_size(tr, origin, "train", "batch_size", t.batch_size);
    t.lr = get_double(tr, origin, "train", "lr", t.lr);
    t.beta1 = get_double(tr, origin, "train", "beta1", t.beta1);
    t.beta2 = get_double(tr, origin, "train", "beta2", t.beta2);
    t.eps_adam = get_double(tr, origin, "train", "eps_adam", t.eps_adam);
    t.patience = get_size(tr, origin, "train", "patience", t.patience);
    t.vae.mu_relu = get_bool(tr, origin, "train", "mu_relu", t.vae.mu_relu);
    if (t.hidden_dim == 0 || t.latent_dim == 0 || t.epochs_max == 0 ||
        t.batch_size == 0) {
      fail(origin, "train", "dims, epochs_max and batch_size must be positive");
    }
    if (!(t.lr > 0.0)) fail(origin, "train.lr", "must be positive");
  }

  if (j.contains("lfa")) {
    const json& lf = j["lfa"];
    require_object(lf, origin, "lfa");
    reject_unknown_keys(lf, origin, "lfa",
                        {"rank", "lr", "lambda", "epochs", "patience"});
    LfaSettings& l = cfg.lfa;
    l.rank = get_size(lf, origin, "lfa", "rank", l.rank);
    l.lr = get_double(lf, origin, "lfa", "lr", l.lr);
    l.lambda = get_double(lf, origin, "lfa", "lambda", l.lambda);
    l.epochs = get_size(lf, origin, "lfa", "epochs", l.epochs);
    l.patience = get_size(lf, origin, "lfa", "patience", l.patience);
    if (l.rank == 0 || l.epochs == 0) {
      fail(origin, "lfa", "rank and epochs must be positive");
    }
    if (!(l.lr > 0.0)) fail(origin, "lfa.lr", "must be positive");
    if (l.lambda < 0.0) fail(origin, "lfa.lambda", "must be nonnegative");
  }

  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) {
      fail(origin, "out_dir", "must be a string path");
    }
    cfg.out_dir = j["out_dir"].get<std::string>();
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text_file(path), path);
}

nlohmann::json run_config_json(const RunConfig& cfg) {
  json dataset;
  if (cfg.manifest) {
    dataset["manifest"] = *cfg.manifest;
  } else if (cfg.synthetic) {
    json channels = json::array();
    for (const SyntheticChannel& ch : cfg.synthetic->channels) {
      channels.push_back({{"base", ch.base},
                          {"daily_amplitude", ch.daily_amplitude},
                          {"weekly_amplitude", ch.weekly_amplitude},
                          {"noise_sigma", ch.noise_sigma}});
    }
    dataset["synthetic"] = {{"k", cfg.synthetic->channels.size()},
                            {"n_days", cfg.synthetic->n_days},
                            {"m_slots", cfg.synthetic->m_slots},
                            {"channels", channels}};
  }
  if (cfg.dataset_label) dataset["label"] = *cfg.dataset_label;

  return json{
      {"dataset", dataset},
      {"density", cfg.density},
      {"seeds",
       {{"data", cfg.seed_data},
        {"split", cfg.seed_split},
        {"model", cfg.seed_model}}},
      {"train",
       {{"hidden_dim", cfg.train.hidden_dim},
        {"latent_dim", cfg.train.latent_dim},
        {"epochs_max", cfg.train.epochs_max},
        {"batch_size", cfg.train.batch_size},
        {"lr", cfg.train.lr},
        {"beta1", cfg.train.beta1},
        {"beta2", cfg.train.beta2},
        {"eps_adam", cfg.train.eps_adam},
        {"patience", cfg.train.patience},
        {"mu_relu", cfg.train.vae.mu_relu}}},
      {"lfa",
       {{"rank", cfg.lfa.rank},
        {"lr", cfg.lfa.lr},
        {"lambda", cfg.lfa.lambda},
        {"epochs", cfg.lfa.epochs},
        {"patience", cfg.lfa.patience}}},
      {"out_dir", cfg.out_dir},
  };
}

std::string dataset_label(const RunConfig& cfg) {
  if (cfg.dataset_label) return *cfg.dataset_label;
  if (cfg.manifest) {
    return std::filesystem::path(*cfg.manifest).stem().string();
  }
  const SyntheticSpec& s = *cfg.synthetic;
  std::string label = "synthetic-k" + std::to_string(s.channels.size()) +
                      "n" + std::to_string(s.n_days) + "m" +
                      std::to_string(s.m_slots);
  if (cfg.density < 1.0) {
    label += "-d" + format_double(cfg.density);
  }
  return label;
}

}  // namespace loadvae
