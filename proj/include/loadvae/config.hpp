#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "loadvae/synthetic.hpp"
#include "loadvae/trainer.hpp"

namespace loadvae {

struct LfaSettings {
  std::size_t rank = 8;
  double lr = 0.05;
  double lambda = 0.02;
  std::size_t epochs = 300;
  std::size_t patience = 10;
};

/// One experiment configuration, shared by every command. The dataset is
/// either a manifest on disk or an in-memory synthetic spec, never both.
/// Randomness is pinned by three seeds: `seed_data` drives generation and
/// masking, `seed_split` the train/valid/test partition, and `seed_model`
/// the weight initialization and training-time draws.
struct RunConfig {
  std::optional<std::string> manifest;
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::string> dataset_label;
  double density = 1.0;
  std::uint64_t seed_data = 1;
  std::uint64_t seed_split = 2;
  std::uint64_t seed_model = 3;
  TrainConfig train;
  LfaSettings lfa;
  std::string out_dir = "out";
};

/// Parses and validates a config document. Any violation throws with the
/// offending key path (for example "dataset.synthetic.k"). Unknown keys are
/// rejected so typos cannot silently fall back to defaults. `origin` names
/// the source in messages.
RunConfig parse_run_config(const std::string& text, const std::string& origin);

RunConfig load_run_config(const std::string& path);

/// The effective configuration (defaults resolved) as JSON, embedded in
/// every run summary.
nlohmann::json run_config_json(const RunConfig& cfg);

/// Human-readable dataset tag for reports: the configured label if present,
/// otherwise derived from the manifest name or the synthetic shape plus
/// density.
std::string dataset_label(const RunConfig& cfg);

}  // namespace loadvae
