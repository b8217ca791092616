// Command-line front end: dataset generation and masking, training,
// imputation, evaluation, baseline comparison, and a gradient self-check.
// Every command is deterministic given its configuration; all randomness
// flows from the three named seeds.

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loadvae/baseline.hpp"
#include "loadvae/checkpoint.hpp"
#include "loadvae/config.hpp"
#include "loadvae/csv_io.hpp"
#include "loadvae/gradcheck.hpp"
#include "loadvae/metrics.hpp"
#include "loadvae/rng.hpp"
#include "loadvae/synthetic.hpp"
#include "loadvae/tensor.hpp"
#include "loadvae/trainer.hpp"
#include "loadvae/vae.hpp"

namespace {

using loadvae::EntryIndex;
using loadvae::EntrySplit;
using loadvae::HdiTensor;
using loadvae::RunConfig;
using nlohmann::json;

namespace fs = std::filesystem;

// Stream tag for the masking step, so the data seed can drive both
// generation and masking without reusing a stream.
constexpr std::uint64_t kMaskTag = 7;

struct CliOverrides {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed_data;
  std::optional<std::uint64_t> seed_split;
  std::optional<std::uint64_t> seed_model;
  bool raw = false;
};

RunConfig resolve_config(const CliOverrides& ov) {
  RunConfig cfg = loadvae::load_run_config(ov.config_path);
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.seed_data) cfg.seed_data = *ov.seed_data;
  if (ov.seed_split) cfg.seed_split = *ov.seed_split;
  if (ov.seed_model) cfg.seed_model = *ov.seed_model;
  return cfg;
}

HdiTensor load_base_tensor(const RunConfig& cfg) {
  if (cfg.manifest) {
    return loadvae::load_dataset(*cfg.manifest);
  }
  return loadvae::generate_synthetic(*cfg.synthetic, cfg.seed_data);
}

// The experimental view of the dataset: synthetic data is masked down to the
// configured density in memory (matching what `mask` writes to disk);
// manifest data is taken as stored.
HdiTensor load_experiment_tensor(const RunConfig& cfg) {
  HdiTensor t = load_base_tensor(cfg);
  if (cfg.synthetic && cfg.density < 1.0) {
    t = loadvae::apply_sparsity(t, cfg.density,
                                loadvae::derive_seed(cfg.seed_data, kMaskTag));
  }
  return t;
}

void write_run_summary(const RunConfig& cfg, const std::string& command,
                       json extra) {
  extra["command"] = command;
  extra["format_version"] = 1;
  extra["config"] = loadvae::run_config_json(cfg);
  loadvae::write_file_atomic(
      (fs::path(cfg.out_dir) / "run_summary.json").string(),
      extra.dump(2) + "\n");
}

json report_json(const loadvae::MetricReport& r) {
  return json{{"model", r.model_name},   {"dataset", r.dataset_label},
              {"rmse", r.rmse},          {"mae", r.mae},
              {"n", r.n},                {"scale", r.scale},
              {"positions_hash", r.positions_hash}};
}

void print_report(const loadvae::MetricReport& r) {
  std::cout << r.model_name << " on " << r.dataset_label
            << ": rmse=" << loadvae::format_double(r.rmse)
            << " mae=" << loadvae::format_double(r.mae) << " (n=" << r.n
            << ", " << r.scale << ")\n";
}

void cmd_gen_synth(const CliOverrides& ov) {
  const RunConfig cfg = resolve_config(ov);
  if (!cfg.synthetic) {
    throw std::runtime_error(
        "gen-synth needs a dataset.synthetic block in the config");
  }
  const HdiTensor t = loadvae::generate_synthetic(*cfg.synthetic,
                                                  cfg.seed_data);
  loadvae::write_dataset(cfg.out_dir, t);
  write_run_summary(cfg, "gen-synth",
                    json{{"k", t.k},
                         {"n_days", t.n_days},
                         {"m_slots", t.m_slots},
                         {"observed", t.observed_count()}});
  std::cout << "wrote " << t.k << "x" << t.n_days << "x" << t.m_slots
            << " dataset (" << t.observed_count() << " observed) to "
            << cfg.out_dir << "\n";
}

void cmd_mask(const CliOverrides& ov) {
  const RunConfig cfg = resolve_config(ov);
  const HdiTensor full = load_base_tensor(cfg);
  const std::uint64_t seed = loadvae::derive_seed(cfg.seed_data, kMaskTag);
  const HdiTensor masked = loadvae::apply_sparsity(full, cfg.density, seed);
  loadvae::write_dataset(cfg.out_dir, masked, cfg.density, seed);
  write_run_summary(cfg, "mask",
                    json{{"observed_before", full.observed_count()},
                         {"observed_after", masked.observed_count()}});
  std::cout << "kept " << masked.observed_count() << " of "
            << full.observed_count() << " observed entries at density "
            << loadvae::format_double(cfg.density) << " in " << cfg.out_dir
            << "\n";
}

void cmd_train(const CliOverrides& ov) {
  const RunConfig cfg = resolve_config(ov);
  const HdiTensor norm = loadvae::normalize(load_experiment_tensor(cfg));
  const EntrySplit split = loadvae::split_entries(norm, cfg.seed_split);

  loadvae::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed_model;

  const auto started = std::chrono::steady_clock::now();
  const loadvae::TrainResult result = loadvae::train(norm, split, tc);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);

  fs::create_directories(cfg.out_dir);
  loadvae::write_epoch_csv((fs::path(cfg.out_dir) / "epochs.csv").string(),
                           result.history);
  loadvae::save_vae_checkpoint(
      (fs::path(cfg.out_dir) / "vae.ckpt").string(),
      loadvae::VaeCheckpoint{result.params, result.adam, result.step_count,
                             cfg.seed_model, tc.vae});

  const loadvae::EpochRecord& best = result.history[result.best_epoch - 1];
  write_run_summary(cfg, "train",
                    json{{"epochs_run", result.history.size()},
                         {"best_epoch", result.best_epoch},
                         {"best_valid_rmse", best.valid_rmse},
                         {"best_valid_mae", best.valid_mae},
                         {"adam_steps", result.step_count},
                         {"input_dim", result.params.input_dim},
                         {"train_entries", split.train.size()},
                         {"valid_entries", split.valid.size()},
                         {"test_entries", split.test.size()}});
  std::cout << "trained " << result.history.size() << " epochs in "
            << elapsed.count() << " ms; best epoch " << result.best_epoch
            << " valid rmse " << loadvae::format_double(best.valid_rmse)
            << "\n";
}

void cmd_impute(const CliOverrides& ov, const std::string& ckpt_flag) {
  const RunConfig cfg = resolve_config(ov);
  const std::string ckpt_path =
      ckpt_flag.empty() ? (fs::path(cfg.out_dir) / "vae.ckpt").string()
                        : ckpt_flag;
  const loadvae::VaeCheckpoint ckpt = loadvae::load_vae_checkpoint(ckpt_path);
  const HdiTensor norm = loadvae::normalize(load_experiment_tensor(cfg));

  auto predictions = loadvae::impute(ckpt.params, norm, ckpt.options);
  if (ov.raw) {
    predictions = loadvae::denormalize(norm, predictions);
  }
  fs::create_directories(cfg.out_dir);
  loadvae::write_predictions_csv(
      (fs::path(cfg.out_dir) / "imputed.csv").string(), predictions);
  write_run_summary(cfg, "impute",
                    json{{"checkpoint", ckpt_path},
                         {"predictions", predictions.size()},
                         {"scale", ov.raw ? "raw" : "normalized"}});
  std::cout << "imputed " << predictions.size() << " missing entries to "
            << cfg.out_dir << "/imputed.csv\n";
}

struct EvalSelection {
  std::string vae_path;
  std::string lfa_path;
  bool mean = false;
};

void cmd_eval(const CliOverrides& ov, const EvalSelection& sel) {
  const RunConfig cfg = resolve_config(ov);
  const HdiTensor norm = loadvae::normalize(load_experiment_tensor(cfg));
  const EntrySplit split = loadvae::split_entries(norm, cfg.seed_split);
  const std::string label = loadvae::dataset_label(cfg);

  EvalSelection chosen = sel;
  if (chosen.vae_path.empty() && chosen.lfa_path.empty() && !chosen.mean) {
    chosen.vae_path = (fs::path(cfg.out_dir) / "vae.ckpt").string();
  }

  std::vector<loadvae::MetricReport> reports;
  if (!chosen.vae_path.empty()) {
    const loadvae::VaeCheckpoint ckpt =
        loadvae::load_vae_checkpoint(chosen.vae_path);
    reports.push_back(loadvae::evaluate_model(
        [&](const std::vector<EntryIndex>& pos) {
          return loadvae::predict_at(ckpt.params, norm, pos, ckpt.options);
        },
        norm, split, "vae", label, ov.raw));
  }
  if (!chosen.lfa_path.empty()) {
    const loadvae::LfaCheckpoint ckpt =
        loadvae::load_lfa_checkpoint(chosen.lfa_path);
    if (ckpt.factors.k != norm.k || ckpt.factors.n_days != norm.n_days ||
        ckpt.factors.m_slots != norm.m_slots) {
      throw std::runtime_error("eval: factor checkpoint shape does not match "
                               "the dataset");
    }
    reports.push_back(loadvae::evaluate_model(
        [&](const std::vector<EntryIndex>& pos) {
          return loadvae::lfa_predict(ckpt.factors, pos);
        },
        norm, split, "lfa", label, ov.raw));
  }
  if (chosen.mean) {
    reports.push_back(loadvae::evaluate_model(
        [&](const std::vector<EntryIndex>& pos) {
          return loadvae::mean_impute(norm, split, pos);
        },
        norm, split, "mean", label, ov.raw));
  }

  fs::create_directories(cfg.out_dir);
  loadvae::write_metrics_csv(
      (fs::path(cfg.out_dir) / "metrics.csv").string(), reports);
  json rows = json::array();
  for (const loadvae::MetricReport& r : reports) {
    rows.push_back(report_json(r));
    print_report(r);
  }
  write_run_summary(cfg, "eval", json{{"reports", rows}});
}

void cmd_compare(const CliOverrides& ov) {
  const RunConfig cfg = resolve_config(ov);
  const HdiTensor norm = loadvae::normalize(load_experiment_tensor(cfg));
  const EntrySplit split = loadvae::split_entries(norm, cfg.seed_split);
  const std::string label = loadvae::dataset_label(cfg);

  loadvae::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed_model;
  const loadvae::TrainResult vae = loadvae::train(norm, split, tc);
  const loadvae::FactorMatrices lfa = loadvae::lfa_train(
      norm, split, cfg.lfa.rank, cfg.lfa.lr, cfg.lfa.lambda, cfg.lfa.epochs,
      cfg.seed_model, cfg.lfa.patience);

  std::vector<loadvae::MetricReport> reports;
  reports.push_back(loadvae::evaluate_model(
      [&](const std::vector<EntryIndex>& pos) {
        return loadvae::predict_at(vae.params, norm, pos, tc.vae);
      },
      norm, split, "vae", label, ov.raw));
  reports.push_back(loadvae::evaluate_model(
      [&](const std::vector<EntryIndex>& pos) {
        return loadvae::lfa_predict(lfa, pos);
      },
      norm, split, "lfa", label, ov.raw));
  reports.push_back(loadvae::evaluate_model(
      [&](const std::vector<EntryIndex>& pos) {
        return loadvae::mean_impute(norm, split, pos);
      },
      norm, split, "mean", label, ov.raw));

  fs::create_directories(cfg.out_dir);
  loadvae::save_vae_checkpoint(
      (fs::path(cfg.out_dir) / "vae.ckpt").string(),
      loadvae::VaeCheckpoint{vae.params, vae.adam, vae.step_count,
                             cfg.seed_model, tc.vae});
  loadvae::save_lfa_checkpoint(
      (fs::path(cfg.out_dir) / "lfa.ckpt").string(),
      loadvae::LfaCheckpoint{lfa, cfg.seed_model});
  loadvae::write_metrics_csv(
      (fs::path(cfg.out_dir) / "metrics.csv").string(), reports);

  json improvements;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    improvements[reports[i].model_name] = {
        {"rmse_improvement_pct",
         loadvae::improvement_percent(reports[0].rmse, reports[i].rmse)},
        {"mae_improvement_pct",
         loadvae::improvement_percent(reports[0].mae, reports[i].mae)}};
  }
  json rows = json::array();
  for (const loadvae::MetricReport& r : reports) {
    rows.push_back(report_json(r));
    print_report(r);
  }
  write_run_summary(cfg, "compare",
                    json{{"reports", rows},
                         {"vae_improvement_over", improvements}});
  for (std::size_t i = 1; i < reports.size(); ++i) {
    std::cout << "vae rmse improvement over " << reports[i].model_name
              << ": "
              << loadvae::format_double(loadvae::improvement_percent(
                     reports[0].rmse, reports[i].rmse))
              << "%\n";
  }
}

int cmd_grad_check(int trials, std::uint64_t seed, bool mu_relu,
                   bool corrupt) {
  loadvae::GradCheckSettings settings;
  settings.trials = trials;
  settings.mu_relu = mu_relu;
  settings.corrupt = corrupt;
  const loadvae::GradCheckReport report =
      loadvae::run_gradient_check(seed, settings);
  std::cout << loadvae::format_report(report);
  return report.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Missing-entry imputation for power-load monitoring tensors:\n"
      "a from-scratch variational autoencoder with hand-derived gradients,\n"
      "a matrix-factorization baseline, and a shared evaluation harness."};
  app.require_subcommand(1);

  CliOverrides ov;
  int exit_code = 0;
  std::function<void()> action;

  auto add_common = [&ov](CLI::App* cmd, bool with_raw) {
    cmd->add_option("--config", ov.config_path, "JSON run configuration")
        ->required();
    cmd->add_option("--out", ov.out_dir,
                    "Output directory (overrides the config)");
    cmd->add_option("--seed-data", ov.seed_data,
                    "Dataset generation/masking seed override");
    cmd->add_option("--seed-split", ov.seed_split,
                    "Train/valid/test split seed override");
    cmd->add_option("--seed-model", ov.seed_model,
                    "Model initialization/training seed override");
    if (with_raw) {
      cmd->add_flag("--raw", ov.raw,
                    "Report in raw units instead of normalized");
    }
  };

  CLI::App* gen = app.add_subcommand(
      "gen-synth", "Generate a synthetic dataset as channel CSVs + manifest");
  add_common(gen, false);
  gen->callback([&] { action = [&] { cmd_gen_synth(ov); }; });

  CLI::App* mask = app.add_subcommand(
      "mask", "Hide entries down to the configured density and write the "
              "masked dataset");
  add_common(mask, false);
  mask->callback([&] { action = [&] { cmd_mask(ov); }; });

  CLI::App* train = app.add_subcommand(
      "train", "Train the autoencoder and write checkpoint + epoch log");
  add_common(train, false);
  train->callback([&] { action = [&] { cmd_train(ov); }; });

  CLI::App* impute = app.add_subcommand(
      "impute", "Fill all missing entries from a trained checkpoint");
  add_common(impute, true);
  static std::string impute_ckpt;
  impute->add_option("--checkpoint", impute_ckpt,
                     "Checkpoint path (default: <out>/vae.ckpt)");
  impute->callback([&] { action = [&] { cmd_impute(ov, impute_ckpt); }; });

  CLI::App* eval = app.add_subcommand(
      "eval", "Score trained models on the held-out test entries");
  add_common(eval, true);
  static EvalSelection sel;
  eval->add_option("--vae", sel.vae_path, "Autoencoder checkpoint to score");
  eval->add_option("--lfa", sel.lfa_path, "Factor checkpoint to score");
  eval->add_flag("--mean", sel.mean, "Also score the per-channel mean imputer");
  eval->callback([&] { action = [&] { cmd_eval(ov, sel); }; });

  CLI::App* compare = app.add_subcommand(
      "compare", "Train autoencoder, factor baseline, and mean imputer on "
                 "the same split and compare test metrics");
  add_common(compare, true);
  compare->callback([&] { action = [&] { cmd_compare(ov); }; });

  CLI::App* grad = app.add_subcommand(
      "grad-check", "Verify the analytic gradients against finite "
                    "differences");
  static int gc_trials = 120;
  static std::uint64_t gc_seed = 42;
  static bool gc_mu_relu = false;
  static bool gc_corrupt = false;
  grad->add_option("--trials", gc_trials, "Random triples to test")
      ->check(CLI::PositiveNumber);
  grad->add_option("--seed", gc_seed, "Seed for the random triples");
  grad->add_flag("--mu-relu", gc_mu_relu,
                 "Check the ReLU-mean ablation variant");
  grad->add_flag("--corrupt", gc_corrupt,
                 "Deliberately corrupt one gradient (self-test hook; must "
                 "fail)");
  grad->callback([&] {
    action = [&] {
      exit_code = cmd_grad_check(gc_trials, gc_seed, gc_mu_relu, gc_corrupt);
    };
  });

  CLI11_PARSE(app, argc, argv);
  try {
    action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
