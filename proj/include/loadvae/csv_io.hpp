#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "loadvae/metrics.hpp"
#include "loadvae/tensor.hpp"
#include "loadvae/trainer.hpp"

namespace loadvae {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Strict parse of a finite decimal float; the whole field must be consumed.
/// `context` names the location for the error message.
double parse_double(std::string_view text, const std::string& context);

std::string read_text_file(const std::string& path);

/// Writes through a temp file and renames, so aborts never leave a partial
/// artifact behind.
void write_file_atomic(const std::string& path, const std::string& content);

/// Channel files are headerless CSV, one row per day and one column per
/// slot, '\n' line endings. A missing entry is an empty field or the
/// literal `NaN`.
void write_channel_csv(const std::string& path, const ChannelMatrix& ch);
ChannelMatrix read_channel_csv(const std::string& path);

/// Dataset manifest: channel file names (resolved relative to the manifest's
/// directory), shared dimensions, and optional masking metadata.
struct DatasetManifest {
  std::vector<std::string> channels;
  std::size_t n_days = 0;
  std::size_t m_slots = 0;
  std::optional<double> density;
  std::optional<std::uint64_t> mask_seed;
};

void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

/// Reads the manifest and its channel files into one tensor, validating the
/// dimensions of every file against the manifest.
HdiTensor load_dataset(const std::string& manifest_path);

/// Writes channel_<c>.csv files plus manifest.json under `dir` (created if
/// needed), carrying the optional masking metadata.
void write_dataset(const std::string& dir, const HdiTensor& t,
                   std::optional<double> density = std::nullopt,
                   std::optional<std::uint64_t> mask_seed = std::nullopt);

void write_epoch_csv(const std::string& path,
                     const std::vector<EpochRecord>& records);

void write_predictions_csv(
    const std::string& path,
    const std::vector<std::pair<EntryIndex, double>>& predictions);

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricReport>& reports);

}  // namespace loadvae
