#include "loadvae/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace loadvae {
namespace {

using nlohmann::json;

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    lines.push_back(line);
  }
  return lines;
}

// Splits on commas, keeping empty fields.
std::vector<std::string_view> split_fields(const std::string& line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.emplace_back(line.data() + start, line.size() - start);
      return fields;
    }
    fields.emplace_back(line.data() + start, comma - start);
    start = comma + 1;
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(value)) {
    throw std::runtime_error(context + ": not a finite decimal float: '" +
                             std::string(text) + "'");
  }
  return value;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw std::runtime_error("write failed for " + tmp);
    }
  }
  fs::rename(tmp, path);
}

void write_channel_csv(const std::string& path, const ChannelMatrix& ch) {
  std::string out;
  out.reserve(ch.values.size() * 8);
  for (std::size_t n = 0; n < ch.n_days; ++n) {
    for (std::size_t m = 0; m < ch.m_slots; ++m) {
      if (m > 0) out.push_back(',');
      const std::size_t i = n * ch.m_slots + m;
      if (ch.observed[i] != 0) {
        out += format_double(ch.values[i]);
      }
    }
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

ChannelMatrix read_channel_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) {
    throw std::runtime_error("channel file " + path + " is empty");
  }
  ChannelMatrix ch;
  ch.n_days = lines.size();
  ch.m_slots = split_fields(lines.front()).size();
  ch.values.assign(ch.n_days * ch.m_slots, 0.0);
  ch.observed.assign(ch.n_days * ch.m_slots, 0);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto fields = split_fields(lines[n]);
    if (fields.size() != ch.m_slots) {
      throw std::runtime_error(
          "channel file " + path + ": row " + std::to_string(n) + " has " +
          std::to_string(fields.size()) + " columns, expected " +
          std::to_string(ch.m_slots));
    }
    for (std::size_t m = 0; m < fields.size(); ++m) {
      const std::string_view f = fields[m];
      if (f.empty() || f == "NaN") continue;
      const std::size_t i = n * ch.m_slots + m;
      ch.values[i] = parse_double(
          f, path + ": row " + std::to_string(n) + ", column " +
                 std::to_string(m));
      ch.observed[i] = 1;
    }
  }
  return ch;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  json j = {
      {"channels", m.channels},
      {"n_days", m.n_days},
      {"m_slots", m.m_slots},
  };
  if (m.density) j["density"] = *m.density;
  if (m.mask_seed) j["mask_seed"] = *m.mask_seed;
  write_file_atomic(path, j.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::string& path) {
  const json j = json::parse(read_text_file(path), nullptr,
                             /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::runtime_error("manifest " + path + " is not a JSON object");
  }
  DatasetManifest m;
  if (!j.contains("channels") || !j["channels"].is_array() ||
      j["channels"].empty()) {
    throw std::runtime_error("manifest " + path +
                             ": 'channels' must be a nonempty array");
  }
  for (const json& c : j["channels"]) {
    if (!c.is_string()) {
      throw std::runtime_error("manifest " + path +
                               ": 'channels' entries must be strings");
    }
    m.channels.push_back(c.get<std::string>());
  }
  if (!j.contains("n_days") || !j["n_days"].is_number_unsigned() ||
      !j.contains("m_slots") || !j["m_slots"].is_number_unsigned()) {
    throw std::runtime_error(
        "manifest " + path +
        ": 'n_days' and 'm_slots' must be nonnegative integers");
  }
  m.n_days = j["n_days"].get<std::size_t>();
  m.m_slots = j["m_slots"].get<std::size_t>();
  if (j.contains("density")) m.density = j["density"].get<double>();
  if (j.contains("mask_seed")) {
    m.mask_seed = j["mask_seed"].get<std::uint64_t>();
  }
  return m;
}

HdiTensor load_dataset(const std::string& manifest_path) {
  const DatasetManifest m = read_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<ChannelMatrix> channels;
  channels.reserve(m.channels.size());
  for (const std::string& name : m.channels) {
    const fs::path p = fs::path(name).is_absolute() ? fs::path(name)
                                                    : base / name;
    ChannelMatrix ch = read_channel_csv(p.string());
    if (ch.n_days != m.n_days || ch.m_slots != m.m_slots) {
      throw std::runtime_error(
          "channel file " + p.string() + " is " + std::to_string(ch.n_days) +
          "x" + std::to_string(ch.m_slots) + ", manifest says " +
          std::to_string(m.n_days) + "x" + std::to_string(m.m_slots));
    }
    channels.push_back(std::move(ch));
  }
  return build_tensor(channels);
}

void write_dataset(const std::string& dir, const HdiTensor& t,
                   std::optional<double> density,
                   std::optional<std::uint64_t> mask_seed) {
  fs::create_directories(dir);
  DatasetManifest m;
  m.n_days = t.n_days;
  m.m_slots = t.m_slots;
  m.density = density;
  m.mask_seed = mask_seed;
  const std::size_t per_channel = t.n_days * t.m_slots;
  for (std::size_t c = 0; c < t.k; ++c) {
    ChannelMatrix ch;
    ch.n_days = t.n_days;
    ch.m_slots = t.m_slots;
    const auto begin = c * per_channel;
    ch.values.assign(t.values.begin() + begin,
                     t.values.begin() + begin + per_channel);
    ch.observed.assign(t.observed.begin() + begin,
                       t.observed.begin() + begin + per_channel);
    const std::string name = "channel_" + std::to_string(c) + ".csv";
    write_channel_csv((fs::path(dir) / name).string(), ch);
    m.channels.push_back(name);
  }
  write_manifest((fs::path(dir) / "manifest.json").string(), m);
}

void write_epoch_csv(const std::string& path,
                     const std::vector<EpochRecord>& records) {
  std::string out = "epoch,train_loss,valid_rmse,valid_mae,wall_ms\n";
  for (const EpochRecord& r : records) {
    out += std::to_string(r.epoch);
    out.push_back(',');
    out += format_double(r.train_loss);
    out.push_back(',');
    out += format_double(r.valid_rmse);
    out.push_back(',');
    out += format_double(r.valid_mae);
    out.push_back(',');
    out += std::to_string(r.wall_ms);
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

void write_predictions_csv(
    const std::string& path,
    const std::vector<std::pair<EntryIndex, double>>& predictions) {
  std::string out = "channel,day,slot,value\n";
  for (const auto& [e, value] : predictions) {
    out += std::to_string(e.channel);
    out.push_back(',');
    out += std::to_string(e.day);
    out.push_back(',');
    out += std::to_string(e.slot);
    out.push_back(',');
    out += format_double(value);
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricReport>& reports) {
  std::string out = "model,dataset,rmse,mae,n,scale\n";
  for (const MetricReport& r : reports) {
    out += r.model_name;
    out.push_back(',');
    out += r.dataset_label;
    out.push_back(',');
    out += format_double(r.rmse);
    out.push_back(',');
    out += format_double(r.mae);
    out.push_back(',');
    out += std::to_string(r.n);
    out.push_back(',');
    out += r.scale;
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

}  // namespace loadvae
