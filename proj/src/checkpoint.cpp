#include "loadvae/checkpoint.hpp"

#include <cstring>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "loadvae/csv_io.hpp"

namespace loadvae {
namespace {

using nlohmann::json;

void append_f64le(std::string& out, const std::vector<double>& values) {
  for (double v : values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int byte = 0; byte < 8; ++byte) {
      out.push_back(static_cast<char>((bits >> (8 * byte)) & 0xffu));
    }
  }
}

class PayloadReader {
 public:
  PayloadReader(const std::string& data, std::size_t offset,
                const std::string& path)
      : data_(data), pos_(offset), path_(path) {}

  std::vector<double> take(std::size_t count) {
    if (pos_ + 8 * count > data_.size()) {
      throw std::runtime_error("checkpoint " + path_ +
                               ": payload shorter than the header promises");
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits = 0;
      for (int byte = 0; byte < 8; ++byte) {
        bits |= static_cast<std::uint64_t>(
                    static_cast<unsigned char>(data_[pos_++]))
                << (8 * byte);
      }
      std::memcpy(&out[i], &bits, sizeof(double));
    }
    return out;
  }

  void expect_end() const {
    if (pos_ != data_.size()) {
      throw std::runtime_error("checkpoint " + path_ +
                               ": trailing bytes after the payload");
    }
  }

 private:
  const std::string& data_;
  std::size_t pos_;
  std::string path_;
};

json parse_header(const std::string& data, const std::string& path,
                  std::size_t& payload_offset) {
  const std::size_t newline = data.find('\n');
  if (newline == std::string::npos) {
    throw std::runtime_error("checkpoint " + path + ": missing header line");
  }
  payload_offset = newline + 1;
  json header = json::parse(data.substr(0, newline), nullptr,
                            /*allow_exceptions=*/false);
  if (header.is_discarded()) {
    throw std::runtime_error("checkpoint " + path + ": header is not JSON");
  }
  return header;
}

void check_version(const json& header, const std::string& path,
                   const char* format) {
  if (header.value("format", "") != format) {
    throw std::runtime_error("checkpoint " + path +
                             ": unexpected format field");
  }
  const int version = header.value("version", -1);
  if (version != kCheckpointVersion) {
    throw std::runtime_error(
        "checkpoint " + path + ": version " + std::to_string(version) +
        " not supported (expected " + std::to_string(kCheckpointVersion) +
        ")");
  }
}

}  // namespace

void save_vae_checkpoint(const std::string& path, const VaeCheckpoint& ckpt) {
  const VaeParams& p = ckpt.params;
  json header = {
      {"format", "loadvae-vae"},
      {"version", kCheckpointVersion},
      {"input_dim", p.input_dim},
      {"hidden_dim", p.hidden_dim},
      {"latent_dim", p.latent_dim},
      {"seed", ckpt.seed},
      {"step_count", ckpt.step_count},
      {"logvar_clamp", {kLogVarMin, kLogVarMax}},
      {"mu_relu", ckpt.options.mu_relu},
  };
  std::string out = header.dump();
  out.push_back('\n');
  for (const std::vector<double>* arr :
       {&p.w1, &p.b1, &p.w2, &p.b2, &p.w3, &p.b3, &p.w4, &p.b4, &p.w5,
        &p.b5}) {
    append_f64le(out, *arr);
  }
  for (const VaeGradients* moments : {&ckpt.adam.m, &ckpt.adam.v}) {
    for (const std::vector<double>* arr :
         {&moments->w1, &moments->b1, &moments->w2, &moments->b2,
          &moments->w3, &moments->b3, &moments->w4, &moments->b4,
          &moments->w5, &moments->b5}) {
      append_f64le(out, *arr);
    }
  }
  write_file_atomic(path, out);
}

VaeCheckpoint load_vae_checkpoint(const std::string& path) {
  const std::string data = read_text_file(path);
  std::size_t offset = 0;
  const json header = parse_header(data, path, offset);
  check_version(header, path, "loadvae-vae");

  VaeCheckpoint ckpt;
  VaeParams& p = ckpt.params;
  p.input_dim = header.value("input_dim", std::size_t{0});
  p.hidden_dim = header.value("hidden_dim", std::size_t{0});
  p.latent_dim = header.value("latent_dim", std::size_t{0});
  if (p.input_dim == 0 || p.hidden_dim == 0 || p.latent_dim == 0) {
    throw std::runtime_error("checkpoint " + path + ": bad dimensions");
  }
  ckpt.seed = header.value("seed", std::uint64_t{0});
  ckpt.step_count = header.value("step_count", std::size_t{0});
  ckpt.options.mu_relu = header.value("mu_relu", false);

  PayloadReader reader(data, offset, path);
  const std::size_t in = p.input_dim;
  const std::size_t hid = p.hidden_dim;
  const std::size_t lat = p.latent_dim;
  auto take_params = [&reader, in, hid, lat](auto& target) {
    target.w1 = reader.take(hid * in);
    target.b1 = reader.take(hid);
    target.w2 = reader.take(lat * hid);
    target.b2 = reader.take(lat);
    target.w3 = reader.take(lat * hid);
    target.b3 = reader.take(lat);
    target.w4 = reader.take(hid * lat);
    target.b4 = reader.take(hid);
    target.w5 = reader.take(in * hid);
    target.b5 = reader.take(in);
  };
  take_params(p);
  take_params(ckpt.adam.m);
  take_params(ckpt.adam.v);
  reader.expect_end();
  return ckpt;
}

void save_lfa_checkpoint(const std::string& path, const LfaCheckpoint& ckpt) {
  const FactorMatrices& f = ckpt.factors;
  json header = {
      {"format", "loadvae-lfa"},
      {"version", kCheckpointVersion},
      {"k", f.k},
      {"n_days", f.n_days},
      {"m_slots", f.m_slots},
      {"rank", f.rank},
      {"seed", ckpt.seed},
  };
  std::string out = header.dump();
  out.push_back('\n');
  append_f64le(out, f.p);
  append_f64le(out, f.q);
  write_file_atomic(path, out);
}

LfaCheckpoint load_lfa_checkpoint(const std::string& path) {
  const std::string data = read_text_file(path);
  std::size_t offset = 0;
  const json header = parse_header(data, path, offset);
  check_version(header, path, "loadvae-lfa");

  LfaCheckpoint ckpt;
  FactorMatrices& f = ckpt.factors;
  f.k = header.value("k", std::size_t{0});
  f.n_days = header.value("n_days", std::size_t{0});
  f.m_slots = header.value("m_slots", std::size_t{0});
  f.rank = header.value("rank", std::size_t{0});
  if (f.k == 0 || f.n_days == 0 || f.m_slots == 0 || f.rank == 0) {
    throw std::runtime_error("checkpoint " + path + ": bad dimensions");
  }
  ckpt.seed = header.value("seed", std::uint64_t{0});

  PayloadReader reader(data, offset, path);
  f.p = reader.take(f.rows() * f.rank);
  f.q = reader.take(f.m_slots * f.rank);
  reader.expect_end();
  return ckpt;
}

}  // namespace loadvae
