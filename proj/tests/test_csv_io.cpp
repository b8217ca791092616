#include <doctest.h>
#include <loadvae/csv_io.hpp>
#include <loadvae/rng.hpp>
#include <loadvae/synthetic.hpp>

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "test_support.hpp"

using namespace loadvae;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("csv: double formatting round-trips bitwise") {
  const double cases[] = {0.0,       -0.0,    1.0,        -5.5,
                          0.1,       1.0 / 3, 1e-300,     8.25e300,
                          86400.0,   5e-324,  0.1 + 0.2,  -1e-15};
  for (double v : cases) {
    CAPTURE(v);
    const double back = parse_double(format_double(v), "test");
    CHECK(testsup::bits_equal(back, v));
  }

  Rng rng(123);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.gaussian() * std::pow(10.0, rng.uniform(-20.0, 20.0));
    const double back = parse_double(format_double(v), "test");
    CHECK(testsup::bits_equal(back, v));
  }
}

TEST_CASE("csv: strict parsing rejects anything but a finite float") {
  CHECK(parse_double("42", "t") == 42.0);
  CHECK(parse_double("-0.5e2", "t") == -50.0);
  for (const char* bad : {"", "abc", "1.2.3", "1.2x", " 1.2", "1.2 ", "nan",
                          "inf", "-inf", "1e999", "0x10", "++1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_double(bad, "t"), std::runtime_error);
  }
  // The context string must surface in the diagnostic.
  CHECK(testsup::contains(testsup::thrown_message<std::runtime_error>(
                              [] { parse_double("zz", "row 3"); }),
                          "row 3"));
}

TEST_CASE("csv: channel files round-trip values and the missing set") {
  TempDir dir("loadvae_csv_chan");
  ChannelMatrix ch;
  ch.n_days = 3;
  ch.m_slots = 4;
  ch.values = {1.5, 0.0, 2.25, 1.0 / 3,  //
               0.0, 7.5, 0.0,  0.125,    //
               9.0, 0.0, -2.5, 1e-5};
  ch.observed = {1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 1};

  const std::string path = dir.file("ch.csv");
  write_channel_csv(path, ch);
  ChannelMatrix back = read_channel_csv(path);

  CHECK(back.n_days == 3);
  CHECK(back.m_slots == 4);
  CHECK(back.observed == ch.observed);
  for (std::size_t i = 0; i < ch.values.size(); ++i) {
    if (ch.observed[i] == 0) {
      CHECK(back.values[i] == 0.0);
    } else {
      CHECK(testsup::bits_equal(back.values[i], ch.values[i]));
    }
  }

  // write -> read -> write is byte stable.
  const std::string again = dir.file("ch2.csv");
  write_channel_csv(again, back);
  CHECK(read_text_file(path) == read_text_file(again));
}

TEST_CASE("csv: the literal NaN marks a missing entry") {
  TempDir dir("loadvae_csv_nan");
  const std::string path = dir.file("ch.csv");
  write_file_atomic(path, "1.5,NaN,2.5\nNaN,,3.5\n");
  ChannelMatrix ch = read_channel_csv(path);
  CHECK(ch.n_days == 2);
  CHECK(ch.m_slots == 3);
  CHECK(ch.observed == std::vector<std::uint8_t>{1, 0, 1, 0, 0, 1});
  CHECK(ch.values[0] == 1.5);
  CHECK(ch.values[1] == 0.0);
  CHECK(ch.values[5] == 3.5);

  // Lowercase nan is not the missing marker, and not a parseable value.
  write_file_atomic(path, "1.5,nan\n");
  CHECK_THROWS_AS(read_channel_csv(path), std::runtime_error);
}

TEST_CASE("csv: channel reader rejects ragged and empty files") {
  TempDir dir("loadvae_csv_badchan");
  const std::string path = dir.file("ch.csv");

  write_file_atomic(path, "1,2,3\n4,5\n");
  CHECK(testsup::contains(testsup::thrown_message<std::runtime_error>(
                              [&] { read_channel_csv(path); }),
                          "columns"));

  write_file_atomic(path, "");
  CHECK_THROWS_AS(read_channel_csv(path), std::runtime_error);

  CHECK_THROWS_AS(read_channel_csv(dir.file("missing.csv")),
                  std::runtime_error);
}

TEST_CASE("csv: windows line endings are tolerated") {
  TempDir dir("loadvae_csv_crlf");
  const std::string path = dir.file("ch.csv");
  write_file_atomic(path, "1.5,2.5\r\n3.5,4.5\r\n");
  ChannelMatrix ch = read_channel_csv(path);
  CHECK(ch.n_days == 2);
  CHECK(ch.m_slots == 2);
  CHECK(ch.values[3] == 4.5);
}

TEST_CASE("csv: manifest round trip") {
  TempDir dir("loadvae_csv_manifest");
  DatasetManifest m;
  m.channels = {"a.csv", "b.csv"};
  m.n_days = 21;
  m.m_slots = 86400;
  m.density = 0.05;
  m.mask_seed = 7;

  const std::string path = dir.file("manifest.json");
  write_manifest(path, m);
  DatasetManifest back = read_manifest(path);
  CHECK(back.channels == m.channels);
  CHECK(back.n_days == 21);
  CHECK(back.m_slots == 86400);
  REQUIRE(back.density.has_value());
  CHECK(*back.density == 0.05);
  REQUIRE(back.mask_seed.has_value());
  CHECK(*back.mask_seed == 7);

  // The optional fields really are optional.
  DatasetManifest bare;
  bare.channels = {"c.csv"};
  bare.n_days = 2;
  bare.m_slots = 3;
  write_manifest(path, bare);
  DatasetManifest bare_back = read_manifest(path);
  CHECK_FALSE(bare_back.density.has_value());
  CHECK_FALSE(bare_back.mask_seed.has_value());
}

TEST_CASE("csv: manifest validation") {
  TempDir dir("loadvae_csv_badmanifest");
  const std::string path = dir.file("manifest.json");

  write_file_atomic(path, "[1,2,3]\n");
  CHECK_THROWS_AS(read_manifest(path), std::runtime_error);

  write_file_atomic(path, "{\"n_days\": 2, \"m_slots\": 3}\n");
  CHECK(testsup::contains(testsup::thrown_message<std::runtime_error>(
                              [&] { read_manifest(path); }),
                          "channels"));

  write_file_atomic(path, "{\"channels\": [\"a.csv\"], \"n_days\": -2, "
                          "\"m_slots\": 3}\n");
  CHECK_THROWS_AS(read_manifest(path), std::runtime_error);

  write_file_atomic(path, "not json\n");
  CHECK_THROWS_AS(read_manifest(path), std::runtime_error);
}

TEST_CASE("csv: dataset write and load is a bitwise identity") {
  TempDir dir("loadvae_csv_dataset");
  HdiTensor t = generate_synthetic(3, 5, 16, 77);
  // Punch holes so the missing set is nontrivial.
  HdiTensor sparse = apply_sparsity(t, 0.6, 78);

  write_dataset(dir.path.string(), sparse, 0.6, 78);
  HdiTensor back = load_dataset(dir.file("manifest.json"));

  CHECK(back.k == sparse.k);
  CHECK(back.n_days == sparse.n_days);
  CHECK(back.m_slots == sparse.m_slots);
  CHECK(back.observed == sparse.observed);
  CHECK(testsup::bits_equal(back.values, sparse.values));
  CHECK_FALSE(back.normalized());

  DatasetManifest m = read_manifest(dir.file("manifest.json"));
  REQUIRE(m.density.has_value());
  CHECK(*m.density == 0.6);
  REQUIRE(m.mask_seed.has_value());
  CHECK(*m.mask_seed == 78);
}

TEST_CASE("csv: dataset loader cross-checks dimensions against the manifest") {
  TempDir dir("loadvae_csv_dims");
  HdiTensor t = generate_synthetic(1, 4, 6, 80);
  write_dataset(dir.path.string(), t);

  // Claim a different day count than the channel file carries.
  DatasetManifest m = read_manifest(dir.file("manifest.json"));
  m.n_days = 5;
  write_manifest(dir.file("manifest.json"), m);
  CHECK(testsup::contains(testsup::thrown_message<std::runtime_error>(
                              [&] { load_dataset(dir.file("manifest.json")); }),
                          "manifest says"));
}

TEST_CASE("csv: training log format is pinned") {
  TempDir dir("loadvae_csv_epochs");
  std::vector<EpochRecord> records(2);
  records[0].epoch = 1;
  records[0].train_loss = 0.5;
  records[0].valid_rmse = 0.25;
  records[0].valid_mae = 0.125;
  records[1].epoch = 2;
  records[1].train_loss = 0.375;
  records[1].valid_rmse = 0.2;
  records[1].valid_mae = 0.1;

  const std::string path = dir.file("epochs.csv");
  write_epoch_csv(path, records);
  CHECK(read_text_file(path) ==
        "epoch,train_loss,valid_rmse,valid_mae,wall_ms\n"
        "1,0.5,0.25,0.125,0\n"
        "2,0.375,0.2,0.1,0\n");
}

TEST_CASE("csv: predictions format is pinned") {
  TempDir dir("loadvae_csv_preds");
  const std::string path = dir.file("preds.csv");
  write_predictions_csv(path, {{EntryIndex{0, 3, 17}, 0.5},
                               {EntryIndex{2, 0, 86399}, 0.0625}});
  CHECK(read_text_file(path) == "channel,day,slot,value\n"
                                "0,3,17,0.5\n"
                                "2,0,86399,0.0625\n");
}

TEST_CASE("csv: metric table format is pinned") {
  TempDir dir("loadvae_csv_metrics");
  MetricReport a;
  a.model_name = "vae";
  a.dataset_label = "synthetic-k3";
  a.rmse = 0.138;
  a.mae = 0.1;
  a.n = 544320;
  a.scale = "normalized";
  MetricReport b = a;
  b.model_name = "mean";
  b.rmse = 0.25;

  const std::string path = dir.file("metrics.csv");
  write_metrics_csv(path, {a, b});
  CHECK(read_text_file(path) ==
        "model,dataset,rmse,mae,n,scale\n"
        "vae,synthetic-k3,0.138,0.1,544320,normalized\n"
        "mean,synthetic-k3,0.25,0.1,544320,normalized\n");
}

TEST_CASE("csv: atomic writes replace, never append") {
  TempDir dir("loadvae_csv_atomic");
  const std::string path = dir.file("f.txt");
  write_file_atomic(path, "first version, longer than the second\n");
  write_file_atomic(path, "second\n");
  CHECK(read_text_file(path) == "second\n");
  CHECK_FALSE(fs::exists(path + ".tmp"));
}
