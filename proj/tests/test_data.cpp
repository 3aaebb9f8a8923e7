#include "helpers.hpp"
#include "pas/data.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

using namespace pas;
using testutil::error_kind;

namespace {

std::filesystem::path scratch_file(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / "pas_test_data";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& text)
{
  std::ofstream(p, std::ios::binary) << text;
}

} // namespace

TEST_CASE("csv features")
{
  const FeatureMatrix X = parse_features_csv("1.0,2.0\n3.0,4.0");
  REQUIRE(X.rows() == 2);
  REQUIRE(X.cols() == 2);
  CHECK(X(0, 0) == 1.0);
  CHECK(X(0, 1) == 2.0);
  CHECK(X(1, 0) == 3.0);
  CHECK(X(1, 1) == 4.0);
  CHECK(parse_features_csv("1, -2.5e3\r\n3,4\n\n").rows() == 2);

  CHECK(error_kind([] { parse_features_csv("1,2\n3\n"); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { parse_features_csv("1,2\n3,4,5\n"); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { parse_features_csv("1,x\n"); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { parse_features_csv("1,2\n\n3,4\n"); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { parse_features_csv(""); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { parse_features_csv("1,nan\n"); }) == ErrorKind::NonFinite);
  CHECK(error_kind([] { parse_features_csv("inf,1\n"); }) == ErrorKind::NonFinite);
}

TEST_CASE("csv text round-trips exactly")
{
  testutil::Rng rng(31);
  const FeatureMatrix X = testutil::gaussian(rng, 7, 5, 1e3);
  CHECK(parse_features_csv(features_to_csv(X)) == X);
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(-3.0) == "-3");
}

TEST_CASE("binary round-trip is bitwise")
{
  testutil::Rng rng(32);
  FeatureMatrix X = testutil::gaussian(rng, 9, 4);
  X(0, 0) = -0.0;
  X(1, 1) = 5e-324;
  const std::string bytes = features_to_binary(X);
  CHECK(bytes.size() == 12 + 9 * 4 * 8);
  CHECK(bytes.substr(0, 4) == "PASM");
  const FeatureMatrix Y = parse_features_binary(bytes);
  REQUIRE(Y.rows() == 9);
  REQUIRE(Y.cols() == 4);
  CHECK(std::memcmp(X.data(), Y.data(), sizeof(double) * 36) == 0);
  CHECK(std::signbit(Y(0, 0)));

  // Header layout: little-endian u32 n then d, payload row-major.
  CHECK(static_cast<unsigned char>(bytes[4]) == 9);
  CHECK(static_cast<unsigned char>(bytes[8]) == 4);
  double first_row_second = 0.0;
  std::memcpy(&first_row_second, bytes.data() + 12 + 8, 8);
  CHECK(first_row_second == X(0, 1));

  const auto path = scratch_file("m.bin");
  save_features(path, X, FileFormat::Binary);
  const FeatureMatrix Z = load_features(path);
  CHECK(std::memcmp(X.data(), Z.data(), sizeof(double) * 36) == 0);

  CHECK(error_kind([&] { parse_features_binary(bytes.substr(0, bytes.size() - 1)); }) == ErrorKind::ParseError);
  CHECK(error_kind([&] { parse_features_binary("PASX" + bytes.substr(4)); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { load_features("/nonexistent/features.csv"); }) == ErrorKind::IoError);
}

TEST_CASE("labels are remapped to contiguous indices")
{
  const LabelMapping map = remap_labels(parse_raw_labels("7\n3\n9\n3\n"));
  CHECK(map.indices == std::vector<int>{ 1, 0, 2, 0 });
  CHECK(map.class_values == std::vector<std::int64_t>{ 3, 7, 9 });
  CHECK(apply_mapping({ 9, 3 }, map.class_values) == std::vector<int>{ 2, 0 });
  CHECK(error_kind([&] { apply_mapping({ 5 }, map.class_values); }) == ErrorKind::RangeError);
  CHECK(labels_to_text({ 2, 0 }) == "2\n0\n");

  CHECK(error_kind([] { parse_raw_labels("1\n-2\n"); }) == ErrorKind::RangeError);
  CHECK(error_kind([] { parse_raw_labels("1\n\n2\n"); }) == ErrorKind::RangeError);
  CHECK(error_kind([] { parse_raw_labels("1\n2.5\n"); }) == ErrorKind::ParseError);
  CHECK(error_kind([] { parse_raw_labels("a\n"); }) == ErrorKind::ParseError);
}

TEST_CASE("load_labeled")
{
  const auto fx = scratch_file("f.csv"), fy = scratch_file("y.csv"), fbad = scratch_file("ybad.csv");
  write_text(fx, "0,0\n1,1\n2,2\n");
  write_text(fy, "10\n20\n10\n");
  write_text(fbad, "10\n20\n");
  const LabeledDataset ds = load_labeled(fx, fy);
  CHECK(ds.labels.num_classes == 2);
  CHECK(ds.labels.labels == std::vector<int>{ 0, 1, 0 });
  CHECK(ds.class_values == std::vector<std::int64_t>{ 10, 20 });
  CHECK(ds.features.rows() == 3);
  CHECK(error_kind([&] { load_labeled(fx, fbad); }) == ErrorKind::ParseError);
}

TEST_CASE("synthetic generator")
{
  SynthConfig cfg;
  cfg.seed = 4;
  const auto [s0, t0] = synth_shifted_pair(cfg);
  CHECK(s0.features.rows() == 300);
  CHECK(t0.features.rows() == 300);
  // Zero shift reproduces the source draws, so per-class means agree.
  for (int k = 0; k < 3; ++k) {
    Eigen::RowVectorXd ms = Eigen::RowVectorXd::Zero(10), mt = Eigen::RowVectorXd::Zero(10);
    for (Eigen::Index i = 0; i < 300; ++i) {
      if (s0.labels.labels[static_cast<std::size_t>(i)] == k)
        ms += s0.features.row(i) / 100.0;
      if ((*t0.true_labels)[static_cast<std::size_t>(i)] == k)
        mt += t0.features.row(i) / 100.0;
    }
    CHECK((ms - mt).cwiseAbs().maxCoeff() <= 1e-12);
  }

  cfg.rotation = 0.7;
  cfg.translation = 1.5;
  cfg.noise = 0.2;
  cfg.paired_target = false;
  cfg.noise_dispersion = 0.5;
  const auto [a1, b1] = synth_shifted_pair(cfg);
  const auto [a2, b2] = synth_shifted_pair(cfg);
  CHECK(features_to_binary(a1.features) == features_to_binary(a2.features));
  CHECK(features_to_binary(b1.features) == features_to_binary(b2.features));
  CHECK(a1.labels.labels == a2.labels.labels);
  CHECK(*b1.true_labels == *b2.true_labels);
  cfg.seed = 5;
  CHECK(features_to_binary(synth_shifted_pair(cfg).first.features) != features_to_binary(a1.features));

  cfg.pda_keep = std::vector<int>{ 0 };
  const auto [ps, pt] = synth_shifted_pair(cfg);
  CHECK(ps.labels.num_classes == 3);
  CHECK(pt.features.rows() == 100);
  CHECK(std::set<int>(pt.true_labels->begin(), pt.true_labels->end()) == std::set<int>{ 0 });

  cfg.pda_keep = std::vector<int>{ 0, 1, 2 };
  const auto [fs, ft] = synth_shifted_pair(cfg);
  CHECK(std::set<int>(ft.true_labels->begin(), ft.true_labels->end()) == std::set<int>{ 0, 1, 2 });

  SynthConfig bad;
  bad.pda_keep = std::vector<int>{};
  CHECK(error_kind([&] { synth_shifted_pair(bad); }) == ErrorKind::ConfigError);
  bad.pda_keep = std::vector<int>{ 3 };
  CHECK(error_kind([&] { synth_shifted_pair(bad); }) == ErrorKind::ConfigError);
  bad = SynthConfig{};
  bad.noise = -1.0;
  CHECK(error_kind([&] { synth_shifted_pair(bad); }) == ErrorKind::ConfigError);
  bad = SynthConfig{};
  bad.num_classes = 0;
  CHECK(error_kind([&] { synth_shifted_pair(bad); }) == ErrorKind::ConfigError);
}
