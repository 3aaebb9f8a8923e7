#pragma once

#include "pas/core.hpp"
#include "pas/subspace.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pas {

enum class FileFormat
{
  Auto,  // binary if the file starts with the magic, CSV otherwise
  Csv,   // comma separated, no header, one sample per row
  Binary // "PASM", u32 n, u32 d, n*d little-endian f64, row-major
};

inline constexpr char kBinaryMagic[4] = { 'P', 'A', 'S', 'M' };

FeatureMatrix parse_features_csv(std::string_view text);
FeatureMatrix parse_features_binary(std::string_view bytes);
FeatureMatrix load_features(const std::filesystem::path& path, FileFormat format = FileFormat::Auto);

std::string features_to_csv(const FeatureMatrix& X);
std::string features_to_binary(const FeatureMatrix& X);
void save_features(const std::filesystem::path& path, const FeatureMatrix& X, FileFormat format);

//! Shortest decimal string that parses back to the same double.
std::string format_real(double value);

//! Labels remapped onto 0..K-1 in increasing order of the original values.
struct LabelMapping
{
  std::vector<int> indices;
  std::vector<std::int64_t> class_values; // index -> original value
};

std::vector<std::int64_t> parse_raw_labels(std::string_view text);
std::vector<std::int64_t> load_raw_labels(const std::filesystem::path& path);
LabelMapping remap_labels(const std::vector<std::int64_t>& raw);

//! Maps raw values through an existing mapping; unknown values are a
//! RangeError.
std::vector<int> apply_mapping(const std::vector<std::int64_t>& raw,
                               const std::vector<std::int64_t>& class_values);

std::string labels_to_text(const std::vector<int>& labels);

struct LabeledDataset
{
  FeatureMatrix features;
  SourceLabels labels;
  std::vector<std::int64_t> class_values;
};

struct UnlabeledDataset
{
  FeatureMatrix features;
  std::optional<std::vector<int>> true_labels;
};

LabeledDataset load_labeled(const std::filesystem::path& feature_path,
                            const std::filesystem::path& label_path,
                            FileFormat format = FileFormat::Auto);

//! Each class is a Gaussian blob living near an affine subspace: a seeded
//! centre, `class_rank` seeded orthonormal directions with standard
//! deviation `spread`, and isotropic off-subspace noise `thickness`. The
//! target is rotated by `rotation` radians in a seeded 2-plane, translated
//! by `translation` along a seeded unit direction and perturbed by
//! N(0, noise^2). With `paired_target` the target transforms the very same
//! draws as the source (a zero shift then reproduces the source exactly);
//! otherwise the target draws fresh samples from the same blobs. A positive
//! `noise_dispersion` gives every target row its own noise scale
//! noise * exp(noise_dispersion * z), z ~ N(0, 1).
struct SynthConfig
{
  int num_classes = 3;
  int dim = 10;
  int per_class = 100;
  double rotation = 0.0;
  double translation = 0.0;
  double noise = 0.0;
  std::optional<std::vector<int>> pda_keep;
  std::uint64_t seed = 0;

  double separation = 1.0;
  double spread = 3.0;
  double thickness = 0.5;
  int class_rank = 1;
  bool paired_target = true;
  double noise_dispersion = 0.0;

  void validate() const;
};

std::pair<LabeledDataset, UnlabeledDataset> synth_shifted_pair(const SynthConfig& cfg);

} // namespace pas
