#include "pas/data.hpp"
#include "pas/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace pas {

namespace {

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error(ErrorKind::IoError, "short write to " + path.string());
}

std::string_view trim(std::string_view s)
{
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && is_space(s.back()))
    s.remove_suffix(1);
  return s;
}

// Splits on '\n'; a single trailing empty line (final newline) is dropped.
std::vector<std::string_view> split_lines(std::string_view text)
{
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size())
        lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty())
    lines.pop_back();
  return lines;
}

double parse_real(std::string_view field, std::size_t line)
{
  field = trim(field);
  if (!field.empty() && field.front() == '+')
    field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
  if (!std::isfinite(value))
    throw Error(ErrorKind::NonFinite, "line " + std::to_string(line) + ": non-finite value");
  return value;
}

void put_u32(std::string& out, std::uint32_t v)
{
  for (int b = 0; b < 4; ++b)
    out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width)
{
  std::uint64_t v = 0;
  for (int b = 0; b < width; ++b)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(b)]))
         << (8 * b);
  return v;
}

} // namespace

std::string format_real(double value)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

FeatureMatrix parse_features_csv(std::string_view text)
{
  const auto lines = split_lines(text);
  if (lines.empty())
    throw Error(ErrorKind::ParseError, "feature file has no rows");

  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty())
      throw Error(ErrorKind::ParseError, "line " + std::to_string(i + 1) + " is empty");
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(parse_real(line.substr(start, comma - start), i + 1));
      if (comma == std::string_view::npos)
        break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::ParseError, "line " + std::to_string(i + 1) + " has " +
                                           std::to_string(row.size()) + " fields, expected " +
                                           std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }

  FeatureMatrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return X;
}

FeatureMatrix parse_features_binary(std::string_view bytes)
{
  if (bytes.size() < 12 || !std::equal(kBinaryMagic, kBinaryMagic + 4, bytes.begin()))
    throw Error(ErrorKind::ParseError, "missing PASM header");
  const auto n = get_le(bytes, 4, 4);
  const auto d = get_le(bytes, 8, 4);
  if (n == 0 || d == 0)
    throw Error(ErrorKind::ParseError, "binary matrix has zero rows or columns");
  if (bytes.size() != 12 + n * d * 8)
    throw Error(ErrorKind::ParseError, "binary payload length does not match header");

  FeatureMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::size_t offset = 12;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j, offset += 8)
      X(i, j) = std::bit_cast<double>(get_le(bytes, offset, 8));
  if (!X.allFinite())
    throw Error(ErrorKind::NonFinite, "binary matrix contains NaN or Inf");
  return X;
}

FeatureMatrix load_features(const std::filesystem::path& path, FileFormat format)
{
  const std::string bytes = read_file(path);
  if (format == FileFormat::Auto)
    format = bytes.size() >= 4 && std::equal(kBinaryMagic, kBinaryMagic + 4, bytes.begin())
               ? FileFormat::Binary
               : FileFormat::Csv;
  return format == FileFormat::Binary ? parse_features_binary(bytes) : parse_features_csv(bytes);
}

std::string features_to_csv(const FeatureMatrix& X)
{
  std::string out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j)
        out.push_back(',');
      out += format_real(X(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

std::string features_to_binary(const FeatureMatrix& X)
{
  if (X.rows() > 0xFFFFFFFFll || X.cols() > 0xFFFFFFFFll)
    throw Error(ErrorKind::RangeError, "matrix too large for the binary format");
  std::string out(kBinaryMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(X.rows()));
  put_u32(out, static_cast<std::uint32_t>(X.cols()));
  out.reserve(out.size() + static_cast<std::size_t>(X.size()) * 8);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(X(i, j));
      for (int b = 0; b < 8; ++b)
        out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
    }
  return out;
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& X, FileFormat format)
{
  write_file(path, format == FileFormat::Binary ? features_to_binary(X) : features_to_csv(X));
}

std::vector<std::int64_t> parse_raw_labels(std::string_view text)
{
  const auto lines = split_lines(text);
  if (lines.empty())
    throw Error(ErrorKind::ParseError, "label file has no rows");
  std::vector<std::int64_t> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view field = trim(lines[i]);
    if (field.empty())
      throw Error(ErrorKind::RangeError, "line " + std::to_string(i + 1) + ": missing label");
    if (field.front() == '+')
      field.remove_prefix(1);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
      throw Error(ErrorKind::ParseError,
                  "line " + std::to_string(i + 1) + ": label '" + std::string(field) + "' is not an integer");
    if (value < 0)
      throw Error(ErrorKind::RangeError, "line " + std::to_string(i + 1) + ": negative label");
    out.push_back(value);
  }
  return out;
}

std::vector<std::int64_t> load_raw_labels(const std::filesystem::path& path)
{
  return parse_raw_labels(read_file(path));
}

LabelMapping remap_labels(const std::vector<std::int64_t>& raw)
{
  const std::set<std::int64_t> distinct(raw.begin(), raw.end());
  LabelMapping m;
  m.class_values.assign(distinct.begin(), distinct.end());
  m.indices = apply_mapping(raw, m.class_values);
  return m;
}

std::vector<int> apply_mapping(const std::vector<std::int64_t>& raw,
                               const std::vector<std::int64_t>& class_values)
{
  std::map<std::int64_t, int> index;
  for (std::size_t k = 0; k < class_values.size(); ++k)
    index.emplace(class_values[k], static_cast<int>(k));
  std::vector<int> out;
  out.reserve(raw.size());
  for (std::int64_t v : raw) {
    const auto it = index.find(v);
    if (it == index.end())
      throw Error(ErrorKind::RangeError, "label " + std::to_string(v) + " is not a known class");
    out.push_back(it->second);
  }
  return out;
}

std::string labels_to_text(const std::vector<int>& labels)
{
  std::string out;
  for (int y : labels) {
    out += std::to_string(y);
    out.push_back('\n');
  }
  return out;
}

LabeledDataset load_labeled(const std::filesystem::path& feature_path,
                            const std::filesystem::path& label_path,
                            FileFormat format)
{
  LabeledDataset ds;
  ds.features = load_features(feature_path, format);
  const auto raw = load_raw_labels(label_path);
  if (static_cast<Eigen::Index>(raw.size()) != ds.features.rows())
    throw Error(ErrorKind::ParseError, "label file has " + std::to_string(raw.size()) +
                                         " rows, feature file has " + std::to_string(ds.features.rows()));
  LabelMapping mapping = remap_labels(raw);
  ds.labels.labels = std::move(mapping.indices);
  ds.labels.num_classes = static_cast<int>(mapping.class_values.size());
  ds.class_values = std::move(mapping.class_values);
  return ds;
}

void SynthConfig::validate() const
{
  if (num_classes < 1 || dim < 1 || per_class < 1)
    throw Error(ErrorKind::ConfigError, "classes, dim and per-class count must be >= 1");
  if (class_rank < 0 || class_rank > dim)
    throw Error(ErrorKind::ConfigError, "class rank must lie in [0, dim]");
  for (double v : { rotation, translation, noise, separation, spread, thickness, noise_dispersion })
    if (!std::isfinite(v) || v < 0.0)
      throw Error(ErrorKind::ConfigError, "shift and shape magnitudes must be finite and >= 0");
  if (rotation != 0.0 && dim < 2)
    throw Error(ErrorKind::ConfigError, "rotation needs dim >= 2");
  if (pda_keep) {
    if (pda_keep->empty())
      throw Error(ErrorKind::ConfigError, "pda_keep must not be empty");
    for (int k : *pda_keep)
      if (k < 0 || k >= num_classes)
        throw Error(ErrorKind::ConfigError, "pda_keep class " + std::to_string(k) + " out of range");
  }
}

namespace {

Eigen::MatrixXd orthonormal_columns(Eigen::MatrixXd G)
{
  for (Eigen::Index l = 0; l < G.cols(); ++l) {
    for (Eigen::Index p = 0; p < l; ++p)
      G.col(l) -= G.col(p).dot(G.col(l)) * G.col(p);
    G.col(l).normalize();
  }
  return G;
}

} // namespace

std::pair<LabeledDataset, UnlabeledDataset> synth_shifted_pair(const SynthConfig& cfg)
{
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i)
        M(i, j) = gauss(rng);
    return M;
  };

  const int K = cfg.num_classes;
  const Eigen::Index d = cfg.dim;
  std::vector<Vector> centers;
  std::vector<Eigen::MatrixXd> directions;
  for (int k = 0; k < K; ++k) {
    centers.push_back(cfg.separation * draw(d, 1).col(0));
    directions.push_back(orthonormal_columns(draw(d, cfg.class_rank)));
  }

  Eigen::MatrixXd rotation = Eigen::MatrixXd::Identity(d, d);
  if (d >= 2) {
    const Eigen::MatrixXd plane = orthonormal_columns(draw(d, 2));
    const Vector a = plane.col(0);
    const Vector b = plane.col(1);
    const double c = std::cos(cfg.rotation);
    const double s = std::sin(cfg.rotation);
    rotation += (c - 1.0) * (a * a.transpose() + b * b.transpose()) + s * (b * a.transpose() - a * b.transpose());
  }
  const Vector shift = cfg.translation * draw(d, 1).col(0).normalized();

  const Eigen::Index n = static_cast<Eigen::Index>(K) * cfg.per_class;
  const auto sample_blobs = [&]() {
    FeatureMatrix X(n, d);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < cfg.per_class; ++i) {
        const Vector t = cfg.spread * draw(cfg.class_rank, 1).col(0);
        const Vector eps = cfg.thickness * draw(d, 1).col(0);
        X.row(static_cast<Eigen::Index>(k) * cfg.per_class + i) =
          (centers[static_cast<std::size_t>(k)] + directions[static_cast<std::size_t>(k)] * t + eps).transpose();
      }
    return X;
  };

  LabeledDataset source;
  source.features = sample_blobs();
  source.labels.num_classes = K;
  source.labels.labels.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < K; ++k) {
    source.class_values.push_back(k);
    source.labels.labels.insert(source.labels.labels.end(), static_cast<std::size_t>(cfg.per_class), k);
  }

  // Target rows are generated for every class so that a PDA target is an
  // exact row subset of the closed-set target for the same seed.
  Eigen::MatrixXd transformed = (cfg.paired_target ? source.features : sample_blobs()) * rotation.transpose();
  transformed.rowwise() += shift.transpose();
  Eigen::MatrixXd target_noise = cfg.noise * draw(d, n).transpose();
  if (cfg.noise_dispersion > 0.0)
    target_noise = (cfg.noise_dispersion * draw(n, 1).col(0)).array().exp().matrix().asDiagonal() * target_noise;
  transformed += target_noise;

  std::vector<bool> keep(static_cast<std::size_t>(K), true);
  if (cfg.pda_keep) {
    std::fill(keep.begin(), keep.end(), false);
    for (int k : *cfg.pda_keep)
      keep[static_cast<std::size_t>(k)] = true;
  }

  UnlabeledDataset target;
  std::vector<int> truth;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = source.labels.labels[static_cast<std::size_t>(i)];
    if (keep[static_cast<std::size_t>(y)]) {
      rows.push_back(i);
      truth.push_back(y);
    }
  }
  target.features.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r)
    target.features.row(static_cast<Eigen::Index>(r)) = transformed.row(rows[r]);
  target.true_labels = std::move(truth);
  return { std::move(source), std::move(target) };
}

} // namespace pas
