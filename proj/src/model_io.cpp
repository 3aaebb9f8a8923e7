#include "pas/model_io.hpp"
#include "pas/error.hpp"

#include <json.hpp>

#include <fstream>
#include <numeric>
#include <sstream>

namespace pas {

using nlohmann::json;

namespace {

json to_array(const Vector& v)
{
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector to_vector(const json& j, const char* key)
{
  if (!j.is_array())
    throw Error(ErrorKind::ParseError, std::string(key) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw Error(ErrorKind::ParseError, std::string(key) + " must hold numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  if (!v.allFinite())
    throw Error(ErrorKind::NonFinite, std::string(key) + " holds NaN or Inf");
  return v;
}

} // namespace

std::string serialize_model(const PasModel& model, const std::vector<std::int64_t>& class_values)
{
  json doc;
  doc["feature_dim"] = model.feature_dim();
  doc["num_classes"] = model.num_classes();
  doc["dim"] = model.config.dim;

  json subspaces = json::array();
  for (const Subspace& S : model.subspaces) {
    json s;
    s["mean"] = to_array(S.mean);
    // Eigen's default storage is column-major already.
    s["basis"] = std::vector<double>(S.basis.data(), S.basis.data() + S.basis.size());
    s["spectrum"] = to_array(S.spectrum);
    subspaces.push_back(std::move(s));
  }
  doc["subspaces"] = std::move(subspaces);

  doc["config"] = { { "dim", model.config.dim },
                    { "schedule_step", model.config.schedule_step },
                    { "inner_tol", model.config.inner_tol },
                    { "inner_max_iters", model.config.inner_max_iters },
                    { "seed", model.config.seed } };

  if (class_values.empty()) {
    std::vector<std::int64_t> identity(static_cast<std::size_t>(model.num_classes()));
    std::iota(identity.begin(), identity.end(), 0);
    doc["class_labels"] = identity;
  } else {
    doc["class_labels"] = class_values;
  }
  return doc.dump(1) + "\n";
}

ModelFile parse_model(const std::string& text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("model JSON: ") + e.what());
  }

  ModelFile out;
  try {
    const auto d = doc.at("feature_dim").get<Eigen::Index>();
    const auto K = doc.at("num_classes").get<int>();
    if (d < 1 || K < 1)
      throw Error(ErrorKind::ParseError, "feature_dim and num_classes must be positive");

    const json& cfg = doc.at("config");
    out.model.config.dim = cfg.value("dim", doc.at("dim").get<int>());
    out.model.config.schedule_step = cfg.value("schedule_step", 0.01);
    out.model.config.inner_tol = cfg.value("inner_tol", 1e-6);
    out.model.config.inner_max_iters = cfg.value("inner_max_iters", 50);
    out.model.config.seed = cfg.value("seed", std::uint64_t{ 0 });
    out.model.config.validate();

    const json& subspaces = doc.at("subspaces");
    if (!subspaces.is_array() || static_cast<int>(subspaces.size()) != K)
      throw Error(ErrorKind::ParseError, "subspaces must hold num_classes entries");
    for (const json& s : subspaces) {
      Subspace S;
      S.mean = to_vector(s.at("mean"), "mean");
      S.spectrum = to_vector(s.at("spectrum"), "spectrum");
      const Vector flat = to_vector(s.at("basis"), "basis");
      if (S.mean.size() != d)
        throw Error(ErrorKind::ParseError, "mean length differs from feature_dim");
      if (flat.size() != d * S.spectrum.size())
        throw Error(ErrorKind::ParseError, "basis length must equal feature_dim * spectrum length");
      S.basis = Eigen::Map<const Eigen::MatrixXd>(flat.data(), d, S.spectrum.size());
      out.model.subspaces.push_back(std::move(S));
    }

    if (doc.contains("class_labels")) {
      out.class_values = doc.at("class_labels").get<std::vector<std::int64_t>>();
      if (static_cast<int>(out.class_values.size()) != K)
        throw Error(ErrorKind::ParseError, "class_labels must hold num_classes entries");
    } else {
      out.class_values.resize(static_cast<std::size_t>(K));
      std::iota(out.class_values.begin(), out.class_values.end(), 0);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("model JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::NonFinite)
      throw;
    throw Error(ErrorKind::ParseError, e.what());
  }
  return out;
}

ModelFile load_model(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

} // namespace pas
