#pragma once

#include "pas/core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pas {

//! A persisted model plus the original class values its indices stand for.
struct ModelFile
{
  PasModel model;
  std::vector<std::int64_t> class_values; // index -> original label
};

//! JSON document with keys feature_dim, num_classes, dim, subspaces (each
//! {mean, basis, spectrum}, basis flattened column-major), config and
//! class_labels. Doubles are written in shortest round-trip form so a reload
//! reproduces predictions exactly.
std::string serialize_model(const PasModel& model, const std::vector<std::int64_t>& class_values = {});

//! Throws ParseError on malformed or inconsistent documents. A missing
//! class_labels key means the identity mapping.
ModelFile parse_model(const std::string& text);

ModelFile load_model(const std::filesystem::path& path);

} // namespace pas
