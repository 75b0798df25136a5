#include "fimgnn/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fimgnn {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest " + path.string() + ": " + e.what());
  }

  const auto base = path.parent_path();
  Manifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.n_samples = j.at("n_samples").get<std::size_t>();
    m.n_clusters = j.at("n_clusters").get<std::size_t>();
    for (const auto& v : j.at("views")) {
      ManifestView view;
      view.id = v.at("id").get<std::size_t>();
      view.path = resolve(base, v.at("path").get<std::string>());
      view.dim = v.at("dim").get<std::size_t>();
      m.views.push_back(std::move(view));
    }
    if (j.contains("labels_path") && !j["labels_path"].is_null())
      m.labels_path = resolve(base, j["labels_path"].get<std::string>());
    if (j.contains("masks_path") && !j["masks_path"].is_null())
      m.masks_path = resolve(base, j["masks_path"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest " + path.string() + ": " + e.what());
  }

  if (m.n_clusters < 2) throw std::runtime_error("manifest: n_clusters must be at least 2");
  if (m.views.empty()) throw std::runtime_error("manifest: no views listed");
  for (const auto& v : m.views)
    if (v.dim == 0) throw std::runtime_error("manifest: view " + std::to_string(v.id) + " has dim 0");
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  const auto base = path.parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    if (p.is_absolute() || base.empty()) return p.generic_string();
    return p.lexically_relative(base).generic_string();
  };
  nlohmann::ordered_json j;
  j["name"] = manifest.name;
  j["n_samples"] = manifest.n_samples;
  j["n_clusters"] = manifest.n_clusters;
  j["views"] = nlohmann::ordered_json::array();
  for (const auto& v : manifest.views) {
    j["views"].push_back({{"id", v.id}, {"path", rel(v.path)}, {"dim", v.dim}});
  }
  if (manifest.labels_path) j["labels_path"] = rel(*manifest.labels_path);
  if (manifest.masks_path) j["masks_path"] = rel(*manifest.masks_path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace fimgnn
