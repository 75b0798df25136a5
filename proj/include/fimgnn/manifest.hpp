#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fimgnn {

struct ManifestView {
  std::size_t id = 0;
  std::filesystem::path path;
  std::size_t dim = 0;
};

struct Manifest {
  std::string name;
  std::size_t n_samples = 0;
  std::size_t n_clusters = 0;
  std::vector<ManifestView> views;
  std::optional<std::filesystem::path> labels_path;
  std::optional<std::filesystem::path> masks_path;
};

/// Relative paths inside the manifest resolve against the manifest's directory.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace fimgnn
