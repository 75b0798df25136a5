#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fimgnn/matrix.hpp"

namespace fimgnn {

// FVM1 layout: "FVM1", u64 rows, u64 cols, rows*cols f64; all little-endian, row-major.
std::vector<std::uint8_t> encode_fvm1(const Matrix& m);
Matrix decode_fvm1(std::span<const std::uint8_t> bytes);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
/// Reads FVM1, or CSV (`rows,cols` header line) when the extension is `.csv`.
Matrix load_matrix(const std::filesystem::path& path);

void save_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// One integer label per line.
std::vector<std::int64_t> load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, std::span<const std::int64_t> labels);

}  // namespace fimgnn
