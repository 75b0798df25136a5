#include "fimgnn/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include "fimgnn/errors.hpp"

namespace fimgnn {

namespace {

constexpr char kMagic[4] = {'F', 'V', 'M', '1'};
constexpr std::size_t kHeaderBytes = 4 + 8 + 8;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double parse_double(std::string_view field, std::uint64_t offset) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("invalid number '" + std::string(field) + "'", offset);
  }
  return v;
}

std::vector<double> split_numbers(std::string_view line, std::uint64_t offset) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) end = line.size();
    values.push_back(parse_double(line.substr(start, end - start), offset + start));
    start = end + 1;
  }
  return values;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

std::vector<std::uint8_t> encode_fvm1(const Matrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + m.size() * 8);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (double v : m.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Matrix decode_fvm1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad magic, expected FVM1", 0);
  }
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated header", bytes.size());
  const std::uint64_t rows = get_u64(bytes.data() + 4);
  const std::uint64_t cols = get_u64(bytes.data() + 12);
  if (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / 8 / cols) {
    throw FormatError("header dimensions overflow", 4);
  }
  const std::uint64_t payload = rows * cols * 8;
  if (bytes.size() - kHeaderBytes < payload) {
    throw FormatError("truncated payload: header declares " + std::to_string(rows) + "x" +
                          std::to_string(cols),
                      bytes.size());
  }
  if (bytes.size() - kHeaderBytes > payload) {
    throw FormatError("payload larger than header declares", kHeaderBytes + payload);
  }
  std::vector<double> data(rows * cols);
  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  for (std::size_t i = 0; i < data.size(); ++i, p += 8) data[i] = std::bit_cast<double>(get_u64(p));
  return Matrix(rows, cols, std::move(data));
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  if (path.extension() == ".csv") {
    save_matrix_csv(path, m);
    return;
  }
  const auto bytes = encode_fvm1(m);
  write_file(path, std::string(bytes.begin(), bytes.end()));
}

Matrix load_matrix(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (path.extension() != ".csv") return decode_fvm1(bytes);

  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::uint64_t offset = 0;
  auto next_line = [&](std::string_view& line) {
    if (offset >= text.size()) return false;
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(offset, end - offset);
    offset = end + 1;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw FormatError("empty CSV matrix", 0);
  const auto header = split_numbers(line, 0);
  if (header.size() != 2 || header[0] < 0 || header[1] < 0) {
    throw FormatError("CSV header must be 'rows,cols'", 0);
  }
  const auto rows = static_cast<std::size_t>(header[0]);
  const auto cols = static_cast<std::size_t>(header[1]);
  std::vector<double> data;
  data.reserve(rows * cols);
  std::size_t row = 0;
  while (true) {
    const std::uint64_t line_offset = offset;
    if (!next_line(line)) break;
    if (blank(line)) continue;
    auto values = split_numbers(line, line_offset);
    if (values.size() != cols || row >= rows) {
      throw FormatError("CSV row " + std::to_string(row) + " does not match header " +
                            std::to_string(rows) + "x" + std::to_string(cols),
                        line_offset);
    }
    data.insert(data.end(), values.begin(), values.end());
    ++row;
  }
  if (row != rows) throw FormatError("CSV has fewer rows than its header declares", text.size());
  return Matrix(rows, cols, std::move(data));
}

void save_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << m.rows() << ',' << m.cols() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
  write_file(path, out.str());
}

std::vector<std::int64_t> load_labels(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::vector<std::int64_t> labels;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char ch = text[pos];
    if (ch == '\n' || ch == '\r' || ch == ',' || ch == ' ' || ch == '\t') {
      ++pos;
      continue;
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), v);
    if (ec != std::errc()) throw FormatError("invalid label", pos);
    labels.push_back(v);
    pos = static_cast<std::size_t>(ptr - text.data());
  }
  return labels;
}

void save_labels(const std::filesystem::path& path, std::span<const std::int64_t> labels) {
  std::ostringstream out;
  for (auto v : labels) out << v << '\n';
  write_file(path, out.str());
}

}  // namespace fimgnn
