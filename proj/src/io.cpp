#include "hsunmix/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "hsunmix/errors.hpp"

namespace hsunmix {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff),
                                 static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
  std::array<unsigned char, 4> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw ConfigError(path + ": truncated header");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::vector<double> read_payload(std::istream& is, std::uint64_t count,
                                 const std::string& path) {
  if (count > std::numeric_limits<std::size_t>::max() / sizeof(double)) {
    throw ConfigError(path + ": dimension overflow");
  }
  std::vector<double> out(count);
  std::vector<unsigned char> raw(count * 8);
  if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw ConfigError(path + ": truncated payload");
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw ConfigError(path + ": trailing bytes after payload");
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
      bits |= static_cast<std::uint64_t>(raw[i * 8 + k]) << (8 * k);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

void check_magic(std::istream& is, const char* magic, const std::string& path) {
  std::array<char, 4> got{};
  if (!is.read(got.data(), 4) || std::memcmp(got.data(), magic, 4) != 0) {
    throw ConfigError(path + ": bad magic, expected " + magic);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError(path.string() + ": cannot open for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(path.string() + ": cannot open");
  return is;
}

double parse_real(std::string_view tok, const std::filesystem::path& path, int line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(path.string() + ":" + std::to_string(line) +
                      ": malformed number '" + std::string(tok) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto os = open_out(path);
  os.write("F64M", 4);
  put_u32(os, static_cast<std::uint32_t>(m.rows()));
  put_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(os, m(r, c));
  }
  if (!os) throw ConfigError(path.string() + ": write failed");
}

Matrix load_matrix(const std::filesystem::path& path) {
  auto is = open_in(path);
  check_magic(is, "F64M", path.string());
  const std::uint64_t rows = get_u32(is, path.string());
  const std::uint64_t cols = get_u32(is, path.string());
  const auto data = read_payload(is, rows * cols, path.string());
  Matrix m(rows, cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  }
  return m;
}

void save_cube(const std::filesystem::path& path, const HyperCube& cube) {
  auto os = open_out(path);
  os.write("F64C", 4);
  put_u32(os, static_cast<std::uint32_t>(cube.rows));
  put_u32(os, static_cast<std::uint32_t>(cube.cols));
  put_u32(os, static_cast<std::uint32_t>(cube.bands));
  for (double v : cube.values) put_f64(os, v);  // already [row][col][band]
  if (!os) throw ConfigError(path.string() + ": write failed");
}

HyperCube load_cube(const std::filesystem::path& path) {
  auto is = open_in(path);
  check_magic(is, "F64C", path.string());
  const std::uint64_t rows = get_u32(is, path.string());
  const std::uint64_t cols = get_u32(is, path.string());
  const std::uint64_t bands = get_u32(is, path.string());
  const auto data = read_payload(is, rows * cols * bands, path.string());
  HyperCube cube(static_cast<int>(rows), static_cast<int>(cols), static_cast<int>(bands));
  cube.values = data;
  return cube;
}

SpectralLibrary load_spectral_library(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) {
    throw ConfigError(path.string() + ": empty library file");
  }
  const auto header = split_csv(strip_cr(line));
  if (header.size() < 2 || header[0] != "wavelength") {
    throw ConfigError(path.string() + ": header must start with 'wavelength' and name at least one material");
  }
  SpectralLibrary lib;
  std::set<std::string_view> seen;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].empty()) {
      throw ConfigError(path.string() + ": empty material name in header");
    }
    if (!seen.insert(header[i]).second) {
      throw ConfigError(path.string() + ": duplicate material name '" + std::string(header[i]) + "'");
    }
    lib.names.emplace_back(header[i]);
  }

  std::vector<std::vector<double>> columns(lib.names.size());
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto row = strip_cr(line);
    if (row.empty()) continue;
    const auto toks = split_csv(row);
    if (toks.size() != header.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(toks.size()));
    }
    const double w = parse_real(toks[0], path, line_no);
    if (!lib.wavelengths.empty() && w <= lib.wavelengths.back()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": wavelengths must be strictly increasing");
    }
    lib.wavelengths.push_back(w);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const double v = parse_real(toks[i + 1], path, line_no);
      if (v < 0.0 || v > 1.0) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": reflectance " + std::to_string(v) + " outside [0,1]");
      }
      columns[i].push_back(v);
    }
  }
  if (lib.wavelengths.empty()) {
    throw ConfigError(path.string() + ": no data rows");
  }
  lib.reflectance.resize(lib.bands(), lib.material_count());
  for (int m = 0; m < lib.material_count(); ++m) {
    for (int b = 0; b < lib.bands(); ++b) lib.reflectance(b, m) = columns[m][b];
  }
  return lib;
}

void save_spectral_library(const std::filesystem::path& path, const SpectralLibrary& lib) {
  auto os = open_out(path);
  os << "wavelength";
  for (const auto& n : lib.names) os << ',' << n;
  os << '\n';
  std::ostringstream num;
  num.precision(17);
  for (int b = 0; b < lib.bands(); ++b) {
    num.str("");
    num << lib.wavelengths[b];
    for (int m = 0; m < lib.material_count(); ++m) num << ',' << lib.reflectance(b, m);
    os << num.str() << '\n';
  }
  if (!os) throw ConfigError(path.string() + ": write failed");
}

LabelMap load_label_map(const std::filesystem::path& path) {
  auto is = open_in(path);
  LabelMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto row = strip_cr(line);
    if (row.empty()) continue;
    const auto toks = split_csv(row);
    if (map.cols == 0) {
      map.cols = static_cast<int>(toks.size());
    } else if (static_cast<int>(toks.size()) != map.cols) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    for (const auto tok : toks) {
      int v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": malformed label '" + std::string(tok) + "'");
      }
      map.labels.push_back(v);
    }
    ++map.rows;
  }
  if (map.rows == 0) throw ConfigError(path.string() + ": empty label map");
  int max_label = 0;
  for (int v : map.labels) max_label = std::max(max_label, v);
  map.class_count = max_label + 1;
  std::vector<bool> present(map.class_count, false);
  for (int v : map.labels) present[v] = true;
  for (int c = 0; c < map.class_count; ++c) {
    if (!present[c]) {
      throw ConfigError(path.string() + ": class " + std::to_string(c) +
                        " never occurs (labels must cover 0.." +
                        std::to_string(map.class_count - 1) + ")");
    }
  }
  return map;
}

void save_label_map(const std::filesystem::path& path, const LabelMap& labels) {
  auto os = open_out(path);
  for (int r = 0; r < labels.rows; ++r) {
    for (int c = 0; c < labels.cols; ++c) {
      if (c) os << ',';
      os << labels.at(r, c);
    }
    os << '\n';
  }
  if (!os) throw ConfigError(path.string() + ": write failed");
}

}  // namespace hsunmix
