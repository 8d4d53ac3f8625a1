#pragma once

// Shared scaffolding for the doctest suites: an independent random source
// (kept separate from the library's Rng so tests do not inherit its
// behavior), random matrix builders, and self-cleaning temp directories.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "hsunmix/types.hpp"

namespace testutil {

inline double u01(std::mt19937_64& g) {
  return ((g() >> 11) + 1) * 0x1.0p-53;  // uniform on (0, 1]
}

inline hsunmix::Matrix random_matrix(int rows, int cols, std::mt19937_64& g,
                                     double lo = 0.0, double hi = 1.0) {
  hsunmix::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = lo + (hi - lo) * u01(g);
  }
  return m;
}

inline hsunmix::Vector random_vector(int n, std::mt19937_64& g, double lo = 0.0,
                                     double hi = 1.0) {
  hsunmix::Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * u01(g);
  return v;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("hsunmix_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string data_file(const std::string& name) {
  return std::string(HSUNMIX_DATA_DIR) + "/" + name;
}

}  // namespace testutil
