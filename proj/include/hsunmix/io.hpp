#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hsunmix/types.hpp"

namespace hsunmix {

// Binary matrix file, magic "F64M": u32le rows, u32le cols, then rows*cols
// IEEE-754 doubles, little endian, row major. Cube files use magic "F64C"
// with rows/cols/bands and [row][col][band] value order.

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

void save_cube(const std::filesystem::path& path, const HyperCube& cube);
HyperCube load_cube(const std::filesystem::path& path);

/// Comma-separated text table; header "wavelength,<name>,<name>,...".
SpectralLibrary load_spectral_library(const std::filesystem::path& path);
void save_spectral_library(const std::filesystem::path& path, const SpectralLibrary& lib);

/// Comma-separated integers, one image row per line.
LabelMap load_label_map(const std::filesystem::path& path);
void save_label_map(const std::filesystem::path& path, const LabelMap& labels);

}  // namespace hsunmix
