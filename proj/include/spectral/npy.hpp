#pragma once

#include <filesystem>

#include "spectral/tensor.hpp"

namespace spectral::npy {

/// Loads a little-endian, C-order f4/f8 array (format versions 1.x-3.x).
/// The returned tensor has an empty name.
WeightTensor load(const std::filesystem::path& path);

/// Writes a version 1.0 array with the tensor's shape and dtype.
void save(const std::filesystem::path& path, const WeightTensor& tensor);

}  // namespace spectral::npy
