#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spectral/tensor.hpp"

namespace spectral {

// ---------------------------------------------------------------------------
// Weight store: a directory holding manifest.json plus one NPY file per tensor.
// ---------------------------------------------------------------------------

struct ManifestEntry {
    std::string name;
    Shape shape;
    std::string file;
};

struct Manifest {
    std::string model;
    std::vector<ManifestEntry> layers;
};

struct WeightStore {
    std::string model;
    std::vector<WeightTensor> layers;  // manifest order
};

/// Parses `dir/manifest.json` without touching tensor files. Useful for
/// shape-only accounting.
Manifest read_manifest(const std::filesystem::path& dir);

/// Loads every tensor listed in the manifest and checks it against the
/// declared shape. Errors name the offending layer.
WeightStore read_weight_store(const std::filesystem::path& dir);

/// Writes manifest.json and `<name>.npy` per layer (slashes in names are
/// replaced so every file lands directly in `dir`).
void write_weight_store(const WeightStore& store, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Compressed container (.spcw)
//
//   header:  "SPCW" | u16 version = 1 | u32 record count
//   record:  u16 name length | name bytes | 4 x u32 shape | u8 method |
//            u8 dtype | u32 g | u32 t | g*t coefficients (dtype) |
//            index block (u32 each)
//
// All integers little-endian. Shape entries past the tensor rank are 0.
// The index block holds L = elements/g ordering entries for dct records,
// t kept-column indices for l1_prune records and nothing for passthrough
// records (which store the raw tensor as g = 1, t = elements).
// Group rows are the row-major flattening of the tensor split into g
// contiguous pieces.
// ---------------------------------------------------------------------------

enum class Method : std::uint8_t { dct = 0, l1_prune = 1, passthrough = 2 };

const char* method_name(Method m);
Method parse_method(const std::string& s);

struct CompressedLayer {
    std::string name;
    Shape shape;
    Method method = Method::passthrough;
    DType dtype = DType::f32;
    std::uint32_t g = 1;
    std::uint32_t t = 0;
    std::vector<double> coefficients;   // g x t, row = group
    std::vector<std::uint32_t> indices;  // see index block above

    std::uint64_t group_length() const { return shape.elements() / g; }
    std::uint64_t expected_index_count() const;

    bool operator==(const CompressedLayer&) const = default;
};

/// Throws InputError if the record breaks a container invariant.
void validate(const CompressedLayer& layer);

inline constexpr char kContainerMagic[4] = {'S', 'P', 'C', 'W'};
inline constexpr std::uint16_t kContainerVersion = 1;

std::vector<std::uint8_t> serialize_container(const std::vector<CompressedLayer>& layers);
std::vector<CompressedLayer> parse_container(const std::vector<std::uint8_t>& bytes);

void write_compressed(const std::vector<CompressedLayer>& layers, const std::filesystem::path& path);
std::vector<CompressedLayer> read_compressed(const std::filesystem::path& path);

}  // namespace spectral
