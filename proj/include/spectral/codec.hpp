#pragma once

#include <cstdint>

#include "spectral/container_io.hpp"
#include "spectral/reorder.hpp"
#include "spectral/tensor.hpp"

namespace spectral {

/// Tensor viewed as g rows of length L = elements / g.
struct GroupMatrix {
    Matrix mat;
    Shape origin;

    std::size_t groups() const { return mat.rows; }
    std::size_t length() const { return mat.cols; }
};

/// Row-major flatten (last index fastest), split into g contiguous rows.
/// Throws InputError when g does not divide the element count.
GroupMatrix reshape_to_groups(const WeightTensor& w, std::uint32_t g);

/// Exact inverse of reshape_to_groups.
WeightTensor reshape_from_groups(const GroupMatrix& gm, std::string name, DType dtype);

/// t = floor(L / r). Throws InputError for r < 1 or when t would be 0.
std::uint32_t truncation_length(std::uint64_t row_length, double r);

struct DctOptions {
    DistanceMetric metric = DistanceMetric::euclidean;
    StartNorm start = StartNorm::l2;
    /// Skip reordering (identity ordering). Only used for comparisons.
    bool reorder = true;
};

/// Reshape to g groups, reorder columns, keep the t lowest DCT
/// frequencies of each row. Coefficients stay in double precision; call
/// round_coefficients before comparing against a stored container.
CompressedLayer compress_layer(const WeightTensor& w, std::uint32_t g, double r, const DctOptions& opts = {});
CompressedLayer compress_layer_t(const WeightTensor& w, std::uint32_t g, std::uint32_t t,
                                 const DctOptions& opts = {});

/// Keeps the t = floor(L / r) columns of largest l1 norm (ties to the
/// lower index), in ascending column order.
CompressedLayer l1_prune_layer(const WeightTensor& w, std::uint32_t g, double r);
CompressedLayer l1_prune_layer_t(const WeightTensor& w, std::uint32_t g, std::uint32_t t);

/// Stores the tensor as-is.
CompressedLayer passthrough_layer(const WeightTensor& w);

/// Reconstructs the tensor from any record method. Throws InputError on
/// an invalid record.
WeightTensor decompress_layer(const CompressedLayer& c);

/// Casts coefficients to what the record's dtype can hold, i.e. what a
/// reader of the written container will see.
void round_coefficients(CompressedLayer& c);

}  // namespace spectral
