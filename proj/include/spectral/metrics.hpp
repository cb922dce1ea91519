#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectral/container_io.hpp"
#include "spectral/strategy.hpp"
#include "spectral/tensor.hpp"

namespace spectral {

/// |w - w~|^2 / |w|^2 over the flattened tensors. Throws InputError on a
/// shape mismatch or an all-zero w.
double nsse(const WeightTensor& w, const WeightTensor& w_tilde);

/// Parameter accounting for one layer. Every stored value counts as one
/// parameter, ordering and kept-column indices included.
struct LayerFootprint {
    std::string name;
    Method method = Method::passthrough;
    std::uint32_t g = 1;
    std::optional<double> r;
    std::uint32_t t = 0;
    bool weight = true;  // false for untouched 1-D tensors
    std::uint64_t original = 0;
    std::uint64_t stored = 0;
    std::uint64_t trainable = 0;  // coefficients (or raw values for passthrough)
    std::uint64_t index = 0;      // ordering / kept-column entries
    std::uint64_t bytes = 0;      // coefficient + index payload
    std::optional<double> nsse;
};

struct FootprintTotals {
    std::uint64_t original = 0;
    std::uint64_t stored = 0;
    std::uint64_t trainable = 0;
    std::uint64_t index = 0;
    std::uint64_t bytes = 0;

    double trainable_fraction() const { return stored ? static_cast<double>(trainable) / stored : 0.0; }
    double size_fraction() const { return original ? static_cast<double>(stored) / original : 0.0; }
    FootprintTotals& operator+=(const LayerFootprint& l);
};

struct FootprintReport {
    std::vector<LayerFootprint> layers;
    FootprintTotals all;           // every tensor in the store
    FootprintTotals weights_only;  // rank >= 2 tensors only
    void add(LayerFootprint l);

    /// Parameter-weighted mean of per-layer nSSE over layers that have one.
    /// A reporting convenience, not a per-layer quality measure.
    std::optional<double> aggregate_nsse() const;
};

LayerFootprint layer_footprint(const CompressedLayer& c);

/// Accounting of a container against the store it was built from. Throws
/// InputError if layer names or shapes differ.
FootprintReport footprint(const std::vector<CompressedLayer>& container, const WeightStore& original);

/// The same accounting straight from a plan; needs no tensor data.
FootprintReport footprint_from_plan(const CompressionPlan& plan);

nlohmann::json report_to_json(const FootprintReport& report);
/// Columns: layer,method,g,r,t,original,stored,trainable,index,nsse
std::string report_to_csv(const FootprintReport& report);

/// Stack of n feature maps, each H x W, row-major.
struct FeatureStack {
    std::uint32_t channels = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::vector<double> data;

    double at(std::uint32_t c, std::uint32_t y, std::uint32_t x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

/// y_j = sum_i x_i (*) w_{j,i}, stride 1, no padding. Cross-correlation:
/// the kernel is not flipped.
FeatureStack conv2d_reference(const FeatureStack& x, const WeightTensor& w);

}  // namespace spectral
