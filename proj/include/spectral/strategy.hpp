#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectral/container_io.hpp"
#include "spectral/reorder.hpp"

namespace spectral {

struct LayerSpec {
    std::string name;
    Shape shape;
    std::uint64_t params = 0;  // m * n * k^2
    bool weight = false;       // rank >= 2
    bool include = false;      // weight and not excluded by policy
};

/// Which weight tensors get compressed.
struct InclusionPolicy {
    /// Leave the first weight tensor in manifest order (the stem
    /// convolution) uncompressed.
    bool exclude_first = true;
    /// Exact names, or prefixes when the pattern ends in '*'.
    std::vector<std::string> exclude;
    std::uint64_t min_params = 0;
    /// Only 1x1 kernels (and fully connected layers) are compressed.
    bool pointwise_only = false;

    /// "default", "resnet50" or "mobilenet_v2".
    static InclusionPolicy preset(const std::string& name);
    bool excludes(const std::string& name) const;
};

std::vector<LayerSpec> make_layer_specs(const std::vector<ManifestEntry>& entries, const InclusionPolicy& policy);

enum class Strategy { uniform, progressive_r, progressive_g };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& s);

struct PlanEntry {
    std::string name;
    Shape shape;
    Method method = Method::passthrough;
    std::uint32_t g = 1;
    double r = 1.0;
    std::uint32_t t = 0;
    DistanceMetric metric = DistanceMetric::euclidean;
    std::string note;  // why a layer is passthrough

    std::uint64_t params() const { return shape.elements(); }
};

struct CompressionPlan {
    Strategy strategy = Strategy::uniform;
    Method method = Method::dct;
    DistanceMetric metric = DistanceMetric::euclidean;
    std::uint32_t g = 0;   // uniform / progressive-r
    double r = 0.0;        // uniform / progressive-g
    double r_prime = 0.0;  // progressive-r
    std::string reference;
    std::vector<PlanEntry> entries;
    std::vector<std::string> warnings;
};

/// Smallest included layer by parameter count; the first one wins ties.
/// Throws InputError when nothing is included.
const LayerSpec& select_reference_layer(const std::vector<LayerSpec>& layers);

/// r = 1 + r' * sqrt(p) / sqrt(p_ref)
double progressive_rate(std::uint64_t params, std::uint64_t ref_params, double r_prime);

/// g = max(2, 2^floor(log2(sqrt(p) / sqrt(p_ref)))), evaluated in integers.
std::uint32_t progressive_groups(std::uint64_t params, std::uint64_t ref_params);

CompressionPlan plan_uniform(const std::vector<LayerSpec>& layers, double r, std::uint32_t g,
                             DistanceMetric metric = DistanceMetric::euclidean, Method method = Method::dct);
CompressionPlan plan_progressive_r(const std::vector<LayerSpec>& layers, double r_prime, std::uint32_t g,
                                   DistanceMetric metric = DistanceMetric::euclidean, Method method = Method::dct);
CompressionPlan plan_progressive_g(const std::vector<LayerSpec>& layers, double r,
                                   DistanceMetric metric = DistanceMetric::euclidean, Method method = Method::dct);

nlohmann::json plan_to_json(const CompressionPlan& plan);
/// Checks every entry against its own shape; t is taken as written.
CompressionPlan plan_from_json(const nlohmann::json& j);

}  // namespace spectral
