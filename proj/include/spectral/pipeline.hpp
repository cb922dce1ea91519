#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spectral/container_io.hpp"
#include "spectral/metrics.hpp"
#include "spectral/strategy.hpp"

namespace spectral {

struct PlanRequest {
    Strategy strategy = Strategy::uniform;
    Method method = Method::dct;
    DistanceMetric metric = DistanceMetric::euclidean;
    std::uint32_t g = 4;
    std::optional<double> r;
    std::optional<double> r_prime;
    InclusionPolicy policy;
};

/// Validates the strategy-specific parameters and dispatches to the
/// matching planner.
CompressionPlan build_plan(const std::vector<ManifestEntry>& entries, const PlanRequest& req);

/// Throws InputError unless the plan covers exactly the store's layers,
/// in order and with equal shapes.
void check_plan_matches(const CompressionPlan& plan, const WeightStore& store);

struct CompressionOutput {
    std::vector<CompressedLayer> container;
    FootprintReport report;
};

/// Executes a plan layer by layer on `jobs` threads. Coefficients are
/// rounded to the layer dtype and the reported nSSE is measured on the
/// reconstruction exactly as `decompress_store` will produce it.
CompressionOutput compress_store(const WeightStore& store, const CompressionPlan& plan,
                                 StartNorm start = StartNorm::l2, unsigned jobs = 1);

/// Reconstruction rounded to each layer's dtype.
WeightTensor reconstruct(const CompressedLayer& c);

WeightStore decompress_store(const std::vector<CompressedLayer>& container, const std::string& model,
                             unsigned jobs = 1);

struct LayerCheck {
    std::string name;
    Method method = Method::passthrough;
    double max_abs_error = 0.0;
    std::optional<double> nsse;
    bool ok = true;
    std::string problem;
};

struct VerifyResult {
    std::vector<LayerCheck> layers;
    double max_abs_error = 0.0;
    bool ok = true;
};

/// Checks each record against the original tensors:
///  - passthrough: values equal the original at dtype precision;
///  - l1_prune: kept values equal the original and no dropped column has a
///    larger l1 norm than a kept one;
///  - dct: |w|^2 - |z|^2 = |w - w~|^2 (the coefficients are the orthogonal
///    projection of the reordered rows), and exact recovery when t = L.
VerifyResult verify_container(const std::vector<CompressedLayer>& container, const WeightStore& store,
                              unsigned jobs = 1);

}  // namespace spectral
