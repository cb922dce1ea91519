#include "spectral/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectral/dct.hpp"

namespace spectral {

GroupMatrix reshape_to_groups(const WeightTensor& w, std::uint32_t g) {
    const std::uint64_t p = w.elements();
    if (w.data.size() != p) throw InputError("layer '" + w.name + "': data length does not match shape");
    if (g == 0 || p % g != 0)
        throw InputError("layer '" + w.name + "': g=" + std::to_string(g) + " does not divide element count " +
                         std::to_string(p));
    return GroupMatrix{Matrix(g, p / g, w.data), w.shape};
}

WeightTensor reshape_from_groups(const GroupMatrix& gm, std::string name, DType dtype) {
    if (gm.mat.data.size() != gm.origin.elements())
        throw InputError("layer '" + name + "': group matrix does not match origin shape");
    return WeightTensor{std::move(name), gm.origin, dtype, gm.mat.data};
}

std::uint32_t truncation_length(std::uint64_t row_length, double r) {
    if (!(r >= 1.0)) throw InputError("compression rate r must be >= 1, got " + std::to_string(r));
    const auto t = static_cast<std::uint64_t>(std::floor(static_cast<double>(row_length) / r));
    if (t < 1)
        throw InputError("r=" + std::to_string(r) + " leaves no coefficients for row length " +
                         std::to_string(row_length));
    return static_cast<std::uint32_t>(t);
}

namespace {

void require_weight(const WeightTensor& w) {
    if (!w.shape.is_weight()) throw InputError("layer '" + w.name + "': 1-D tensors are not compressible");
}

void require_t(const WeightTensor& w, std::uint64_t len, std::uint32_t t) {
    if (t < 1 || t > len)
        throw InputError("layer '" + w.name + "': t=" + std::to_string(t) + " outside [1, " + std::to_string(len) +
                         "]");
}

}  // namespace

CompressedLayer compress_layer(const WeightTensor& w, std::uint32_t g, double r, const DctOptions& opts) {
    if (g == 0 || w.elements() % g != 0) reshape_to_groups(w, g);  // throws with the standard message
    return compress_layer_t(w, g, truncation_length(w.elements() / g, r), opts);
}

CompressedLayer compress_layer_t(const WeightTensor& w, std::uint32_t g, std::uint32_t t, const DctOptions& opts) {
    require_weight(w);
    const GroupMatrix gm = reshape_to_groups(w, g);
    const std::size_t len = gm.length();
    require_t(w, len, t);

    const Ordering ord = opts.reorder ? compute_ordering(gm.mat, opts.metric, opts.start) : Ordering::identity(len);
    const Matrix sorted = apply_ordering(gm.mat, ord);
    const dct::TruncatedBasis basis(dct::cached_basis(len), t);

    CompressedLayer c;
    c.name = w.name;
    c.shape = w.shape;
    c.method = Method::dct;
    c.dtype = w.dtype;
    c.g = g;
    c.t = t;
    c.coefficients.resize(std::size_t{g} * t);
    for (std::size_t j = 0; j < g; ++j) {
        const std::span<const double> row(sorted.data.data() + j * len, len);
        basis.base().forward(row, std::span<double>(c.coefficients.data() + j * t, t));
    }
    c.indices = ord.forward;
    return c;
}

CompressedLayer l1_prune_layer(const WeightTensor& w, std::uint32_t g, double r) {
    if (g == 0 || w.elements() % g != 0) reshape_to_groups(w, g);
    return l1_prune_layer_t(w, g, truncation_length(w.elements() / g, r));
}

CompressedLayer l1_prune_layer_t(const WeightTensor& w, std::uint32_t g, std::uint32_t t) {
    require_weight(w);
    const GroupMatrix gm = reshape_to_groups(w, g);
    const std::size_t len = gm.length();
    require_t(w, len, t);

    std::vector<double> norms(len, 0.0);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < len; ++j) norms[j] += std::abs(gm.mat(i, j));
    std::vector<std::uint32_t> order(len);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return norms[a] > norms[b]; });
    std::vector<std::uint32_t> kept(order.begin(), order.begin() + t);
    std::sort(kept.begin(), kept.end());

    CompressedLayer c;
    c.name = w.name;
    c.shape = w.shape;
    c.method = Method::l1_prune;
    c.dtype = w.dtype;
    c.g = g;
    c.t = t;
    c.coefficients.resize(std::size_t{g} * t);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t k = 0; k < t; ++k) c.coefficients[i * t + k] = gm.mat(i, kept[k]);
    c.indices = std::move(kept);
    return c;
}

CompressedLayer passthrough_layer(const WeightTensor& w) {
    if (w.data.size() != w.elements()) throw InputError("layer '" + w.name + "': data length does not match shape");
    CompressedLayer c;
    c.name = w.name;
    c.shape = w.shape;
    c.method = Method::passthrough;
    c.dtype = w.dtype;
    c.g = 1;
    c.t = static_cast<std::uint32_t>(w.elements());
    c.coefficients = w.data;
    return c;
}

WeightTensor decompress_layer(const CompressedLayer& c) {
    validate(c);
    if (c.method == Method::passthrough) return WeightTensor{c.name, c.shape, c.dtype, c.coefficients};

    const std::size_t g = c.g, t = c.t;
    const std::size_t len = c.group_length();
    GroupMatrix gm{Matrix(g, len), c.shape};
    if (c.method == Method::l1_prune) {
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t k = 0; k < t; ++k) gm.mat(i, c.indices[k]) = c.coefficients[i * t + k];
        return reshape_from_groups(gm, c.name, c.dtype);
    }

    const dct::TruncatedBasis basis(dct::cached_basis(len), t);
    Matrix sorted(g, len);
    for (std::size_t i = 0; i < g; ++i)
        basis.base().inverse(std::span<const double>(c.coefficients.data() + i * t, t),
                             std::span<double>(sorted.data.data() + i * len, len));
    gm.mat = apply_inverse_ordering(sorted, Ordering::from_forward(c.indices));
    return reshape_from_groups(gm, c.name, c.dtype);
}

void round_coefficients(CompressedLayer& c) {
    for (auto& v : c.coefficients) v = round_to(c.dtype, v);
}

}  // namespace spectral
