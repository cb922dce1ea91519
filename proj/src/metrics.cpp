#include "spectral/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace spectral {

double nsse(const WeightTensor& w, const WeightTensor& w_tilde) {
    if (w.shape.as4() != w_tilde.shape.as4() || w.data.size() != w_tilde.data.size())
        throw InputError("nsse: shape mismatch for '" + w.name + "': " + w.shape.str() + " vs " +
                         w_tilde.shape.str());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < w.data.size(); ++i) {
        const double d = w.data[i] - w_tilde.data[i];
        num += d * d;
        den += w.data[i] * w.data[i];
    }
    if (den == 0.0) throw InputError("nsse: reference tensor '" + w.name + "' is all zero");
    return num / den;
}

FootprintTotals& FootprintTotals::operator+=(const LayerFootprint& l) {
    original += l.original;
    stored += l.stored;
    trainable += l.trainable;
    index += l.index;
    bytes += l.bytes;
    return *this;
}

void FootprintReport::add(LayerFootprint l) {
    all += l;
    if (l.weight) weights_only += l;
    layers.push_back(std::move(l));
}

std::optional<double> FootprintReport::aggregate_nsse() const {
    double num = 0.0, den = 0.0;
    for (const auto& x : layers) {
        if (!x.nsse) continue;
        num += *x.nsse * static_cast<double>(x.original);
        den += static_cast<double>(x.original);
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

namespace {

LayerFootprint account(const std::string& name, const Shape& shape, Method method, std::uint32_t g, std::uint32_t t,
                       DType dtype) {
    LayerFootprint f;
    f.name = name;
    f.method = method;
    f.g = g;
    f.t = t;
    f.weight = shape.is_weight();
    f.original = shape.elements();
    f.trainable = method == Method::passthrough ? f.original : std::uint64_t{g} * t;
    f.index = method == Method::dct ? f.original / g : method == Method::l1_prune ? t : 0;
    f.stored = f.trainable + f.index;
    f.bytes = f.trainable * dtype_size(dtype) + f.index * 4;
    return f;
}

}  // namespace

LayerFootprint layer_footprint(const CompressedLayer& c) {
    return account(c.name, c.shape, c.method, c.g, c.t, c.dtype);
}

FootprintReport footprint(const std::vector<CompressedLayer>& container, const WeightStore& original) {
    std::map<std::string, const WeightTensor*> by_name;
    for (const auto& t : original.layers) by_name[t.name] = &t;
    if (by_name.size() != container.size())
        throw InputError("container has " + std::to_string(container.size()) + " records, store has " +
                         std::to_string(by_name.size()) + " layers");
    FootprintReport report;
    for (const auto& c : container) {
        auto it = by_name.find(c.name);
        if (it == by_name.end()) throw InputError("container layer '" + c.name + "' not found in store");
        if (it->second->shape.elements() != c.shape.elements())
            throw InputError("layer '" + c.name + "': shape differs between container and store");
        report.add(layer_footprint(c));
    }
    return report;
}

FootprintReport footprint_from_plan(const CompressionPlan& plan) {
    FootprintReport report;
    for (const auto& e : plan.entries) {
        auto f = account(e.name, e.shape, e.method, e.g, e.t, DType::f32);
        if (e.method != Method::passthrough) f.r = e.r;
        report.add(std::move(f));
    }
    return report;
}

namespace {

nlohmann::json totals_json(const FootprintTotals& t) {
    return {{"original", t.original},   {"stored", t.stored},
            {"trainable", t.trainable}, {"index", t.index},
            {"bytes", t.bytes},         {"trainable_fraction", t.trainable_fraction()},
            {"size_fraction", t.size_fraction()}};
}

}  // namespace

nlohmann::json report_to_json(const FootprintReport& report) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : report.layers) {
        layers.push_back({{"layer", l.name},
                          {"method", method_name(l.method)},
                          {"g", l.g},
                          {"r", l.r ? nlohmann::json(*l.r) : nlohmann::json()},
                          {"t", l.t},
                          {"weight", l.weight},
                          {"original", l.original},
                          {"stored", l.stored},
                          {"trainable", l.trainable},
                          {"index", l.index},
                          {"bytes", l.bytes},
                          {"nsse", l.nsse ? nlohmann::json(*l.nsse) : nlohmann::json()}});
    }
    return {{"layers", layers},
            {"totals", totals_json(report.all)},
            {"totals_weights_only", totals_json(report.weights_only)},
            {"aggregate_nsse", report.aggregate_nsse() ? nlohmann::json(*report.aggregate_nsse()) : nlohmann::json()}};
}

std::string report_to_csv(const FootprintReport& report) {
    std::ostringstream os;
    os << "layer,method,g,r,t,original,stored,trainable,index,nsse\n";
    os << std::setprecision(17);
    for (const auto& l : report.layers) {
        os << l.name << ',' << method_name(l.method) << ',' << l.g << ',';
        if (l.r) os << *l.r;
        os << ',' << l.t << ',' << l.original << ',' << l.stored << ',' << l.trainable << ',' << l.index << ',';
        if (l.nsse) os << *l.nsse;
        os << '\n';
    }
    return os.str();
}

FeatureStack conv2d_reference(const FeatureStack& x, const WeightTensor& w) {
    const auto [m, n, k, k2] = w.shape.as4();
    if (!w.shape.is_weight() || k != k2) throw InputError("conv2d: weight must be m x n x k x k");
    if (x.channels != n)
        throw InputError("conv2d: input has " + std::to_string(x.channels) + " channels, weight expects " +
                         std::to_string(n));
    if (k > x.height || k > x.width) throw InputError("conv2d: kernel larger than input");
    if (x.data.size() != std::size_t{x.channels} * x.height * x.width)
        throw InputError("conv2d: input data size mismatch");

    FeatureStack y{m, x.height - k + 1, x.width - k + 1, {}};
    y.data.assign(std::size_t{m} * y.height * y.width, 0.0);
    for (std::uint32_t j = 0; j < m; ++j)
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t dy = 0; dy < k; ++dy)
                for (std::uint32_t dx = 0; dx < k; ++dx) {
                    const double wv = w.data[((std::size_t{j} * n + i) * k + dy) * k + dx];
                    for (std::uint32_t oy = 0; oy < y.height; ++oy)
                        for (std::uint32_t ox = 0; ox < y.width; ++ox)
                            y.data[(std::size_t{j} * y.height + oy) * y.width + ox] += wv * x.at(i, oy + dy, ox + dx);
                }
    return y;
}

}  // namespace spectral
