#include "spectral/strategy.hpp"

#include <cmath>

#include <algorithm>

namespace spectral {

InclusionPolicy InclusionPolicy::preset(const std::string& name) {
    InclusionPolicy p;
    if (name == "default" || name == "resnet50") return p;
    if (name == "mobilenet_v2") {
        // torchvision layout: features.0 is the stem, features.1-7 the
        // first seven inverted-residual blocks
        p.exclude_first = false;
        p.pointwise_only = true;
        for (int i = 0; i <= 7; ++i) p.exclude.push_back("features." + std::to_string(i) + ".*");
        return p;
    }
    throw InputError("unknown policy preset '" + name + "'");
}

bool InclusionPolicy::excludes(const std::string& name) const {
    for (const auto& pat : exclude) {
        if (!pat.empty() && pat.back() == '*') {
            if (name.compare(0, pat.size() - 1, pat, 0, pat.size() - 1) == 0) return true;
        } else if (name == pat) {
            return true;
        }
    }
    return false;
}

std::vector<LayerSpec> make_layer_specs(const std::vector<ManifestEntry>& entries, const InclusionPolicy& policy) {
    std::vector<LayerSpec> out;
    bool first_seen = false;
    for (const auto& e : entries) {
        LayerSpec s{e.name, e.shape, e.shape.elements(), e.shape.is_weight(), false};
        if (s.weight) {
            const bool is_first = !first_seen;
            first_seen = true;
            s.include = !(is_first && policy.exclude_first) && !policy.excludes(s.name) &&
                        s.params >= policy.min_params && !(policy.pointwise_only && s.shape.as4()[2] != 1);
        }
        out.push_back(std::move(s));
    }
    return out;
}

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::uniform: return "uniform";
        case Strategy::progressive_r: return "progressive-r";
        case Strategy::progressive_g: return "progressive-g";
    }
    return "?";
}

Strategy parse_strategy(const std::string& s) {
    if (s == "uniform") return Strategy::uniform;
    if (s == "progressive-r") return Strategy::progressive_r;
    if (s == "progressive-g") return Strategy::progressive_g;
    throw InputError("unknown strategy '" + s + "'");
}

const LayerSpec& select_reference_layer(const std::vector<LayerSpec>& layers) {
    const LayerSpec* best = nullptr;
    for (const auto& l : layers)
        if (l.include && (!best || l.params < best->params)) best = &l;
    if (!best) throw InputError("no layer is selected for compression");
    return *best;
}

double progressive_rate(std::uint64_t params, std::uint64_t ref_params, double r_prime) {
    return 1.0 + r_prime * std::sqrt(static_cast<double>(params)) / std::sqrt(static_cast<double>(ref_params));
}

std::uint32_t progressive_groups(std::uint64_t params, std::uint64_t ref_params) {
    // 2^e <= sqrt(p / p_ref)  <=>  4^e * p_ref <= p
    std::uint32_t g = 1;
    long double bound = static_cast<long double>(ref_params) * 4;
    while (bound <= static_cast<long double>(params)) {
        g *= 2;
        bound *= 4;
    }
    return std::max<std::uint32_t>(2, g);
}

namespace {

// Fills method/t for one entry, degrading to passthrough where the
// parameters cannot be applied.
PlanEntry make_entry(const LayerSpec& l, std::uint32_t g, double r, DistanceMetric metric, Method method,
                     std::vector<std::string>& warnings) {
    PlanEntry e{l.name, l.shape, Method::passthrough, 1, 1.0, static_cast<std::uint32_t>(l.params), metric, {}};
    if (!l.weight) {
        e.note = "1-D tensor";
        return e;
    }
    if (!l.include) {
        e.note = "excluded by policy";
        return e;
    }
    if (g == 0 || l.params % g != 0) {
        e.note = "g=" + std::to_string(g) + " does not divide " + std::to_string(l.params);
        warnings.push_back(l.name + ": " + e.note);
        return e;
    }
    const std::uint64_t len = l.params / g;
    const double t = std::floor(static_cast<double>(len) / r);
    if (t < 1) {
        e.note = "r=" + std::to_string(r) + " leaves t < 1";
        warnings.push_back(l.name + ": " + e.note);
        return e;
    }
    e.method = method;
    e.g = g;
    e.r = r;
    e.t = static_cast<std::uint32_t>(t);
    return e;
}

void check_rate(double r) {
    if (!(r >= 1.0)) throw InputError("compression rate r must be >= 1");
}

}  // namespace

CompressionPlan plan_uniform(const std::vector<LayerSpec>& layers, double r, std::uint32_t g, DistanceMetric metric,
                             Method method) {
    check_rate(r);
    if (g < 1) throw InputError("g must be >= 1");
    CompressionPlan plan{Strategy::uniform, method, metric, g, r, 0.0, {}, {}, {}};
    for (const auto& l : layers) plan.entries.push_back(make_entry(l, g, r, metric, method, plan.warnings));
    return plan;
}

CompressionPlan plan_progressive_r(const std::vector<LayerSpec>& layers, double r_prime, std::uint32_t g,
                                   DistanceMetric metric, Method method) {
    if (!(r_prime > 0.0)) throw InputError("r' must be > 0");
    if (g < 1) throw InputError("g must be >= 1");
    const LayerSpec& ref = select_reference_layer(layers);
    CompressionPlan plan{Strategy::progressive_r, method, metric, g, 0.0, r_prime, ref.name, {}, {}};
    for (const auto& l : layers) {
        const double r = l.include ? progressive_rate(l.params, ref.params, r_prime) : 1.0;
        plan.entries.push_back(make_entry(l, g, r, metric, method, plan.warnings));
    }
    return plan;
}

CompressionPlan plan_progressive_g(const std::vector<LayerSpec>& layers, double r, DistanceMetric metric,
                                   Method method) {
    check_rate(r);
    const LayerSpec& ref = select_reference_layer(layers);
    CompressionPlan plan{Strategy::progressive_g, method, metric, 0, r, 0.0, ref.name, {}, {}};
    for (const auto& l : layers) {
        const std::uint32_t g = l.include ? progressive_groups(l.params, ref.params) : 1;
        plan.entries.push_back(make_entry(l, g, r, metric, method, plan.warnings));
    }
    return plan;
}

nlohmann::json plan_to_json(const CompressionPlan& plan) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : plan.entries) {
        nlohmann::json je = {{"name", e.name},     {"shape", e.shape.dims}, {"method", method_name(e.method)},
                             {"g", e.g},           {"r", e.r},              {"t", e.t},
                             {"metric", metric_name(e.metric)}};
        if (!e.note.empty()) je["note"] = e.note;
        entries.push_back(std::move(je));
    }
    return {{"strategy", strategy_name(plan.strategy)},
            {"method", method_name(plan.method)},
            {"metric", metric_name(plan.metric)},
            {"g", plan.g},
            {"r", plan.r},
            {"r_prime", plan.r_prime},
            {"reference_layer", plan.reference},
            {"warnings", plan.warnings},
            {"entries", entries}};
}

CompressionPlan plan_from_json(const nlohmann::json& j) {
    try {
        CompressionPlan plan;
        plan.strategy = parse_strategy(j.at("strategy").get<std::string>());
        plan.method = parse_method(j.value("method", std::string{"dct"}));
        plan.metric = parse_metric(j.value("metric", std::string{"euclidean"}));
        plan.g = j.value("g", 0u);
        plan.r = j.value("r", 0.0);
        plan.r_prime = j.value("r_prime", 0.0);
        plan.reference = j.value("reference_layer", std::string{});
        plan.warnings = j.value("warnings", std::vector<std::string>{});
        for (const auto& je : j.at("entries")) {
            PlanEntry e;
            e.name = je.at("name").get<std::string>();
            e.shape.dims = je.at("shape").get<std::vector<std::uint32_t>>();
            validate_shape(e.shape, e.name);
            e.method = parse_method(je.at("method").get<std::string>());
            e.g = je.at("g").get<std::uint32_t>();
            e.r = je.at("r").get<double>();
            e.t = je.at("t").get<std::uint32_t>();
            e.metric = parse_metric(je.value("metric", std::string{"euclidean"}));
            e.note = je.value("note", std::string{});
            if (e.method == Method::passthrough) {
                if (e.g != 1 || e.t != e.params())
                    throw InputError("plan entry '" + e.name + "': passthrough needs g=1, t=element count");
            } else {
                if (!e.shape.is_weight()) throw InputError("plan entry '" + e.name + "': 1-D tensor");
                if (e.g == 0 || e.params() % e.g != 0)
                    throw InputError("plan entry '" + e.name + "': g does not divide element count");
                if (e.t < 1 || e.t > e.params() / e.g) throw InputError("plan entry '" + e.name + "': bad t");
            }
            plan.entries.push_back(std::move(e));
        }
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed plan: ") + e.what());
    }
}

}  // namespace spectral
