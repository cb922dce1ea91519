#include "spectral/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spectral/codec.hpp"
#include "spectral/parallel.hpp"

namespace spectral {

CompressionPlan build_plan(const std::vector<ManifestEntry>& entries, const PlanRequest& req) {
    const auto layers = make_layer_specs(entries, req.policy);
    switch (req.strategy) {
        case Strategy::uniform:
            if (!req.r) throw InputError("uniform strategy needs --r");
            return plan_uniform(layers, *req.r, req.g, req.metric, req.method);
        case Strategy::progressive_r:
            if (!req.r_prime) throw InputError("progressive-r strategy needs --r-prime");
            return plan_progressive_r(layers, *req.r_prime, req.g, req.metric, req.method);
        case Strategy::progressive_g:
            if (!req.r) throw InputError("progressive-g strategy needs --r");
            return plan_progressive_g(layers, *req.r, req.metric, req.method);
    }
    throw InputError("unknown strategy");
}

void check_plan_matches(const CompressionPlan& plan, const WeightStore& store) {
    if (plan.entries.size() != store.layers.size())
        throw InputError("plan has " + std::to_string(plan.entries.size()) + " entries, store has " +
                         std::to_string(store.layers.size()) + " layers");
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
        const auto& e = plan.entries[i];
        const auto& l = store.layers[i];
        if (e.name != l.name) throw InputError("plan entry " + std::to_string(i) + " is '" + e.name + "', store has '" + l.name + "'");
        if (e.shape.elements() != l.shape.elements()) throw InputError("plan entry '" + e.name + "': shape mismatch");
    }
}

WeightTensor reconstruct(const CompressedLayer& c) {
    WeightTensor w = decompress_layer(c);
    for (auto& v : w.data) v = round_to(w.dtype, v);
    return w;
}

CompressionOutput compress_store(const WeightStore& store, const CompressionPlan& plan, StartNorm start,
                                 unsigned jobs) {
    check_plan_matches(plan, store);
    const std::size_t n = store.layers.size();
    std::vector<CompressedLayer> records(n);
    std::vector<LayerFootprint> rows(n);

    parallel_for(n, jobs, [&](std::size_t i) {
        const auto& e = plan.entries[i];
        const auto& w = store.layers[i];
        CompressedLayer c;
        switch (e.method) {
            case Method::dct: c = compress_layer_t(w, e.g, e.t, DctOptions{e.metric, start, true}); break;
            case Method::l1_prune: c = l1_prune_layer_t(w, e.g, e.t); break;
            case Method::passthrough: c = passthrough_layer(w); break;
        }
        round_coefficients(c);
        LayerFootprint f = layer_footprint(c);
        if (e.method != Method::passthrough) {
            f.r = e.r;
            const bool nonzero = std::any_of(w.data.begin(), w.data.end(), [](double v) { return v != 0.0; });
            if (nonzero) f.nsse = nsse(w, reconstruct(c));
        }
        records[i] = std::move(c);
        rows[i] = std::move(f);
    });

    CompressionOutput out;
    out.container = std::move(records);
    for (auto& r : rows) out.report.add(std::move(r));
    return out;
}

WeightStore decompress_store(const std::vector<CompressedLayer>& container, const std::string& model,
                             unsigned jobs) {
    WeightStore store;
    store.model = model;
    store.layers.resize(container.size());
    parallel_for(container.size(), jobs, [&](std::size_t i) { store.layers[i] = reconstruct(container[i]); });
    return store;
}

namespace {

double tolerance(DType dt) { return dt == DType::f32 ? 1e-5 : 1e-9; }

LayerCheck check_layer(const CompressedLayer& c, const WeightTensor& w) {
    LayerCheck chk{c.name, c.method, 0.0, std::nullopt, true, {}};
    auto fail = [&](std::string why) {
        chk.ok = false;
        if (chk.problem.empty()) chk.problem = std::move(why);
    };
    if (c.shape.elements() != w.elements()) {
        fail("shape differs from store");
        return chk;
    }
    const double tol = tolerance(c.dtype);
    double scale = 0.0, energy = 0.0;
    for (double v : w.data) {
        scale = std::max(scale, std::abs(v));
        energy += v * v;
    }

    const WeightTensor rec = decompress_layer(c);
    double err2 = 0.0;
    for (std::size_t i = 0; i < rec.data.size(); ++i) {
        const double d = w.data[i] - rec.data[i];
        chk.max_abs_error = std::max(chk.max_abs_error, std::abs(d));
        err2 += d * d;
    }
    if (energy > 0.0) chk.nsse = err2 / energy;

    switch (c.method) {
        case Method::passthrough:
            if (chk.max_abs_error > tol * std::max(1.0, scale)) fail("passthrough values differ from original");
            break;
        case Method::l1_prune: {
            const GroupMatrix gm = reshape_to_groups(w, c.g);
            const std::size_t len = gm.length();
            std::vector<double> norms(len, 0.0);
            for (std::size_t i = 0; i < c.g; ++i)
                for (std::size_t j = 0; j < len; ++j) norms[j] += std::abs(gm.mat(i, j));
            std::vector<bool> kept(len, false);
            double min_kept = INFINITY;
            for (std::size_t k = 0; k < c.t; ++k) {
                const auto col = c.indices[k];
                kept[col] = true;
                min_kept = std::min(min_kept, norms[col]);
                for (std::size_t i = 0; i < c.g; ++i)
                    if (std::abs(c.coefficients[i * c.t + k] - gm.mat(i, col)) > tol * std::max(1.0, scale))
                        fail("kept values differ from original");
            }
            for (std::size_t j = 0; j < len; ++j)
                if (!kept[j] && norms[j] > min_kept * (1 + tol)) fail("a dropped column outweighs a kept one");
            break;
        }
        case Method::dct: {
            double coef2 = 0.0;
            for (double v : c.coefficients) coef2 += v * v;
            if (std::abs((energy - coef2) - err2) > tol * std::max(energy, 1e-300))
                fail("coefficients are not the truncated projection of the original");
            if (c.t == c.group_length() && chk.max_abs_error > tol * std::max(1.0, scale))
                fail("full-rank record does not reproduce the original");
            break;
        }
    }
    return chk;
}

}  // namespace

VerifyResult verify_container(const std::vector<CompressedLayer>& container, const WeightStore& store,
                              unsigned jobs) {
    std::map<std::string, const WeightTensor*> by_name;
    for (const auto& t : store.layers) by_name[t.name] = &t;

    VerifyResult result;
    result.layers.resize(container.size());
    parallel_for(container.size(), jobs, [&](std::size_t i) {
        const auto& c = container[i];
        auto it = by_name.find(c.name);
        if (it == by_name.end()) {
            result.layers[i] = LayerCheck{c.name, c.method, 0.0, std::nullopt, false, "layer missing from store"};
            return;
        }
        try {
            result.layers[i] = check_layer(c, *it->second);
        } catch (const InputError& e) {
            result.layers[i] = LayerCheck{c.name, c.method, 0.0, std::nullopt, false, e.what()};
        }
    });
    if (container.size() != store.layers.size()) result.ok = false;
    for (const auto& l : result.layers) {
        result.max_abs_error = std::max(result.max_abs_error, l.max_abs_error);
        result.ok = result.ok && l.ok;
    }
    return result;
}

}  // namespace spectral
