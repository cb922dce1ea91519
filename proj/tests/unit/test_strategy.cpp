#include <doctest.h>

#include <cmath>

#include "spectral/codec.hpp"
#include "spectral/strategy.hpp"
#include "support.hpp"

using namespace spectral;

namespace {

LayerSpec spec(std::string name, std::vector<std::uint32_t> dims, bool include = true) {
    Shape s{std::move(dims)};
    return LayerSpec{std::move(name), s, s.elements(), s.is_weight(), include && s.is_weight()};
}

std::vector<LayerSpec> resnet50(const InclusionPolicy& policy = {}) {
    return make_layer_specs(read_manifest(SPECTRAL_FIXTURE_DIR "/resnet50").layers, policy);
}

}  // namespace

TEST_CASE("select_reference_layer") {
    std::vector<LayerSpec> layers = {spec("a", {10, 100}), spec("b", {5, 100}), spec("c", {20, 100})};
    CHECK(select_reference_layer(layers).name == "b");
    layers[1].include = false;
    CHECK(select_reference_layer(layers).name == "a");
    for (auto& l : layers) l.include = false;
    CHECK_THROWS_AS(select_reference_layer(layers), InputError);

    std::vector<LayerSpec> tie = {spec("x", {4, 4}), spec("y", {2, 8})};
    CHECK(select_reference_layer(tie).name == "x");
}

TEST_CASE("select_reference_layer: ResNet-50 without the stem conv") {
    const auto layers = resnet50();
    CHECK_FALSE(layers.front().include);
    const LayerSpec& ref = select_reference_layer(layers);
    CHECK(ref.name == "layer1.0.conv1.weight");
    CHECK(ref.shape.dims == std::vector<std::uint32_t>{64, 64, 1, 1});
    CHECK(ref.params == 4096);
}

TEST_CASE("progressive rate and group formulas") {
    CHECK(progressive_rate(500, 500, 0.75) == 1.75);
    CHECK(progressive_rate(4 * 500, 500, 0.5) == 2.0);
    CHECK(progressive_groups(500, 500) == 2);
    CHECK(progressive_groups(64 * 500, 500) == 8);
    CHECK(progressive_groups(32 * 500, 500) == 4);
    CHECK(progressive_groups(16 * 500 - 1, 500) == 2);
    CHECK(progressive_groups(16 * 500, 500) == 4);
    // floating evaluation of the same formula
    for (std::uint64_t p = 500; p < 2'000'000; p = p * 3 / 2 + 7) {
        const double e = std::floor(std::log2(std::sqrt(double(p)) / std::sqrt(500.0)));
        const auto expect = static_cast<std::uint32_t>(std::max(2.0, std::exp2(e)));
        CHECK(progressive_groups(p, 500) == expect);
    }
}

TEST_CASE("plan_uniform") {
    SUBCASE("r=1 plan reproduces every layer") {
        std::mt19937_64 rng(1);
        std::vector<WeightTensor> ws = {testing::random_tensor(rng, "a", {4, 4, 3, 3}),
                                        testing::random_tensor(rng, "b", {8, 4, 1, 1})};
        std::vector<LayerSpec> layers = {spec("a", {4, 4, 3, 3}), spec("b", {8, 4, 1, 1})};
        const auto plan = plan_uniform(layers, 1.0, 4);
        for (std::size_t i = 0; i < ws.size(); ++i) {
            const auto& e = plan.entries[i];
            REQUIRE(e.method == Method::dct);
            CHECK(e.t == ws[i].elements() / 4);
            const auto rec = decompress_layer(compress_layer_t(ws[i], e.g, e.t));
            for (std::size_t k = 0; k < rec.data.size(); ++k) CHECK(std::abs(rec.data[k] - ws[i].data[k]) < 1e-9);
        }
    }
    SUBCASE("g=4, r=8 on ResNet-50") {
        const auto plan = plan_uniform(resnet50(), 8.0, 4);
        CHECK(plan.warnings.empty());
        std::size_t compressed = 0;
        for (const auto& e : plan.entries) {
            if (e.method != Method::dct) continue;
            ++compressed;
            CHECK(e.g == 4);
            CHECK(e.r == 8.0);
            CHECK(e.t == e.params() / 4 / 8);
        }
        CHECK(compressed == 53);
        CHECK(plan.entries.front().method == Method::passthrough);
    }
    SUBCASE("indivisible layer degrades to passthrough with a report") {
        const auto plan = plan_uniform({spec("tiny", {4, 4, 1, 1})}, 2.0, 32);
        CHECK(plan.entries[0].method == Method::passthrough);
        REQUIRE(plan.warnings.size() == 1);
        CHECK(plan.warnings[0].find("tiny") != std::string::npos);
    }
    SUBCASE("t < 1 degrades to passthrough") {
        const auto plan = plan_uniform({spec("tiny", {2, 2, 1, 1})}, 8.0, 1);
        CHECK(plan.entries[0].method == Method::passthrough);
        CHECK(plan.warnings.size() == 1);
    }
    SUBCASE("bad hyperparameters") {
        CHECK_THROWS_AS(plan_uniform({spec("a", {2, 2})}, 0.5, 1), InputError);
        CHECK_THROWS_AS(plan_uniform({spec("a", {2, 2})}, 2.0, 0), InputError);
    }
}

TEST_CASE("plan_progressive_r") {
    std::vector<LayerSpec> layers = {spec("ref", {10, 10, 1, 1}), spec("big", {20, 20, 1, 1}),
                                     spec("bias", {20})};
    const auto plan = plan_progressive_r(layers, 0.5, 4);
    CHECK(plan.reference == "ref");
    CHECK(plan.entries[0].r == 1.5);
    CHECK(plan.entries[1].r == 2.0);
    CHECK(plan.entries[1].t == 50);  // floor(100 / 2)
    CHECK(plan.entries[2].method == Method::passthrough);
    CHECK_THROWS_AS(plan_progressive_r(layers, 0.0, 4), InputError);
}

TEST_CASE("plan_progressive_g") {
    std::vector<LayerSpec> layers = {spec("ref", {8, 8, 1, 1}), spec("x64", {64, 64, 1, 1}),
                                     spec("x32", {32, 64, 1, 1})};
    const auto plan = plan_progressive_g(layers, 2.0);
    CHECK(plan.entries[0].g == 2);
    CHECK(plan.entries[1].g == 8);
    CHECK(plan.entries[2].g == 4);
    for (const auto& e : plan.entries) CHECK(e.r == 2.0);
}

TEST_CASE("property: progressive plans on ResNet-50") {
    const auto layers = resnet50();
    for (double rp : {0.125, 0.25, 0.5, 1.0, 2.0}) {
        const auto plan = plan_progressive_r(layers, rp, 4);
        for (const auto& a : plan.entries)
            for (const auto& b : plan.entries)
                if (a.method == Method::dct && b.method == Method::dct && a.params() >= b.params())
                    CHECK(a.r >= b.r);
        CHECK(plan_to_json(plan) == plan_to_json(plan_progressive_r(layers, rp, 4)));
    }
    for (double r : {2.0, 8.0, 32.0}) {
        const auto plan = plan_progressive_g(layers, r);
        for (const auto& e : plan.entries) {
            if (e.method != Method::dct) continue;
            CHECK(e.g >= 2);
            CHECK((e.g & (e.g - 1)) == 0);
        }
    }
}

TEST_CASE("property: every planned entry compresses") {
    std::mt19937_64 rng(2);
    std::vector<WeightTensor> ws;
    std::vector<ManifestEntry> entries;
    for (std::vector<std::uint32_t> dims :
         {std::vector<std::uint32_t>{8, 3, 3, 3}, {16, 8, 1, 1}, {6, 5, 3, 3}, {7, 7, 1, 1}, {10, 16, 1, 1}}) {
        ws.push_back(testing::random_tensor(rng, "l" + std::to_string(ws.size()), dims));
        entries.push_back({ws.back().name, ws.back().shape, {}});
    }
    const auto layers = make_layer_specs(entries, InclusionPolicy{});
    for (const auto& plan : {plan_uniform(layers, 4.0, 4), plan_progressive_r(layers, 1.0, 2),
                             plan_progressive_g(layers, 3.0)}) {
        for (std::size_t i = 0; i < ws.size(); ++i) {
            const auto& e = plan.entries[i];
            if (e.method == Method::passthrough) continue;
            CHECK_NOTHROW(compress_layer_t(ws[i], e.g, e.t));
        }
    }
}

TEST_CASE("inclusion policy") {
    const std::vector<ManifestEntry> entries = {{"stem", Shape{{8, 3, 3, 3}}, {}},
                                                {"bn", Shape{{8}}, {}},
                                                {"features.1.conv", Shape{{8, 8, 1, 1}}, {}},
                                                {"features.8.conv", Shape{{16, 8, 1, 1}}, {}},
                                                {"features.8.dw", Shape{{16, 1, 3, 3}}, {}},
                                                {"head", Shape{{10, 16}}, {}}};
    auto inc = [](const std::vector<LayerSpec>& ls) {
        std::vector<bool> v;
        for (const auto& l : ls) v.push_back(l.include);
        return v;
    };
    CHECK(inc(make_layer_specs(entries, InclusionPolicy{})) ==
          std::vector<bool>{false, false, true, true, true, true});
    CHECK(inc(make_layer_specs(entries, InclusionPolicy::preset("mobilenet_v2"))) ==
          std::vector<bool>{false, false, false, true, false, true});
    InclusionPolicy p;
    p.exclude_first = false;
    p.exclude = {"head"};
    p.min_params = 100;
    CHECK(inc(make_layer_specs(entries, p)) == std::vector<bool>{true, false, false, true, true, false});
    CHECK_THROWS_AS(InclusionPolicy::preset("vgg"), InputError);
}

TEST_CASE("plan JSON round trip and validation") {
    const auto plan = plan_progressive_r(resnet50(), 0.25, 8, DistanceMetric::cosine, Method::l1_prune);
    const auto back = plan_from_json(plan_to_json(plan));
    CHECK(plan_to_json(back) == plan_to_json(plan));
    CHECK(back.entries.size() == plan.entries.size());
    CHECK(back.metric == DistanceMetric::cosine);

    auto j = plan_to_json(plan);
    j["entries"][3]["t"] = 0;
    CHECK_THROWS_AS(plan_from_json(j), InputError);
    j = plan_to_json(plan);
    j["entries"][3]["g"] = 7;
    CHECK_THROWS_AS(plan_from_json(j), InputError);
    CHECK_THROWS_AS(plan_from_json(nlohmann::json{{"strategy", "uniform"}}), InputError);
}
