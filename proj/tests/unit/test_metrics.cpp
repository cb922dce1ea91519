#include <doctest.h>

#include "oracles.hpp"
#include "spectral/codec.hpp"
#include "spectral/metrics.hpp"
#include "spectral/pipeline.hpp"
#include "support.hpp"

using namespace spectral;

TEST_CASE("nsse: examples and errors") {
    const WeightTensor w{"w", Shape{{2, 1}}, DType::f64, {3, 4}};
    CHECK(nsse(w, w) == 0.0);
    CHECK(nsse(w, WeightTensor{"z", Shape{{2, 1}}, DType::f64, {0, 0}}) == 1.0);
    CHECK(nsse(w, WeightTensor{"h", Shape{{2, 1}}, DType::f64, {3, 0}}) == doctest::Approx(0.64).epsilon(1e-15));
    CHECK_THROWS_AS(nsse(w, WeightTensor{"x", Shape{{3}}, DType::f64, {1, 2, 3}}), InputError);
    CHECK_THROWS_AS(nsse(WeightTensor{"z", Shape{{2, 1}}, DType::f64, {0, 0}}, w), InputError);
}

TEST_CASE("property: nsse is scale invariant") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const WeightTensor w = testing::random_tensor(rng, "w", {3, 5}, DType::f64);
        const WeightTensor v = testing::random_tensor(rng, "v", {3, 5}, DType::f64);
        const double c = std::uniform_real_distribution<double>(-50, 50)(rng);
        WeightTensor cw = w, cv = v;
        for (auto& x : cw.data) x *= c;
        for (auto& x : cv.data) x *= c;
        CHECK(std::abs(nsse(cw, cv) - nsse(w, v)) < 1e-12);
    }
}

TEST_CASE("footprint: per-layer accounting") {
    CompressedLayer c;
    c.name = "x";
    c.shape = Shape{{64, 64, 1, 1}};
    c.method = Method::dct;
    c.g = 4;
    c.t = 256;
    const auto f = layer_footprint(c);
    CHECK(f.trainable == 1024);
    CHECK(f.index == 1024);
    CHECK(f.stored == 2048);
    CHECK(f.original == 4096);
    CHECK(f.bytes == 1024 * 4 + 1024 * 4);

    c.method = Method::l1_prune;
    const auto l1 = layer_footprint(c);
    CHECK(l1.trainable == 1024);
    CHECK(l1.index == 256);

    c.method = Method::passthrough;
    c.g = 1;
    c.t = 4096;
    const auto pt = layer_footprint(c);
    CHECK(pt.stored == 4096);
    CHECK(pt.trainable == 4096);
    CHECK(pt.index == 0);
}

TEST_CASE("footprint: container against store, lossless mode costs more") {
    std::mt19937_64 rng(5);
    WeightStore store{"toy", {testing::random_tensor(rng, "a", {8, 4, 3, 3}), testing::random_tensor(rng, "b", {16, 8, 1, 1}),
                              WeightTensor{"bias", Shape{{16}}, DType::f32, std::vector<double>(16, 0.5)}}};
    std::vector<CompressedLayer> container = {compress_layer(store.layers[0], 4, 1.0),
                                              compress_layer(store.layers[1], 2, 1.0),
                                              passthrough_layer(store.layers[2])};
    const FootprintReport rep = footprint(container, store);
    CHECK(rep.all.stored > rep.all.original);
    CHECK(rep.weights_only.original == 288 + 128);
    CHECK(rep.all.original == 288 + 128 + 16);

    // totals are sums of the layer rows
    FootprintTotals sum;
    for (const auto& l : rep.layers) sum += l;
    CHECK(sum.stored == rep.all.stored);
    CHECK(sum.trainable == rep.all.trainable);
    CHECK(sum.index == rep.all.index);

    container[1].name = "zzz";
    CHECK_THROWS_AS(footprint(container, store), InputError);
    container.pop_back();
    CHECK_THROWS_AS(footprint(container, store), InputError);
}

TEST_CASE("footprint_from_plan matches accounting of the executed container") {
    std::mt19937_64 rng(6);
    WeightStore store{"toy", {testing::random_tensor(rng, "stem", {8, 3, 3, 3}),
                              testing::random_tensor(rng, "a", {16, 8, 3, 3}),
                              testing::random_tensor(rng, "b", {32, 16, 1, 1}),
                              WeightTensor{"bias", Shape{{32}}, DType::f32, std::vector<double>(32, 1.0)}}};
    std::vector<ManifestEntry> entries;
    for (const auto& l : store.layers) entries.push_back({l.name, l.shape, {}});
    const auto plan = plan_progressive_r(make_layer_specs(entries, {}), 0.5, 4);
    const auto planned = footprint_from_plan(plan);
    const auto executed = compress_store(store, plan).report;
    CHECK(planned.all.stored == executed.all.stored);
    CHECK(planned.all.trainable == executed.all.trainable);
    CHECK(planned.weights_only.index == executed.weights_only.index);
}

TEST_CASE("trainable fraction grows with g") {
    const auto layers = make_layer_specs(read_manifest(SPECTRAL_FIXTURE_DIR "/resnet50").layers, {});
    double prev = 0.0;
    for (std::uint32_t g : {2u, 4u, 8u, 16u, 32u, 64u}) {
        const double frac = footprint_from_plan(plan_uniform(layers, 8.0, g)).weights_only.trainable_fraction();
        CHECK(frac > prev);
        prev = frac;
    }
}

TEST_CASE("report serialization") {
    CompressedLayer c;
    c.name = "x";
    c.shape = Shape{{4, 4}};
    c.method = Method::dct;
    c.g = 2;
    c.t = 4;
    FootprintReport rep;
    auto f = layer_footprint(c);
    f.r = 2.0;
    f.nsse = 0.25;
    rep.add(f);
    const std::string csv = report_to_csv(rep);
    CHECK(csv == "layer,method,g,r,t,original,stored,trainable,index,nsse\nx,dct,2,2,4,16,16,8,8,0.25\n");
    const auto j = report_to_json(rep);
    CHECK(j["totals"]["stored"] == 16);
    CHECK(j["aggregate_nsse"] == 0.25);
    CHECK(j["layers"][0]["method"] == "dct");
}

TEST_CASE("conv2d_reference") {
    std::mt19937_64 rng(7);
    FeatureStack x{3, 6, 5, testing::random_vector(rng, 3 * 6 * 5)};

    SUBCASE("k=1 reweights channels") {
        const WeightTensor w{"w", Shape{{2, 3, 1, 1}}, DType::f64, {1, 2, 3, -1, 0, 0.5}};
        const auto y = conv2d_reference(x, w);
        CHECK(y.channels == 2);
        CHECK(y.height == 6);
        for (std::uint32_t py = 0; py < 6; ++py)
            for (std::uint32_t px = 0; px < 5; ++px) {
                CHECK(y.data[(0 * 6 + py) * 5 + px] ==
                      doctest::Approx(x.at(0, py, px) + 2 * x.at(1, py, px) + 3 * x.at(2, py, px)));
                CHECK(y.data[(1 * 6 + py) * 5 + px] == doctest::Approx(-x.at(0, py, px) + 0.5 * x.at(2, py, px)));
            }
    }
    SUBCASE("identity weights") {
        WeightTensor id{"id", Shape{{3, 3, 1, 1}}, DType::f64, std::vector<double>(9, 0.0)};
        for (int i = 0; i < 3; ++i) id.data[i * 3 + i] = 1.0;
        CHECK(conv2d_reference(x, id).data == x.data);
    }
    SUBCASE("3x3 against the per-pixel oracle") {
        const WeightTensor w = testing::random_tensor(rng, "w", {4, 3, 3, 3}, DType::f64);
        const auto y = conv2d_reference(x, w);
        CHECK(y.height == 4);
        CHECK(y.width == 3);
        for (std::uint32_t j = 0; j < 4; ++j)
            for (std::uint32_t py = 0; py < 4; ++py)
                for (std::uint32_t px = 0; px < 3; ++px)
                    CHECK(y.data[(j * 4 + py) * 3 + px] ==
                          doctest::Approx(oracle::conv_pixel(x.data, 3, 6, 5, w.data, 3, j, py, px)).epsilon(1e-12));
    }
    SUBCASE("linear in the weights") {
        const WeightTensor a = testing::random_tensor(rng, "a", {2, 3, 3, 3}, DType::f64);
        const WeightTensor b = testing::random_tensor(rng, "b", {2, 3, 3, 3}, DType::f64);
        WeightTensor ab = a;
        for (std::size_t i = 0; i < ab.data.size(); ++i) ab.data[i] += b.data[i];
        const auto ya = conv2d_reference(x, a), yb = conv2d_reference(x, b), yab = conv2d_reference(x, ab);
        for (std::size_t i = 0; i < yab.data.size(); ++i) CHECK(std::abs(yab.data[i] - ya.data[i] - yb.data[i]) < 1e-10);
    }
    SUBCASE("shape errors") {
        CHECK_THROWS_AS(conv2d_reference(x, testing::random_tensor(rng, "w", {2, 4, 1, 1})), InputError);
        CHECK_THROWS_AS(conv2d_reference(x, testing::random_tensor(rng, "w", {2, 3, 7, 7})), InputError);
    }
}
