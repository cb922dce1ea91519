#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "spectral/container_io.hpp"
#include "spectral/reorder.hpp"
#include "spectral/tensor.hpp"

namespace spectral::testing {

/// Directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("spectral_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

private:
    std::filesystem::path path_;
};

/// Gaussian tensor; values rounded to f32 when dtype is f32 so that the
/// in-memory tensor equals what an NPY round trip would give.
inline WeightTensor random_tensor(std::mt19937_64& rng, std::string name, std::vector<std::uint32_t> dims,
                                  DType dtype = DType::f32) {
    std::normal_distribution<double> nd(0.0, 1.0);
    WeightTensor w{std::move(name), Shape{std::move(dims)}, dtype, {}};
    w.data.resize(w.elements());
    for (auto& v : w.data) v = round_to(dtype, nd(rng));
    return w;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

/// Tensor whose g x L group matrix has smooth rows (a few low cosines of
/// a hidden column coordinate) with columns shuffled and relative noise
/// added. Reordering can recover the smooth structure.
inline WeightTensor shuffled_smooth_tensor(std::mt19937_64& rng, std::vector<std::uint32_t> dims, std::uint32_t g,
                                           double noise = 0.01) {
    WeightTensor w{"synthetic", Shape{std::move(dims)}, DType::f64, {}};
    const std::size_t p = w.elements();
    const std::size_t len = p / g;
    std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2 * std::numbers::pi);
    std::normal_distribution<double> nd(0.0, 1.0);

    std::vector<std::size_t> perm(len);
    for (std::size_t j = 0; j < len; ++j) perm[j] = j;
    std::shuffle(perm.begin(), perm.end(), rng);

    Matrix m(g, len);
    for (std::size_t i = 0; i < g; ++i) {
        const double a1 = amp(rng), a2 = amp(rng) / 2, a3 = amp(rng) / 4, base = amp(rng) / 2;
        const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
        for (std::size_t j = 0; j < len; ++j) {
            const double x = std::numbers::pi * static_cast<double>(perm[j]) / static_cast<double>(len);
            m(i, j) = base + a1 * std::cos(x + p1) + a2 * std::cos(2 * x + p2) + a3 * std::cos(3 * x + p3);
        }
    }
    double rms = 0.0;
    for (double v : m.data) rms += v * v;
    rms = std::sqrt(rms / static_cast<double>(m.data.size()));
    for (auto& v : m.data) v += noise * rms * nd(rng);
    w.data = m.data;
    return w;
}

/// Writes a store of the given tensors to `dir`.
inline void write_store(const std::filesystem::path& dir, const std::string& model, std::vector<WeightTensor> layers) {
    write_weight_store(WeightStore{model, std::move(layers)}, dir);
}

}  // namespace spectral::testing
