#include "spectral/dct.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <string>

namespace spectral::dct {

Basis::Basis(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("DCT basis length must be positive");
    scale0_ = std::sqrt(1.0 / static_cast<double>(n));
    scale_ = std::sqrt(2.0 / static_cast<double>(n));
    cos_.resize(4 * n);
    const double step = std::numbers::pi / (2.0 * static_cast<double>(n));
    for (std::size_t k = 0; k < cos_.size(); ++k) cos_[k] = std::cos(step * static_cast<double>(k));
}

double Basis::entry(std::size_t a, std::size_t u) const {
    const std::size_t k = ((2 * a + 1) * u) % (4 * n_);
    return scale(u) * cos_[k];
}

std::vector<double> Basis::matrix() const {
    std::vector<double> m(n_ * n_);
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t u = 0; u < n_; ++u) m[a * n_ + u] = entry(a, u);
    return m;
}

void Basis::forward(std::span<const double> row, std::span<double> out) const {
    const std::size_t period = 4 * n_;
    for (std::size_t u = 0; u < out.size(); ++u) {
        // angle index (2a + 1) u mod 4n, advanced by 2u per step
        const std::size_t stride = (2 * u) % period;
        std::size_t k = u % period;
        double acc = 0.0;
        for (std::size_t a = 0; a < n_; ++a) {
            acc += row[a] * cos_[k];
            k += stride;
            if (k >= period) k -= period;
        }
        out[u] = scale(u) * acc;
    }
}

void Basis::inverse(std::span<const double> coeffs, std::span<double> out) const {
    const std::size_t period = 4 * n_;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t u = 0; u < coeffs.size(); ++u) {
        const double c = scale(u) * coeffs[u];
        if (c == 0.0) continue;
        const std::size_t stride = (2 * u) % period;
        std::size_t k = u % period;
        for (std::size_t a = 0; a < n_; ++a) {
            out[a] += c * cos_[k];
            k += stride;
            if (k >= period) k -= period;
        }
    }
}

Basis build_basis(std::size_t n) { return Basis(n); }

std::shared_ptr<const Basis> cached_basis(std::size_t n) {
    static std::shared_mutex mu;
    static std::map<std::size_t, std::shared_ptr<const Basis>> cache;
    {
        std::shared_lock lock(mu);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    auto fresh = std::make_shared<const Basis>(n);
    std::unique_lock lock(mu);
    auto [it, inserted] = cache.emplace(n, std::move(fresh));
    return it->second;
}

TruncatedBasis::TruncatedBasis(std::shared_ptr<const Basis> base, std::size_t t) : base_(std::move(base)), t_(t) {
    if (!base_) throw std::invalid_argument("null basis");
    if (t_ < 1 || t_ > base_->size())
        throw std::invalid_argument("truncation t=" + std::to_string(t_) + " outside [1, " +
                                    std::to_string(base_->size()) + "]");
}

std::vector<double> forward_truncated(const TruncatedBasis& basis, std::span<const double> row) {
    if (row.size() != basis.n())
        throw std::invalid_argument("row length " + std::to_string(row.size()) + " != basis length " +
                                    std::to_string(basis.n()));
    std::vector<double> out(basis.t());
    basis.base().forward(row, out);
    return out;
}

std::vector<double> inverse_truncated(const TruncatedBasis& basis, std::span<const double> coeffs) {
    if (coeffs.size() != basis.t())
        throw std::invalid_argument("coefficient count " + std::to_string(coeffs.size()) + " != t=" +
                                    std::to_string(basis.t()));
    std::vector<double> out(basis.n());
    basis.base().inverse(coeffs, out);
    return out;
}

}  // namespace spectral::dct
