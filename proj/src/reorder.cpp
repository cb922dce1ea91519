#include "spectral/reorder.hpp"

#include <cmath>
#include <stdexcept>

#include "spectral/tensor.hpp"

namespace spectral {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != r * c) throw std::invalid_argument("matrix data size does not match dimensions");
}

Ordering Ordering::identity(std::size_t n) {
    Ordering o;
    o.forward.resize(n);
    for (std::size_t i = 0; i < n; ++i) o.forward[i] = static_cast<std::uint32_t>(i);
    o.inverse = o.forward;
    return o;
}

Ordering Ordering::from_forward(std::vector<std::uint32_t> forward) {
    Ordering o;
    o.inverse.assign(forward.size(), 0);
    std::vector<bool> seen(forward.size(), false);
    for (std::size_t j = 0; j < forward.size(); ++j) {
        const auto s = forward[j];
        if (s >= forward.size() || seen[s]) throw std::invalid_argument("ordering is not a permutation");
        seen[s] = true;
        o.inverse[s] = static_cast<std::uint32_t>(j);
    }
    o.forward = std::move(forward);
    return o;
}

const char* metric_name(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::euclidean: return "euclidean";
        case DistanceMetric::manhattan: return "manhattan";
        case DistanceMetric::cosine: return "cosine";
    }
    return "?";
}

DistanceMetric parse_metric(const std::string& s) {
    if (s == "euclidean") return DistanceMetric::euclidean;
    if (s == "manhattan") return DistanceMetric::manhattan;
    if (s == "cosine") return DistanceMetric::cosine;
    throw InputError("unknown distance metric '" + s + "'");
}

namespace {

// Squared euclidean is used for ranking; it orders identically to the
// true distance.
double rank_distance(DistanceMetric metric, const double* a, const double* b, std::size_t len) {
    switch (metric) {
        case DistanceMetric::euclidean: {
            double s = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                const double d = a[i] - b[i];
                s += d * d;
            }
            return s;
        }
        case DistanceMetric::manhattan: {
            double s = 0.0;
            for (std::size_t i = 0; i < len; ++i) s += std::abs(a[i] - b[i]);
            return s;
        }
        case DistanceMetric::cosine: {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            if (na == 0.0 || nb == 0.0) return 1.0;
            return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
        }
    }
    return 0.0;
}

}  // namespace

double distance(DistanceMetric metric, const double* a, const double* b, std::size_t len) {
    const double d = rank_distance(metric, a, b, len);
    return metric == DistanceMetric::euclidean ? std::sqrt(d) : d;
}

Ordering compute_ordering(const Matrix& mat, DistanceMetric metric, StartNorm start) {
    if (mat.rows == 0 || mat.cols == 0) throw std::invalid_argument("cannot order an empty matrix");
    const std::size_t g = mat.rows;
    const std::size_t len = mat.cols;

    // column-major copy so each column is contiguous
    std::vector<double> cols(g * len);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < len; ++j) cols[j * g + i] = mat(i, j);
    auto column = [&](std::size_t j) { return cols.data() + j * g; };

    std::size_t first = 0;
    double best = -1.0;
    for (std::size_t j = 0; j < len; ++j) {
        const double* c = column(j);
        double norm = 0.0;
        for (std::size_t i = 0; i < g; ++i) norm += start == StartNorm::l2 ? c[i] * c[i] : std::abs(c[i]);
        if (norm > best) {
            best = norm;
            first = j;
        }
    }

    std::vector<std::uint32_t> forward;
    forward.reserve(len);
    forward.push_back(static_cast<std::uint32_t>(first));

    // remaining columns kept in ascending index order so the first strict
    // minimum is also the lowest-index one
    std::vector<std::uint32_t> remaining;
    remaining.reserve(len - 1);
    for (std::size_t j = 0; j < len; ++j)
        if (j != first) remaining.push_back(static_cast<std::uint32_t>(j));

    while (!remaining.empty()) {
        const double* prev = column(forward.back());
        std::size_t best_pos = 0;
        double best_d = rank_distance(metric, prev, column(remaining[0]), g);
        for (std::size_t k = 1; k < remaining.size(); ++k) {
            const double d = rank_distance(metric, prev, column(remaining[k]), g);
            if (d < best_d) {
                best_d = d;
                best_pos = k;
            }
        }
        forward.push_back(remaining[best_pos]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
    return Ordering::from_forward(std::move(forward));
}

namespace {

Matrix gather_columns(const Matrix& mat, const std::vector<std::uint32_t>& idx) {
    if (idx.size() != mat.cols)
        throw std::invalid_argument("ordering length " + std::to_string(idx.size()) + " != column count " +
                                    std::to_string(mat.cols));
    Matrix out(mat.rows, mat.cols);
    for (std::size_t i = 0; i < mat.rows; ++i)
        for (std::size_t j = 0; j < mat.cols; ++j) out(i, j) = mat(i, idx[j]);
    return out;
}

}  // namespace

Matrix apply_ordering(const Matrix& mat, const Ordering& ord) { return gather_columns(mat, ord.forward); }

Matrix apply_inverse_ordering(const Matrix& mat, const Ordering& ord) { return gather_columns(mat, ord.inverse); }

}  // namespace spectral
