#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spectral {

/// Dense g x L matrix, row-major. Rows are groups, columns are the items
/// being reordered.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> d);

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool operator==(const Matrix&) const = default;
};

/// Column permutation. forward[j] is the source column placed at j.
struct Ordering {
    std::vector<std::uint32_t> forward;
    std::vector<std::uint32_t> inverse;

    static Ordering identity(std::size_t n);
    /// Builds the inverse; throws std::invalid_argument if `forward` is not
    /// a permutation of 0..n-1.
    static Ordering from_forward(std::vector<std::uint32_t> forward);

    std::size_t size() const { return forward.size(); }
};

enum class DistanceMetric { euclidean, manhattan, cosine };

/// Norm used to pick the first column.
enum class StartNorm { l2, l1 };

const char* metric_name(DistanceMetric m);
DistanceMetric parse_metric(const std::string& s);

/// Distance between two equal-length vectors. Cosine distance is
/// 1 - a.b / (|a||b|), and 1 when either vector is all zero.
double distance(DistanceMetric metric, const double* a, const double* b, std::size_t len);

/// Greedy nearest-neighbour chain over the columns: start at the column
/// of largest norm, then repeatedly append the unused column closest to
/// the last one. Ties go to the lowest column index. O(L^2 g).
Ordering compute_ordering(const Matrix& mat, DistanceMetric metric = DistanceMetric::euclidean,
                          StartNorm start = StartNorm::l2);

/// out column j = in column forward[j]
Matrix apply_ordering(const Matrix& mat, const Ordering& ord);
/// out column j = in column inverse[j]; undoes apply_ordering.
Matrix apply_inverse_ordering(const Matrix& mat, const Ordering& ord);

}  // namespace spectral
