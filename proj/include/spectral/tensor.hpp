#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectral {

/// Raised for malformed user input: bad files, invalid shapes, unusable
/// parameters. The CLI maps it to exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

std::size_t dtype_size(DType dt);
const char* dtype_name(DType dt);
DType parse_dtype(const std::string& s);

/// Round a value to what the dtype can represent.
double round_to(DType dt, double v);

/// Tensor shape of rank 1, 2 or 4. Rank-2 tensors are fully connected
/// weights and behave as (m, n, 1, 1).
struct Shape {
    std::vector<std::uint32_t> dims;

    std::size_t rank() const { return dims.size(); }
    std::uint64_t elements() const;
    /// (m, n, k1, k2) with missing trailing dims filled by 1.
    std::array<std::uint32_t, 4> as4() const;
    /// Rank >= 2 tensors are weights; rank-1 tensors are carried untouched.
    bool is_weight() const { return rank() >= 2; }
    std::string str() const;

    bool operator==(const Shape&) const = default;
};

/// Throws InputError unless the shape is rank 1, 2 or 4, has no zero
/// extents and (for rank 4) a square kernel.
void validate_shape(const Shape& s, const std::string& name);

/// A named tensor. Values are kept in double regardless of the storage
/// dtype; dtype only decides how it is written back.
struct WeightTensor {
    std::string name;
    Shape shape;
    DType dtype = DType::f32;
    std::vector<double> data;

    std::uint64_t elements() const { return shape.elements(); }
};

}  // namespace spectral
