#include "spectral/tensor.hpp"

#include <sstream>

namespace spectral {

std::size_t dtype_size(DType dt) { return dt == DType::f32 ? 4 : 8; }

const char* dtype_name(DType dt) { return dt == DType::f32 ? "f32" : "f64"; }

DType parse_dtype(const std::string& s) {
    if (s == "f32") return DType::f32;
    if (s == "f64") return DType::f64;
    throw InputError("unsupported dtype '" + s + "'");
}

double round_to(DType dt, double v) {
    return dt == DType::f32 ? static_cast<double>(static_cast<float>(v)) : v;
}

std::uint64_t Shape::elements() const {
    if (dims.empty()) return 0;
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::array<std::uint32_t, 4> Shape::as4() const {
    std::array<std::uint32_t, 4> out{1, 1, 1, 1};
    for (std::size_t i = 0; i < dims.size() && i < 4; ++i) out[i] = dims[i];
    return out;
}

std::string Shape::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
    os << ')';
    return os.str();
}

void validate_shape(const Shape& s, const std::string& name) {
    if (s.rank() != 1 && s.rank() != 2 && s.rank() != 4)
        throw InputError("layer '" + name + "': unsupported rank " + std::to_string(s.rank()));
    for (auto d : s.dims)
        if (d == 0) throw InputError("layer '" + name + "': zero extent in shape " + s.str());
    if (s.rank() == 4 && s.dims[2] != s.dims[3])
        throw InputError("layer '" + name + "': non-square kernel " + s.str());
}

}  // namespace spectral
