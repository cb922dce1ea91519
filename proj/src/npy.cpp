#include "spectral/npy.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>

namespace spectral::npy {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

constexpr char kMagic[] = "\x93NUMPY";

std::string header_dict(const WeightTensor& t) {
    std::string shape = "(";
    for (std::size_t i = 0; i < t.shape.rank(); ++i) {
        shape += std::to_string(t.shape.dims[i]);
        if (i + 1 < t.shape.rank() || t.shape.rank() == 1) shape += ",";
        if (i + 1 < t.shape.rank()) shape += " ";
    }
    shape += ")";
    return std::string("{'descr': '") + (t.dtype == DType::f32 ? "<f4" : "<f8") +
           "', 'fortran_order': False, 'shape': " + shape + ", }";
}

}  // namespace

WeightTensor load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    auto fail = [&](const std::string& why) -> InputError {
        return InputError(path.string() + ": " + why);
    };
    if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0) throw fail("not an NPY file");
    const auto major = static_cast<unsigned char>(bytes[6]);
    std::size_t header_len = 0, offset = 0;
    if (major == 1) {
        std::uint16_t n;
        std::memcpy(&n, bytes.data() + 8, 2);
        header_len = n;
        offset = 10;
    } else if (major == 2 || major == 3) {
        if (bytes.size() < 12) throw fail("truncated header");
        std::uint32_t n;
        std::memcpy(&n, bytes.data() + 8, 4);
        header_len = n;
        offset = 12;
    } else {
        throw fail("unsupported NPY version " + std::to_string(major));
    }
    if (bytes.size() < offset + header_len) throw fail("truncated header");
    const std::string header(bytes.data() + offset, header_len);
    offset += header_len;

    static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
    static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
    static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
    std::smatch m;
    if (!std::regex_search(header, m, descr_re)) throw fail("missing descr");
    const std::string descr = m[1];
    WeightTensor t;
    if (descr == "<f4" || descr == "f4")
        t.dtype = DType::f32;
    else if (descr == "<f8" || descr == "f8")
        t.dtype = DType::f64;
    else
        throw fail("unsupported dtype '" + descr + "'");
    if (!std::regex_search(header, m, order_re)) throw fail("missing fortran_order");
    if (m[1] == "True") throw fail("Fortran-ordered arrays are not supported");
    if (!std::regex_search(header, m, shape_re)) throw fail("missing shape");
    const std::string dims = m[1];
    static const std::regex num_re(R"(\d+)");
    for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num_re); it != std::sregex_iterator(); ++it)
        t.shape.dims.push_back(static_cast<std::uint32_t>(std::stoul(it->str())));

    const std::size_t count = t.shape.elements();
    const std::size_t esize = dtype_size(t.dtype);
    if (bytes.size() - offset != count * esize) throw fail("payload size does not match shape " + t.shape.str());
    t.data.resize(count);
    const char* p = bytes.data() + offset;
    for (std::size_t i = 0; i < count; ++i, p += esize) {
        if (t.dtype == DType::f32) {
            float v;
            std::memcpy(&v, p, 4);
            t.data[i] = v;
        } else {
            std::memcpy(&t.data[i], p, 8);
        }
    }
    return t;
}

void save(const std::filesystem::path& path, const WeightTensor& t) {
    std::string header = header_dict(t);
    // magic(6) + version(2) + len(2) + header + '\n' is padded to 64 bytes
    const std::size_t unpadded = 10 + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');

    std::string out(kMagic, 6);
    out.push_back('\x01');
    out.push_back('\x00');
    const auto len = static_cast<std::uint16_t>(header.size());
    out.append(reinterpret_cast<const char*>(&len), 2);
    out += header;
    out.reserve(out.size() + t.data.size() * dtype_size(t.dtype));
    for (double v : t.data) {
        if (t.dtype == DType::f32) {
            const float f = static_cast<float>(v);
            out.append(reinterpret_cast<const char*>(&f), 4);
        } else {
            out.append(reinterpret_cast<const char*>(&v), 8);
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw InputError("write failed: " + path.string());
}

}  // namespace spectral::npy
