#include "spectral/container_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "spectral/npy.hpp"

namespace spectral {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// weight store

Manifest read_manifest(const fs::path& dir) {
    const fs::path mpath = dir / "manifest.json";
    std::ifstream in(mpath);
    if (!in) throw InputError("missing manifest: " + mpath.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(mpath.string() + ": " + e.what());
    }

    Manifest m;
    try {
        m.model = j.value("model", std::string{});
        std::set<std::string> seen;
        for (const auto& e : j.at("layers")) {
            ManifestEntry entry;
            entry.name = e.at("name").get<std::string>();
            entry.shape.dims = e.at("shape").get<std::vector<std::uint32_t>>();
            entry.file = e.value("file", entry.name + ".npy");
            validate_shape(entry.shape, entry.name);
            if (!seen.insert(entry.name).second) throw InputError("duplicate layer name '" + entry.name + "'");
            m.layers.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw InputError(mpath.string() + ": malformed manifest: " + e.what());
    }
    return m;
}

WeightStore read_weight_store(const fs::path& dir) {
    const Manifest m = read_manifest(dir);
    WeightStore store;
    store.model = m.model;
    store.layers.reserve(m.layers.size());
    for (const auto& e : m.layers) {
        const fs::path p = dir / e.file;
        if (!fs::exists(p)) throw InputError("layer '" + e.name + "': missing tensor file " + p.string());
        WeightTensor t;
        try {
            t = npy::load(p);
        } catch (const InputError& err) {
            throw InputError("layer '" + e.name + "': " + err.what());
        }
        if (t.shape.elements() != e.shape.elements() ||
            (t.shape != e.shape && t.shape.as4() != e.shape.as4()))
            throw InputError("layer '" + e.name + "': file shape " + t.shape.str() + " does not match manifest " +
                             e.shape.str());
        t.name = e.name;
        t.shape = e.shape;
        store.layers.push_back(std::move(t));
    }
    return store;
}

void write_weight_store(const WeightStore& store, const fs::path& dir) {
    fs::create_directories(dir);
    json layers = json::array();
    for (const auto& t : store.layers) {
        std::string file = t.name;
        std::replace(file.begin(), file.end(), '/', '_');
        file += ".npy";
        npy::save(dir / file, t);
        layers.push_back({{"name", t.name}, {"shape", t.shape.dims}, {"file", file}});
    }
    const json j = {{"model", store.model}, {"layers", layers}};
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw InputError("cannot write " + (dir / "manifest.json").string());
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// compressed records

const char* method_name(Method m) {
    switch (m) {
        case Method::dct: return "dct";
        case Method::l1_prune: return "l1_prune";
        case Method::passthrough: return "passthrough";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    if (s == "dct") return Method::dct;
    if (s == "l1_prune" || s == "l1") return Method::l1_prune;
    if (s == "passthrough") return Method::passthrough;
    throw InputError("unknown method '" + s + "'");
}

std::uint64_t CompressedLayer::expected_index_count() const {
    switch (method) {
        case Method::dct: return group_length();
        case Method::l1_prune: return t;
        case Method::passthrough: return 0;
    }
    return 0;
}

void validate(const CompressedLayer& c) {
    auto fail = [&](const std::string& why) { throw InputError("record '" + c.name + "': " + why); };
    validate_shape(c.shape, c.name);
    const std::uint64_t p = c.shape.elements();
    if (c.g == 0 || p % c.g != 0) fail("g=" + std::to_string(c.g) + " does not divide " + std::to_string(p));
    const std::uint64_t len = p / c.g;
    if (c.method == Method::passthrough) {
        if (c.g != 1 || c.t != p) fail("passthrough record must have g=1, t=element count");
    } else {
        if (!c.shape.is_weight()) fail("only weight tensors can be compressed");
        if (c.t < 1 || c.t > len) fail("t=" + std::to_string(c.t) + " outside [1, " + std::to_string(len) + "]");
    }
    if (c.coefficients.size() != std::uint64_t{c.g} * c.t) fail("coefficient count mismatch");
    if (c.indices.size() != c.expected_index_count()) fail("index count mismatch");
    if (c.method == Method::dct) {
        std::vector<bool> seen(len, false);
        for (auto i : c.indices) {
            if (i >= len || seen[i]) fail("ordering is not a permutation");
            seen[i] = true;
        }
    } else if (c.method == Method::l1_prune) {
        for (std::size_t i = 0; i < c.indices.size(); ++i)
            if (c.indices[i] >= len || (i > 0 && c.indices[i] <= c.indices[i - 1]))
                fail("kept-column indices must be strictly increasing and < L");
    }
}

// ---------------------------------------------------------------------------
// binary container

namespace {

class Writer {
public:
    template <typename T>
    void put(T v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    void bytes(const std::string& s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : buf_(b) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == buf_.size(); }

private:
    void need(std::size_t n) const {
        if (buf_.size() - pos_ < n) throw InputError("container truncated at byte " + std::to_string(pos_));
    }
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_container(const std::vector<CompressedLayer>& layers) {
    Writer w;
    w.bytes(std::string(kContainerMagic, 4));
    w.put<std::uint16_t>(kContainerVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layers.size()));
    for (const auto& c : layers) {
        validate(c);
        if (c.name.size() > 0xFFFF) throw InputError("layer name too long: " + c.name.substr(0, 32));
        w.put<std::uint16_t>(static_cast<std::uint16_t>(c.name.size()));
        w.bytes(c.name);
        for (std::size_t i = 0; i < 4; ++i) w.put<std::uint32_t>(i < c.shape.rank() ? c.shape.dims[i] : 0);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(c.method));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(c.dtype));
        w.put<std::uint32_t>(c.g);
        w.put<std::uint32_t>(c.t);
        for (double v : c.coefficients) {
            if (c.dtype == DType::f32)
                w.put<float>(static_cast<float>(v));
            else
                w.put<double>(v);
        }
        for (auto i : c.indices) w.put<std::uint32_t>(i);
    }
    return w.take();
}

std::vector<CompressedLayer> parse_container(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (r.str(4) != std::string(kContainerMagic, 4)) throw InputError("bad magic: not an SPCW container");
    const auto version = r.get<std::uint16_t>();
    if (version != kContainerVersion) throw InputError("unsupported container version " + std::to_string(version));
    const auto count = r.get<std::uint32_t>();

    std::vector<CompressedLayer> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        CompressedLayer c;
        c.name = r.str(r.get<std::uint16_t>());
        for (int i = 0; i < 4; ++i) {
            const auto d = r.get<std::uint32_t>();
            if (d != 0) c.shape.dims.push_back(d);
        }
        const auto method = r.get<std::uint8_t>();
        const auto dtype = r.get<std::uint8_t>();
        if (method > 2) throw InputError("record '" + c.name + "': unknown method tag " + std::to_string(method));
        if (dtype > 1) throw InputError("record '" + c.name + "': unknown dtype tag " + std::to_string(dtype));
        c.method = static_cast<Method>(method);
        c.dtype = static_cast<DType>(dtype);
        c.g = r.get<std::uint32_t>();
        c.t = r.get<std::uint32_t>();
        validate_shape(c.shape, c.name);
        if (c.g == 0) throw InputError("record '" + c.name + "': g=0");

        const std::uint64_t ncoef = std::uint64_t{c.g} * c.t;
        if (ncoef * dtype_size(c.dtype) > bytes.size()) throw InputError("container truncated in '" + c.name + "'");
        c.coefficients.resize(ncoef);
        for (auto& v : c.coefficients) v = c.dtype == DType::f32 ? double{r.get<float>()} : r.get<double>();
        const std::uint64_t nidx = c.expected_index_count();
        if (nidx * 4 > bytes.size()) throw InputError("container truncated in '" + c.name + "'");
        c.indices.resize(nidx);
        for (auto& i : c.indices) i = r.get<std::uint32_t>();
        validate(c);
        out.push_back(std::move(c));
    }
    if (!r.done()) throw InputError("trailing bytes after last record");
    return out;
}

void write_compressed(const std::vector<CompressedLayer>& layers, const fs::path& path) {
    const auto bytes = serialize_container(layers);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write failed: " + path.string());
}

std::vector<CompressedLayer> read_compressed(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_container(bytes);
}

}  // namespace spectral
