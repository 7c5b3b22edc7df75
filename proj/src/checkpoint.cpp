#include "lsrl/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

#include "lsrl/errors.hpp"
#include "lsrl/rng.hpp"

namespace lsrl {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'R', 'L'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(std::uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(std::uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& buf, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(buf, bits);
}

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw DataError("truncated checkpoint: " + path);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }
};

std::vector<std::uint8_t> read_all(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint: " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::AutoEncoder: return "autoencoder";
        case ModelKind::Classifier: return "classifier";
        case ModelKind::Generator: return "generator";
        case ModelKind::Discriminator: return "discriminator";
        case ModelKind::Actor: return "actor";
    }
    return "?";
}

void save_checkpoint(const ParamStore& store, ModelKind kind, std::uint64_t config_hash,
                     const std::string& path) {
    std::vector<std::uint8_t> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u32(buf, kVersion);
    const std::string kname = kind_name(kind);
    put_u32(buf, static_cast<std::uint32_t>(kname.size()));
    buf.insert(buf.end(), kname.begin(), kname.end());
    put_u64(buf, config_hash);
    put_u64(buf, store.size());
    for (const auto& e : store.entries()) {
        put_u64(buf, e.name.size());
        buf.insert(buf.end(), e.name.begin(), e.name.end());
        put_u64(buf, e.tensor.rank());
        for (std::size_t d : e.tensor.shape()) put_u64(buf, d);
        for (double v : e.tensor.data()) put_f64(buf, v);
    }
    put_u64(buf, fnv1a64(buf.data(), buf.size()));

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write checkpoint: " + tmp);
        f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!f) throw DataError("short write on checkpoint: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw DataError("cannot rename " + tmp + " to " + path);
    }
}

std::uint64_t load_checkpoint_into(ParamStore& store, ModelKind expected_kind,
                                   const std::string& path) {
    const auto buf = read_all(path);
    if (buf.size() < 12 + 16 + 8) throw DataError("truncated checkpoint: " + path);

    // checksum covers everything before the trailing 8 bytes
    std::uint64_t stored_sum = 0;
    for (int i = 0; i < 8; ++i)
        stored_sum |= std::uint64_t(buf[buf.size() - 8 + i]) << (8 * i);
    if (fnv1a64(buf.data(), buf.size() - 8) != stored_sum) {
        throw DataError("checkpoint checksum mismatch: " + path);
    }

    Reader r{buf, 0, path};
    if (r.str(4) != std::string(kMagic, 4)) {
        throw DataError("not a checkpoint file (bad magic): " + path);
    }
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
    }
    const std::string kname = r.str(r.u32());
    if (kname != kind_name(expected_kind)) {
        throw DataError("checkpoint kind mismatch: expected " + kind_name(expected_kind) +
                        ", got " + kname + " in " + path);
    }
    const std::uint64_t config_hash = r.u64();
    const std::uint64_t count = r.u64();
    if (count != store.size()) {
        throw DataError("checkpoint has " + std::to_string(count) + " tensors, model expects " +
                        std::to_string(store.size()) + ": " + path);
    }

    std::map<std::string, std::pair<Shape, std::vector<double>>> table;
    for (std::uint64_t t = 0; t < count; ++t) {
        const std::string name = r.str(r.u64());
        const std::uint64_t rank = r.u64();
        Shape shape(rank);
        std::size_t n = 1;
        for (auto& d : shape) {
            d = r.u64();
            n *= d;
        }
        std::vector<double> data(n);
        for (auto& v : data) v = r.f64();
        if (!table.emplace(name, std::make_pair(std::move(shape), std::move(data))).second) {
            throw DataError("duplicate tensor name '" + name + "' in " + path);
        }
    }

    for (auto& e : store.entries()) {
        auto it = table.find(e.name);
        if (it == table.end()) {
            throw DataError("checkpoint is missing tensor '" + e.name + "': " + path);
        }
        if (it->second.first != e.tensor.shape()) {
            throw DataError("tensor '" + e.name + "' has shape " + shape_str(it->second.first) +
                            ", model expects " + shape_str(e.tensor.shape()) + ": " + path);
        }
        e.tensor.mutable_data() = std::move(it->second.second);
        e.tensor.drop_grad();
    }
    return config_hash;
}

std::uint64_t peek_config_hash(const std::string& path) {
    const auto buf = read_all(path);
    Reader r{buf, 0, path};
    if (buf.size() < 12 || r.str(4) != std::string(kMagic, 4)) {
        throw DataError("not a checkpoint file (bad magic): " + path);
    }
    r.u32();            // version
    r.str(r.u32());     // kind
    return r.u64();
}

}  // namespace lsrl
