#include "fcm/fcmnet/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fcm/error.hpp"

namespace fcm::net {

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'C', 'M', 'C', 'K', 'P', 'T', '\0'};

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes, std::size_t n) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }
    std::vector<std::uint8_t>& bytes() { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& buf, std::size_t end) : buf_(buf), end_(end) {}

    std::uint8_t u8() {
        need(1);
        return buf_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * i);
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    bool at_end() const { return pos_ == end_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > end_) throw DataError("checkpoint truncated");
    }
    const std::vector<std::uint8_t>& buf_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_verified(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < kMagic.size() + 8 || std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0)
        throw DataError("'" + path.string() + "' is not a checkpoint file");
    const std::size_t body = buf.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(buf[body + static_cast<std::size_t>(i)]) << (8 * i);
    if (stored != fnv1a(buf, body)) throw DataError("checkpoint checksum mismatch in '" + path.string() + "'");
    return buf;
}

CheckpointHeader parse_header(Reader& r, std::uint32_t& value_bytes) {
    for (std::size_t i = 0; i < kMagic.size(); ++i) r.u8();
    CheckpointHeader h;
    h.version = r.u32();
    if (h.version != kCheckpointVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(h.version));
    value_bytes = r.u32();
    if (value_bytes != 4 && value_bytes != 8) throw DataError("bad checkpoint value width");
    auto& c = h.config;
    c.D = r.u64();
    c.L = r.u64();
    c.d_model = r.u64();
    c.heads = r.u64();
    c.d_k = r.u64();
    c.d_v = r.u64();
    c.bottleneck = r.u64();
    c.d_ff = r.u64();
    c.n_layers = r.u64();
    const auto concat = r.u64();
    const auto mode = r.u64();
    if (concat > 1 || mode > 4) throw DataError("bad checkpoint config enum");
    c.concat = static_cast<ConcatAxis>(concat);
    c.mode = static_cast<Ablation>(mode);
    c.precision = value_bytes == 4 ? Precision::F32 : Precision::F64;
    h.trained = r.u8() != 0;
    return h;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const FcmModel<T>& model, const CheckpointExtras& extras) {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    Writer w;
    for (char ch : kMagic) w.u8(static_cast<std::uint8_t>(ch));
    w.u32(kCheckpointVersion);
    w.u32(sizeof(T));
    const auto& c = model.config();
    for (std::uint64_t v : {c.D, c.L, c.d_model, c.heads, c.d_k, c.d_v, c.bottleneck, c.d_ff, c.n_layers})
        w.u64(v);
    w.u64(static_cast<std::uint64_t>(c.concat));
    w.u64(static_cast<std::uint64_t>(c.mode));
    w.u8(model.trained() ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(model.params().size()));
    for (const auto& [name, p] : model.params()) {
        w.str(name);
        w.u32(static_cast<std::uint32_t>(p.value.rank()));
        for (auto d : p.value.shape()) w.u64(d);
        for (T v : p.value.data()) {
            if constexpr (sizeof(T) == 4)
                w.f32(v);
            else
                w.f64(v);
        }
    }
    w.u32(static_cast<std::uint32_t>(extras.size()));
    for (const auto& [name, values] : extras) {
        w.str(name);
        w.u64(values.size());
        for (double v : values) w.f64(v);
    }
    auto& bytes = w.bytes();
    const std::uint64_t sum = fnv1a(bytes, bytes.size());
    w.u64(sum);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
    auto buf = read_verified(path);
    Reader r(buf, buf.size() - 8);
    std::uint32_t width = 0;
    return parse_header(r, width);
}

template <typename T>
FcmModel<T> load_checkpoint(const std::filesystem::path& path, CheckpointExtras* extras) {
    auto buf = read_verified(path);
    Reader r(buf, buf.size() - 8);
    std::uint32_t width = 0;
    CheckpointHeader h = parse_header(r, width);
    if (width != sizeof(T))
        throw DataError("checkpoint stores " + std::to_string(width * 8) + "-bit values, requested " +
                        std::to_string(sizeof(T) * 8) + "-bit");
    nd::ParamStore<T> store;
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string name = r.str();
        const std::uint32_t rank = r.u32();
        if (rank == 0 || rank > 3) throw DataError("bad tensor rank in checkpoint");
        nd::Shape shape(rank);
        for (auto& d : shape) d = r.u64();
        std::vector<T> data(nd::shape_numel(shape));
        for (auto& v : data) {
            if constexpr (sizeof(T) == 4)
                v = r.f32();
            else
                v = r.f64();
        }
        store.add(name, nd::Tensor<T>(shape, std::move(data)));
    }
    const std::uint32_t ne = r.u32();
    CheckpointExtras ex;
    for (std::uint32_t i = 0; i < ne; ++i) {
        std::string name = r.str();
        const std::uint64_t count = r.u64();
        std::vector<double> values(count);
        for (auto& v : values) v = r.f64();
        ex.emplace(std::move(name), std::move(values));
    }
    if (!r.at_end()) throw DataError("trailing bytes in checkpoint");
    if (extras) *extras = std::move(ex);
    try {
        FcmModel<T> model(h.config, std::move(store));
        model.mark_trained(h.trained);
        return model;
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint does not describe a valid model: ") + e.what());
    }
}

template void save_checkpoint<float>(const std::filesystem::path&, const FcmModel<float>&, const CheckpointExtras&);
template void save_checkpoint<double>(const std::filesystem::path&, const FcmModel<double>&, const CheckpointExtras&);
template FcmModel<float> load_checkpoint<float>(const std::filesystem::path&, CheckpointExtras*);
template FcmModel<double> load_checkpoint<double>(const std::filesystem::path&, CheckpointExtras*);

}  // namespace fcm::net
