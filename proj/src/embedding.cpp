#include "sage/embedding.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sage/fsio.hpp"
#include "sage/hashing.hpp"
#include "sage/text.hpp"

namespace sage::embed {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'G', 'E', 'E', 'M', 'B', '1'};
constexpr char kBigramSep = '\x1f';

void accumulate(Vec& acc, std::string_view feature, std::uint64_t seed_hash) {
    std::uint64_t h = fnv1a64(feature, seed_hash);
    std::size_t bucket = static_cast<std::size_t>(h % acc.size());
    acc[bucket] += (h >> 63) ? -1.0 : 1.0;
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(out, bits);
}

class ByteReader {
public:
    explicit ByteReader(std::istream& in) : in_(in) {}

    std::size_t offset() const { return offset_; }

    void read_exact(char* dst, std::size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        std::size_t got = static_cast<std::size_t>(in_.gcount());
        offset_ += got;
        if (got != n) throw TruncationError(offset_);
    }

    std::uint16_t u16() {
        unsigned char b[2];
        read_exact(reinterpret_cast<char*>(b), 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }

    std::uint32_t u32() {
        unsigned char b[4];
        read_exact(reinterpret_cast<char*>(b), 4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    std::uint64_t u64() {
        unsigned char b[8];
        read_exact(reinterpret_cast<char*>(b), 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    bool at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

private:
    std::istream& in_;
    std::size_t offset_ = 0;
};

}  // namespace

Vec hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
    if (dim < 2) throw ConfigError("hash_embed: dim must be at least 2");
    std::string lowered = text::ascii_lower(text);
    std::vector<std::string_view> tokens = text::split_ws(lowered);
    if (tokens.empty()) throw EmptyInputError("hash_embed: no tokens");

    std::uint64_t seed_hash = fnv1a64_u64le(seed);
    Vec acc(dim, 0.0);
    for (const auto& tok : tokens) accumulate(acc, tok, seed_hash);
    std::string bigram;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        bigram.assign(tokens[i]);
        bigram.push_back(kBigramSep);
        bigram.append(tokens[i + 1]);
        accumulate(acc, bigram, seed_hash);
    }
    return normalize(acc);
}

Vec normalize(const Vec& v) {
    if (v.empty()) throw DimError("normalize: empty vector");
    double sq = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericalError("normalize: non-finite entry");
        sq += x * x;
    }
    double norm = std::sqrt(sq);
    if (norm == 0.0) throw ZeroNormError();
    if (!std::isfinite(norm)) throw NumericalError("normalize: norm overflow");
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
    return out;
}

double cosine(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) {
        throw DimError("cosine: size mismatch " + std::to_string(u.size()) + " vs " +
                       std::to_string(v.size()));
    }
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) throw ZeroNormError("cosine: zero-norm input");
    double c = uv / (std::sqrt(uu) * std::sqrt(vv));
    if (!std::isfinite(c)) throw NumericalError("cosine: non-finite result");
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

void EmbeddingStore::add(const std::string& id, const Vec& v) {
    if (dim_ == 0) {
        if (v.size() < 2) throw DimError("store: dim must be at least 2");
        dim_ = static_cast<std::uint32_t>(v.size());
    }
    if (v.size() != dim_) {
        throw DimError("store: row for " + id + " has size " + std::to_string(v.size()) +
                       ", store dim is " + std::to_string(dim_));
    }
    if (index_.count(id)) throw DuplicateId(id);
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericalError("store: non-finite value for " + id);
    }
    index_.emplace(id, ids_.size());
    ids_.push_back(id);
    rows_.reserve(rows_.size() + dim_);
    for (double x : v) rows_.push_back(static_cast<float>(x));
}

Vec EmbeddingStore::vector(const std::string& id) const {
    std::span<const float> r = row(id);
    return Vec(r.begin(), r.end());
}

std::span<const float> EmbeddingStore::row(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw MissingEmbedding(id);
    return std::span<const float>(rows_.data() + it->second * dim_, dim_);
}

void write_store(const EmbeddingStore& store, std::ostream& out) {
    std::string buf;
    buf.reserve(24 + store.count() * (2 + 16 + store.dim() * 4));
    buf.append(kMagic, sizeof kMagic);
    put_u32(buf, store.dim());
    put_u64(buf, static_cast<std::uint64_t>(store.count()));
    for (const std::string& id : store.ids()) {
        if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw FormatError("store: id longer than 65535 bytes: " + id.substr(0, 64));
        }
        put_u16(buf, static_cast<std::uint16_t>(id.size()));
        buf.append(id);
        for (float x : store.row(id)) put_f32(buf, x);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("store: write failed");
}

void write_store_file(const EmbeddingStore& store, const std::filesystem::path& path) {
    std::ostringstream buf(std::ios::binary);
    write_store(store, buf);
    fsio::atomic_write_file(path, buf.view());
}

EmbeddingStore read_store(std::istream& in) {
    ByteReader r(in);
    char magic[8];
    r.read_exact(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw FormatError("store: bad magic");
    }
    std::uint32_t dim = r.u32();
    if (dim < 2) throw FormatError("store: dim must be at least 2");
    std::uint64_t count = r.u64();
    EmbeddingStore store(dim);
    Vec v(dim);
    std::string id;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint16_t id_len = r.u16();
        if (id_len == 0) throw FormatError("store: empty id in record " + std::to_string(i));
        id.resize(id_len);
        r.read_exact(id.data(), id_len);
        for (std::uint32_t d = 0; d < dim; ++d) v[d] = r.f32();
        store.add(id, v);
    }
    if (!r.at_eof()) throw FormatError("store: trailing bytes after last record");
    return store;
}

EmbeddingStore read_store_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_store(in);
}

}  // namespace sage::embed
