#include "nvq/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "nvq/quantizer.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace nvq {

namespace {

std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<char> buf(static_cast<std::size_t>(size));
    if (size > 0 && !in.read(buf.data(), size)) {
        throw IoError("read failed on " + path);
    }
    return buf;
}

class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open " + path + " for writing");
    }
    template <typename T>
    void put(const T& v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void put_bytes(const void* p, std::size_t size) {
        out_.write(reinterpret_cast<const char*>(p), size);
    }
    void finish() {
        out_.flush();
        if (!out_) throw IoError("write failed on " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

class Reader {
public:
    Reader(std::vector<char> buf, std::string path)
        : buf_(std::move(buf)), path_(std::move(path)) {}

    template <typename T>
    T get() {
        T v;
        take(&v, sizeof(T));
        return v;
    }
    void take(void* dst, std::size_t size) {
        if (pos_ + size > buf_.size()) {
            throw FormatError(path_ + ": truncated at byte offset " +
                              std::to_string(pos_));
        }
        std::memcpy(dst, buf_.data() + pos_, size);
        pos_ += size;
    }
    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ == buf_.size(); }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    std::vector<char> buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

template <typename T, typename Matrix>
Matrix read_xvecs(const std::string& path) {
    Reader r(slurp(path), path);
    Matrix data;
    while (!r.at_end()) {
        std::size_t record_at = r.offset();
        std::int32_t d = r.get<std::int32_t>();
        if (d <= 0) {
            throw FormatError(path + ": nonpositive dimension at byte offset " +
                              std::to_string(record_at));
        }
        if (data.d == 0) {
            data.d = static_cast<std::uint32_t>(d);
        } else if (static_cast<std::uint32_t>(d) != data.d) {
            throw FormatError(path + ": inconsistent dimension at byte offset " +
                              std::to_string(record_at));
        }
        std::size_t old = data.values.size();
        data.values.resize(old + data.d);
        r.take(data.values.data() + old, sizeof(T) * data.d);
    }
    return data;
}

template <typename Matrix>
void write_xvecs(const std::string& path, const Matrix& data) {
    Writer w(path);
    std::int32_t d = static_cast<std::int32_t>(data.d);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        w.put(d);
        w.put_bytes(data.row_ptr(i), sizeof(*data.row_ptr(i)) * data.d);
    }
    w.finish();
}

constexpr char kMagic[4] = {'N', 'V', 'Q', '1'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kFlagUniformFallback = 0x01;

}  // namespace

FloatMatrix read_fvecs(const std::string& path) {
    return read_xvecs<float, FloatMatrix>(path);
}

void write_fvecs(const std::string& path, const FloatMatrix& data) {
    write_xvecs(path, data);
}

IntMatrix read_ivecs(const std::string& path) {
    return read_xvecs<std::int32_t, IntMatrix>(path);
}

void write_ivecs(const std::string& path, const IntMatrix& data) {
    write_xvecs(path, data);
}

std::uint64_t nvq_file_size(std::uint32_t d, std::uint64_t n, std::uint16_t m,
                            int beta) {
    std::uint64_t header = 4 + 2 + 4 + 8 + 2 + 1 + 1 + 8 +
                           4ull * d +   // mean
                           4ull * d;    // permutation
    std::uint64_t record = 17ull * m + packed_size(d, beta);
    return header + n * record;
}

void write_nvq_file(const std::string& path, const EncodedDataset& enc) {
    const DatasetMeta& meta = enc.meta;
    if (enc.vectors.size() != meta.n || meta.mean.size() != meta.d ||
        meta.permutation.size() != meta.d) {
        throw ConfigError("write_nvq_file: inconsistent dataset meta");
    }
    Writer w(path);
    w.put_bytes(kMagic, 4);
    w.put(kVersion);
    w.put(meta.d);
    w.put(meta.n);
    w.put(meta.m);
    w.put(meta.beta);
    w.put(static_cast<std::uint8_t>(meta.family));
    w.put(meta.partition_seed);
    w.put_bytes(meta.mean.data(), 4ull * meta.d);
    w.put_bytes(meta.permutation.data(), 4ull * meta.d);
    const std::size_t code_bytes = packed_size(meta.d, meta.beta);
    for (const EncodedVector& ev : enc.vectors) {
        if (ev.subs.size() != meta.m || ev.codes.bytes.size() != code_bytes) {
            throw ConfigError("write_nvq_file: malformed encoded vector");
        }
        for (const SubvectorInfo& sub : ev.subs) {
            w.put(sub.interval.x_min);
            w.put(sub.interval.x_max);
            w.put(sub.params.p1);
            w.put(sub.params.p2);
            w.put(static_cast<std::uint8_t>(sub.fell_back ? kFlagUniformFallback : 0));
        }
        w.put_bytes(ev.codes.bytes.data(), code_bytes);
    }
    w.finish();
}

EncodedDataset read_nvq_file(const std::string& path) {
    Reader r(slurp(path), path);
    char magic[4];
    r.take(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError(path + ": bad magic, not an NVQ1 container");
    }
    std::uint16_t version = r.get<std::uint16_t>();
    if (version != kVersion) {
        throw FormatError(path + ": unsupported container version " +
                          std::to_string(version));
    }
    EncodedDataset enc;
    DatasetMeta& meta = enc.meta;
    meta.d = r.get<std::uint32_t>();
    meta.n = r.get<std::uint64_t>();
    meta.m = r.get<std::uint16_t>();
    meta.beta = r.get<std::uint8_t>();
    std::uint8_t family = r.get<std::uint8_t>();
    if (family > 3) throw FormatError(path + ": unknown family tag");
    meta.family = static_cast<Family>(family);
    meta.partition_seed = r.get<std::uint64_t>();
    if (meta.beta != 4 && meta.beta != 8) {
        throw FormatError(path + ": unsupported code width");
    }
    if (meta.d == 0 || meta.m == 0 || meta.d % meta.m != 0) {
        throw FormatError(path + ": inconsistent dimension / subvector count");
    }
    meta.mean.resize(meta.d);
    r.take(meta.mean.data(), 4ull * meta.d);
    meta.permutation.resize(meta.d);
    r.take(meta.permutation.data(), 4ull * meta.d);
    std::vector<bool> seen(meta.d, false);
    for (std::uint32_t v : meta.permutation) {
        if (v >= meta.d || seen[v]) {
            throw FormatError(path + ": permutation is not a bijection");
        }
        seen[v] = true;
    }

    const std::size_t code_bytes = packed_size(meta.d, meta.beta);
    enc.vectors.resize(meta.n);
    for (std::uint64_t i = 0; i < meta.n; ++i) {
        EncodedVector& ev = enc.vectors[i];
        ev.subs.resize(meta.m);
        for (SubvectorInfo& sub : ev.subs) {
            sub.interval.x_min = r.get<float>();
            sub.interval.x_max = r.get<float>();
            sub.params.p1 = r.get<float>();
            sub.params.p2 = r.get<float>();
            sub.params.family = meta.family;
            std::uint8_t flags = r.get<std::uint8_t>();
            sub.fell_back = (flags & kFlagUniformFallback) != 0;
            if (sub.fell_back) sub.params.family = Family::uniform;
        }
        ev.codes.beta = meta.beta;
        ev.codes.count = meta.d;
        ev.codes.bytes.resize(code_bytes);
        r.take(ev.codes.bytes.data(), code_bytes);
    }
    if (!r.at_end()) {
        throw FormatError(path + ": trailing bytes after last record at offset " +
                          std::to_string(r.offset()));
    }
    return enc;
}

}  // namespace nvq
