#include "embkit/store.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace embkit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "store writes little-endian payloads directly");

class ByteWriter {
public:
    explicit ByteWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot open for writing: " + path);
        path_ = path;
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) { bytes(&v, 2); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void close() {
        out_.close();
        if (!out_) throw DataError("write failed: " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

class ByteReader {
public:
    explicit ByteReader(const std::string& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open for reading: " + path);
        buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }
    void bytes(void* p, std::size_t n) {
        if (remaining() < n)
            throw FormatError(path_ + ": truncated at byte offset " + std::to_string(pos_) +
                              " (need " + std::to_string(n) + " more bytes)");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
    std::uint16_t u16() { std::uint16_t v; bytes(&v, 2); return v; }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
    std::string str(std::size_t n) {
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string buf_;
    std::size_t pos_ = 0;
};

constexpr char kTableMagic[4] = {'E', 'M', 'B', 'K'};
constexpr char kModelMagic[4] = {'E', 'M', 'B', 'M'};

} // namespace

void save_table_binary(const EmbeddingTable& table, const std::string& path) {
    if (table.empty()) throw UsageError("refusing to save empty embedding table: " + path);
    ByteWriter w(path);
    w.bytes(kTableMagic, 4);
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(table.dimension()));
    w.u64(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        const std::string& tok = table.tokens()[i];
        if (tok.size() > 0xffff)
            throw UsageError("token longer than 65535 bytes: " + tok.substr(0, 32) + "...");
        w.u16(static_cast<std::uint16_t>(tok.size()));
        w.bytes(tok.data(), tok.size());
        auto v = table.vec_at(i);
        w.bytes(v.data(), v.size() * sizeof(float));
    }
    w.close();
}

EmbeddingTable load_table_binary(const std::string& path) {
    ByteReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kTableMagic, 4) != 0)
        throw FormatError(path + ": bad magic at byte offset 0 (expected EMBK)");
    std::uint8_t version = r.u8();
    if (version != 1)
        throw FormatError(path + ": unsupported version " + std::to_string(version) +
                          " at byte offset 4");
    std::uint32_t dim = r.u32();
    std::uint64_t count = r.u64();
    if (dim == 0) throw FormatError(path + ": zero dimension at byte offset 5");
    if (count == 0) throw FormatError(path + ": empty table at byte offset 9");

    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint16_t len = r.u16();
        std::string token = r.str(len);
        EmbeddingVector v(dim);
        r.bytes(v.data(), static_cast<std::size_t>(dim) * sizeof(float));
        entries.emplace_back(std::move(token), std::move(v));
    }
    if (r.remaining() != 0)
        throw FormatError(path + ": " + std::to_string(r.remaining()) +
                          " trailing bytes at byte offset " + std::to_string(r.offset()));
    return EmbeddingTable(static_cast<int>(dim), std::move(entries),
                          read_table_metadata(path));
}

void save_table_text(const EmbeddingTable& table, const std::string& path) {
    if (table.empty()) throw UsageError("refusing to save empty embedding table: " + path);
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    char buf[48];
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.tokens()[i];
        auto v = table.vec_at(i);
        for (float x : v) {
            std::snprintf(buf, sizeof(buf), " %.6f", static_cast<double>(x));
            out << buf;
        }
        out << '\n';
    }
    out.close();
    if (!out) throw DataError("write failed: " + path);
}

EmbeddingTable load_table_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open for reading: " + path);
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    std::string line;
    int dim = -1;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t sp = line.find(' ');
        if (sp == std::string::npos)
            throw FormatError(path + ": line " + std::to_string(lineno) + ": no vector values");
        std::string token = line.substr(0, sp);
        EmbeddingVector v;
        const char* p = line.c_str() + sp;
        char* end = nullptr;
        while (*p != '\0') {
            double x = std::strtod(p, &end);
            if (end == p) break;
            v.push_back(static_cast<float>(x));
            p = end;
        }
        // strtod consumed everything numeric; anything left is garbage
        while (*p == ' ') ++p;
        if (*p != '\0')
            throw FormatError(path + ": line " + std::to_string(lineno) +
                              ": trailing non-numeric content");
        if (dim == -1) {
            if (v.empty())
                throw FormatError(path + ": line " + std::to_string(lineno) + ": no vector values");
            dim = static_cast<int>(v.size());
        } else if (static_cast<int>(v.size()) != dim) {
            throw FormatError(path + ": line " + std::to_string(lineno) + ": expected " +
                              std::to_string(dim) + " values, found " + std::to_string(v.size()));
        }
        entries.emplace_back(std::move(token), std::move(v));
    }
    if (entries.empty()) throw FormatError(path + ": empty table");
    return EmbeddingTable(dim, std::move(entries), read_table_metadata(path));
}

EmbeddingTable load_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + path);
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    in.close();
    if (std::memcmp(magic, kTableMagic, 4) == 0) return load_table_binary(path);
    return load_table_text(path);
}

void write_table_metadata(const EmbeddingTable& table, const std::string& table_path) {
    nlohmann::ordered_json j;
    j["method"] = table.metadata().method;
    j["config_digest"] = table.metadata().config_digest;
    j["dimension"] = table.dimension();
    j["entries"] = table.size();
    std::ofstream out(table_path + ".meta.json");
    if (!out) throw DataError("cannot open for writing: " + table_path + ".meta.json");
    out << j.dump(2) << '\n';
}

EmbeddingTable::Metadata read_table_metadata(const std::string& table_path) {
    std::string meta_path = table_path + ".meta.json";
    if (!std::filesystem::exists(meta_path)) return {};
    std::ifstream in(meta_path);
    if (!in) return {};
    EmbeddingTable::Metadata meta;
    try {
        nlohmann::json j = nlohmann::json::parse(in);
        meta.method = j.value("method", "");
        meta.config_digest = j.value("config_digest", "");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(meta_path + ": " + e.what());
    }
    return meta;
}

void save_matrices(const std::vector<NamedMatrix>& mats, const std::string& path) {
    ByteWriter w(path);
    w.bytes(kModelMagic, 4);
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(mats.size()));
    for (const auto& m : mats) {
        if (m.values.size() != m.rows * m.cols)
            throw UsageError("matrix '" + m.name + "' has inconsistent shape");
        w.u16(static_cast<std::uint16_t>(m.name.size()));
        w.bytes(m.name.data(), m.name.size());
        w.u32(static_cast<std::uint32_t>(m.rows));
        w.u32(static_cast<std::uint32_t>(m.cols));
        w.bytes(m.values.data(), m.values.size() * sizeof(double));
    }
    w.close();
}

std::vector<NamedMatrix> load_matrices(const std::string& path) {
    ByteReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0)
        throw FormatError(path + ": bad magic at byte offset 0 (expected EMBM)");
    std::uint8_t version = r.u8();
    if (version != 1)
        throw FormatError(path + ": unsupported version " + std::to_string(version));
    std::uint32_t count = r.u32();
    std::vector<NamedMatrix> mats;
    mats.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedMatrix m;
        std::uint16_t len = r.u16();
        m.name = r.str(len);
        m.rows = r.u32();
        m.cols = r.u32();
        m.values.resize(m.rows * m.cols);
        r.bytes(m.values.data(), m.values.size() * sizeof(double));
        mats.push_back(std::move(m));
    }
    if (r.remaining() != 0)
        throw FormatError(path + ": trailing bytes at byte offset " + std::to_string(r.offset()));
    return mats;
}

} // namespace embkit
