#include "gdsp/checkpoint.hpp"

#include <fstream>

namespace gdsp {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4)
        throw std::runtime_error(std::string("checkpoint: truncated reading ") + what +
                                 " at byte offset " + std::to_string(in.tellg() >= 0 ? long(in.tellg()) : -1));
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(v));
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in, std::streamoff offset) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (in.gcount() != 8)
        throw std::runtime_error("checkpoint: truncated value at byte offset " +
                                 std::to_string(offset));
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

void write_records(const RecordMap& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write("GDSP", 4);
    put_u32(out, kCheckpointVersion);
    for (const auto& [name, rec] : records) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(rec.dims.size()));
        std::size_t n = 1;
        for (std::uint32_t d : rec.dims) {
            put_u32(out, d);
            n *= d;
        }
        if (n != rec.values.size())
            throw std::invalid_argument("checkpoint: record " + name + " dims/value mismatch");
        for (double v : rec.values) put_f64(out, v);
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

RecordMap read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::string(magic, 4) != "GDSP")
        throw std::runtime_error("checkpoint: bad magic at byte offset 0");
    const std::uint32_t version = get_u32(in, "version");
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));
    RecordMap records;
    while (true) {
        in.peek();
        if (in.eof()) break;
        const std::uint32_t name_len = get_u32(in, "name length");
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (in.gcount() != static_cast<std::streamsize>(name_len))
            throw std::runtime_error("checkpoint: truncated name at byte offset " +
                                     std::to_string(long(in.tellg())));
        Record rec;
        const std::uint32_t rank = get_u32(in, "rank");
        std::size_t n = 1;
        rec.dims.resize(rank);
        for (std::uint32_t i = 0; i < rank; ++i) {
            rec.dims[i] = get_u32(in, "dim");
            n *= rec.dims[i];
        }
        rec.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) rec.values[i] = get_f64(in, in.tellg());
        records.emplace(std::move(name), std::move(rec));
    }
    return records;
}

}  // namespace gdsp
