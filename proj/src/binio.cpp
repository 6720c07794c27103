#include "vrseq/binio.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace vrseq {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

template <typename T>
void append_le(std::vector<unsigned char>& out, T v) {
    static_assert(std::endian::native == std::endian::little);
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T read_le(const unsigned char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

}  // namespace

std::uint32_t crc32(std::span<const unsigned char> bytes) {
    static const auto table = make_crc_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (unsigned char b : bytes) c = table[(c ^ b) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

BinWriter::BinWriter(const char magic[4], std::uint8_t version)
    : magic_(magic, 4), version_(version) {}

void BinWriter::u8(std::uint8_t v) { payload_.push_back(v); }
void BinWriter::u32(std::uint32_t v) { append_le(payload_, v); }
void BinWriter::u64(std::uint64_t v) { append_le(payload_, v); }
void BinWriter::f64(double v) { append_le(payload_, v); }

void BinWriter::f64_span(std::span<const double> v) {
    for (double x : v) f64(x);
}

void BinWriter::str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    payload_.insert(payload_.end(), s.begin(), s.end());
}

void BinWriter::write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(magic_.data(), 4);
    const char v = static_cast<char>(version_);
    f.write(&v, 1);
    f.write(reinterpret_cast<const char*>(payload_.data()),
            static_cast<std::streamsize>(payload_.size()));
    const std::uint32_t crc = crc32(payload_);
    std::vector<unsigned char> tail;
    append_le(tail, crc);
    f.write(reinterpret_cast<const char*>(tail.data()), 4);
    if (!f) throw IoError("write failed: " + path);
}

BinReader BinReader::read_file(const std::string& path, const char magic[4],
                               std::uint8_t expected_version) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 9) throw TruncatedFileError("file too short: " + path);
    if (std::memcmp(bytes.data(), magic, 4) != 0)
        throw IoError("bad magic in " + path);
    const std::uint8_t version = bytes[4];
    if (version != expected_version)
        throw VersionMismatchError("unsupported format version " + std::to_string(version) +
                                   " in " + path);
    const size_t payload_len = bytes.size() - 9;
    const std::uint32_t stored = read_le<std::uint32_t>(bytes.data() + 5 + payload_len);
    BinReader r;
    r.payload_.assign(bytes.begin() + 5, bytes.begin() + 5 + payload_len);
    if (crc32(r.payload_) != stored) throw ChecksumError("checksum mismatch in " + path);
    return r;
}

void BinReader::need(size_t n) const {
    if (pos_ + n > payload_.size()) throw TruncatedFileError("payload truncated");
}

std::uint8_t BinReader::u8() {
    need(1);
    return payload_[pos_++];
}

std::uint32_t BinReader::u32() {
    need(4);
    const auto v = read_le<std::uint32_t>(payload_.data() + pos_);
    pos_ += 4;
    return v;
}

std::uint64_t BinReader::u64() {
    need(8);
    const auto v = read_le<std::uint64_t>(payload_.data() + pos_);
    pos_ += 8;
    return v;
}

double BinReader::f64() {
    need(8);
    const auto v = read_le<double>(payload_.data() + pos_);
    pos_ += 8;
    return v;
}

void BinReader::f64_span(std::span<double> out) {
    for (double& x : out) x = f64();
}

std::string BinReader::str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(payload_.data() + pos_), n);
    pos_ += n;
    return s;
}

}  // namespace vrseq
