#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrseq {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncatedFileError : IoError {
    using IoError::IoError;
};
struct VersionMismatchError : IoError {
    using IoError::IoError;
};
struct ChecksumError : IoError {
    using IoError::IoError;
};

std::uint32_t crc32(std::span<const unsigned char> bytes);

// Little-endian binary file with layout: 4-byte magic, version byte, payload,
// trailing CRC32 over the payload bytes only. The version is checked before
// the checksum so a bumped version byte reports as a version mismatch.
class BinWriter {
public:
    BinWriter(const char magic[4], std::uint8_t version);

    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f64_span(std::span<const double> v);
    void str(const std::string& s);  // u32 length prefix

    void write_file(const std::string& path) const;

private:
    std::string magic_;
    std::uint8_t version_;
    std::vector<unsigned char> payload_;
};

class BinReader {
public:
    static BinReader read_file(const std::string& path, const char magic[4],
                               std::uint8_t expected_version);

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void f64_span(std::span<double> out);
    std::string str();

    bool at_end() const { return pos_ == payload_.size(); }

private:
    BinReader() = default;
    void need(size_t n) const;

    std::vector<unsigned char> payload_;
    size_t pos_ = 0;
};

}  // namespace vrseq
