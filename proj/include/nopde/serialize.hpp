#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nopde/errors.hpp"

namespace nopde {

/// Little-endian byte sink for the binary file formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f64_array(std::span<const double> v);
    void magic(const char tag[4]);

    const std::string& bytes() const { return buf_; }

private:
    std::string buf_;
};

/// Little-endian reader; throws TruncatedFileError past the end.
class ByteReader {
public:
    explicit ByteReader(std::span<const char> data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::vector<double> f64_array(std::size_t count);
    void expect_magic(const char tag[4]);
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const;

    std::span<const char> data_;
    std::size_t pos_ = 0;
};

void write_file(const std::string& path, std::span<const char> bytes);
std::string read_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Shortest-round-trip decimal rendering used by every CSV/manifest writer.
std::string format_double(double v);

} // namespace nopde
