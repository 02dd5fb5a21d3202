#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anh {

using byte_vec = std::vector<uint8_t>;
using hash32 = std::array<uint8_t, 32>;

// Unrecoverable logic error inside the simulator. User-level failures
// (bad transactions, failed transfers, rejected payments) are never
// exceptions; they are ordinary return values.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Malformed external input: scenario files, assembly text, CLI arguments.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

hash32 sha256(std::span<const uint8_t> data);
hash32 sha256(std::initializer_list<std::span<const uint8_t>> parts);

std::string to_hex(std::span<const uint8_t> data);
byte_vec from_hex(const std::string& hex);
hash32 hash32_from_hex(const std::string& hex);

inline std::span<const uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

// Checked arithmetic for token and gas amounts: overflow is an internal
// error, never wraparound.
uint64_t add_checked(uint64_t a, uint64_t b);
uint64_t sub_checked(uint64_t a, uint64_t b);
uint64_t mul_checked(uint64_t a, uint64_t b);

// Diagnostics to stderr, enabled by setting ANH_LOG (anything but "0").
bool log_enabled();
void log_line(const std::string& line);

// Canonical little-endian serialization. Every chain hash (tx ids, block
// hashes, gas table digests) is computed over these exact bytes, and block
// files store them verbatim.
struct byte_writer {
    byte_vec out;

    void u8(uint8_t v) { out.push_back(v); }
    void u32(uint32_t v);
    void u64(uint64_t v);
    void raw(std::span<const uint8_t> data);
    void bytes(std::span<const uint8_t> data);  // u32 length prefix
    void str(const std::string& s) { bytes(as_bytes(s)); }
};

struct byte_reader {
    std::span<const uint8_t> in;
    size_t pos = 0;

    explicit byte_reader(std::span<const uint8_t> data) : in(data) {}

    uint8_t u8();
    uint32_t u32();
    uint64_t u64();
    void raw(std::span<uint8_t> out);
    byte_vec bytes();
    std::string str();
    bool done() const { return pos == in.size(); }
};

}  // namespace anh
