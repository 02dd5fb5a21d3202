#include "anh/base.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <iostream>
#include <limits>

namespace anh {

hash32 sha256(std::span<const uint8_t> data) {
    hash32 out{};
    unsigned int n = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &n, EVP_sha256(), nullptr) != 1 ||
        n != out.size())
        throw internal_error("sha256 failed");
    return out;
}

hash32 sha256(std::initializer_list<std::span<const uint8_t>> parts) {
    byte_vec buf;
    for (auto p : parts) buf.insert(buf.end(), p.begin(), p.end());
    return sha256(buf);
}

static const char* hex_digits = "0123456789abcdef";

std::string to_hex(std::span<const uint8_t> data) {
    std::string s;
    s.reserve(data.size() * 2);
    for (uint8_t b : data) {
        s.push_back(hex_digits[b >> 4]);
        s.push_back(hex_digits[b & 0x0f]);
    }
    return s;
}

static int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

byte_vec from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw input_error("hex string has odd length: " + hex);
    byte_vec out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]), lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) throw input_error("bad hex digit in: " + hex);
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

hash32 hash32_from_hex(const std::string& hex) {
    byte_vec raw = from_hex(hex);
    if (raw.size() != 32) throw input_error("expected 32 hex-encoded bytes, got " + hex);
    hash32 out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

uint64_t add_checked(uint64_t a, uint64_t b) {
    if (a > std::numeric_limits<uint64_t>::max() - b)
        throw internal_error("u64 addition overflow");
    return a + b;
}

uint64_t sub_checked(uint64_t a, uint64_t b) {
    if (b > a) throw internal_error("u64 subtraction underflow");
    return a - b;
}

uint64_t mul_checked(uint64_t a, uint64_t b) {
    if (b != 0 && a > std::numeric_limits<uint64_t>::max() / b)
        throw internal_error("u64 multiplication overflow");
    return a * b;
}

bool log_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("ANH_LOG");
        return v != nullptr && *v != '\0' && std::string(v) != "0";
    }();
    return on;
}

void log_line(const std::string& line) {
    if (log_enabled()) std::cerr << "[anh] " << line << "\n";
}

void byte_writer::u32(uint32_t v) {
    for (int i = 0; i < 4; i++) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void byte_writer::u64(uint64_t v) {
    for (int i = 0; i < 8; i++) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void byte_writer::raw(std::span<const uint8_t> data) {
    out.insert(out.end(), data.begin(), data.end());
}

void byte_writer::bytes(std::span<const uint8_t> data) {
    if (data.size() > std::numeric_limits<uint32_t>::max())
        throw internal_error("byte field too large");
    u32(static_cast<uint32_t>(data.size()));
    raw(data);
}

uint8_t byte_reader::u8() {
    if (pos + 1 > in.size()) throw input_error("truncated input: u8");
    return in[pos++];
}

uint32_t byte_reader::u32() {
    if (pos + 4 > in.size()) throw input_error("truncated input: u32");
    uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= static_cast<uint32_t>(in[pos++]) << (8 * i);
    return v;
}

uint64_t byte_reader::u64() {
    if (pos + 8 > in.size()) throw input_error("truncated input: u64");
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= static_cast<uint64_t>(in[pos++]) << (8 * i);
    return v;
}

void byte_reader::raw(std::span<uint8_t> out) {
    if (pos + out.size() > in.size()) throw input_error("truncated input: raw bytes");
    std::copy(in.begin() + pos, in.begin() + pos + out.size(), out.begin());
    pos += out.size();
}

byte_vec byte_reader::bytes() {
    uint32_t n = u32();
    if (pos + n > in.size()) throw input_error("truncated input: length-prefixed bytes");
    byte_vec out(in.begin() + pos, in.begin() + pos + n);
    pos += n;
    return out;
}

std::string byte_reader::str() {
    byte_vec raw = bytes();
    return std::string(raw.begin(), raw.end());
}

}  // namespace anh
