#include "anh/types.hpp"

namespace anh {

const char* to_string(account_kind k) {
    switch (k) {
        case account_kind::user: return "user";
        case account_kind::contract: return "contract";
        case account_kind::blackhole: return "blackhole";
    }
    throw internal_error("unknown account_kind");
}

account_id blackhole_account() {
    return {hash32{}, account_kind::blackhole};
}

bool is_blackhole(const account_id& a) {
    return a.id == hash32{};
}

account_id user_account_from_secret(const hash32& secret) {
    static const std::string tag = "anh.user";
    return {sha256({as_bytes(tag), secret}), account_kind::user};
}

account_id contract_address(const account_id& creator, uint64_t nonce) {
    static const std::string tag = "anh.contract";
    byte_writer w;
    w.raw(as_bytes(tag));
    w.raw(creator.id);
    w.u64(nonce);
    return {sha256(w.out), account_kind::contract};
}

account_id derived_account(uint64_t seed, const account_id& sender, uint64_t nonce) {
    static const std::string tag = "anh.derived";
    byte_writer w;
    w.raw(as_bytes(tag));
    w.u64(seed);
    w.raw(sender.id);
    w.u64(nonce);
    return {sha256(w.out), account_kind::user};
}

std::string state_key::describe() const {
    switch (which) {
        case tag::balance: return "balance(" + account.short_hex() + ")";
        case tag::nonce: return "nonce(" + account.short_hex() + ")";
        case tag::storage: return "storage(" + account.short_hex() + ", " + slot + ")";
    }
    throw internal_error("unknown state_key tag");
}

std::string tx_locator::describe() const {
    return "block " + std::to_string(height) + " tx " + std::to_string(offset) + " (" +
           to_hex(tx_id).substr(0, 8) + ")";
}

std::string chain_bound::describe() const {
    if (!upper) return "whole chain";
    return "before block " + std::to_string(upper->first) + " tx " +
           std::to_string(upper->second);
}

}  // namespace anh
