#pragma once

#include <compare>
#include <optional>
#include <utility>

#include "anh/base.hpp"

namespace anh {

using gas_amount = uint64_t;

// Smallest token unit. Amounts are never negative anywhere in the system;
// arithmetic throws on overflow instead of wrapping.
struct token_amount {
    uint64_t units = 0;

    friend token_amount operator+(token_amount a, token_amount b) {
        return {add_checked(a.units, b.units)};
    }
    friend token_amount operator-(token_amount a, token_amount b) {
        return {sub_checked(a.units, b.units)};
    }
    token_amount& operator+=(token_amount o) {
        units = add_checked(units, o.units);
        return *this;
    }
    token_amount& operator-=(token_amount o) {
        units = sub_checked(units, o.units);
        return *this;
    }
    auto operator<=>(const token_amount&) const = default;
};

inline token_amount tokens(uint64_t units) { return {units}; }

inline token_amount scale(token_amount per_unit, uint64_t count) {
    return {mul_checked(per_unit.units, count)};
}

enum class account_kind : uint8_t { user = 0, contract = 1, blackhole = 2 };

const char* to_string(account_kind k);

// 32-byte account identity. The kind tag travels with the id for
// readability, but equality, ordering and serialization use the id bytes
// alone; whether an address actually holds code is decided by the chain.
struct account_id {
    hash32 id{};
    account_kind kind = account_kind::user;

    bool operator==(const account_id& o) const { return id == o.id; }
    auto operator<=>(const account_id& o) const { return id <=> o.id; }
    std::string hex() const { return to_hex(id); }
    std::string short_hex() const { return to_hex(id).substr(0, 8); }
};

// The burn address: funds sent here are gone for good. All-zero id.
account_id blackhole_account();
bool is_blackhole(const account_id& a);

account_id user_account_from_secret(const hash32& secret);
// Address a contract deployment lands at: fixed by creator identity and
// nonce, so it is known before the deployment ever executes.
account_id contract_address(const account_id& creator, uint64_t nonce);
// Address minted by the DERIVE_ACCOUNT instruction. Depends only on the
// seed word and the calling transaction's (sender, nonce), which makes it
// computable when the transaction is built and declared in its write set.
account_id derived_account(uint64_t seed, const account_id& sender, uint64_t nonce);

// A unit of chain-addressable state: an account balance, an account nonce,
// or one contract storage slot.
struct state_key {
    enum class tag : uint8_t { balance = 0, nonce = 1, storage = 2 };

    tag which = tag::balance;
    account_id account;
    std::string slot;  // storage only

    static state_key balance(const account_id& a) { return {tag::balance, a, {}}; }
    static state_key nonce(const account_id& a) { return {tag::nonce, a, {}}; }
    static state_key storage(const account_id& a, std::string s) {
        return {tag::storage, a, std::move(s)};
    }

    bool operator==(const state_key& o) const {
        return which == o.which && account == o.account && slot == o.slot;
    }
    auto operator<=>(const state_key& o) const {
        if (auto c = which <=> o.which; c != 0) return c;
        if (auto c = account <=> o.account; c != 0) return c;
        return slot <=> o.slot;
    }
    std::string describe() const;
};

// Position of a transaction in the chain's total order.
struct tx_locator {
    uint64_t height = 0;  // block height
    uint64_t offset = 0;  // index within the block
    hash32 tx_id{};

    bool operator==(const tx_locator& o) const {
        return height == o.height && offset == o.offset;
    }
    auto operator<=>(const tx_locator& o) const {
        if (auto c = height <=> o.height; c != 0) return c;
        return offset <=> o.offset;
    }
    std::string describe() const;
};

// A prefix of the chain: which transaction positions a query, scan or
// replay is allowed to see. Stored as an exclusive (height, offset) upper
// limit; no limit means the entire chain.
struct chain_bound {
    std::optional<std::pair<uint64_t, uint64_t>> upper;

    static chain_bound all() { return {}; }
    static chain_bound nothing() { return {{{0, 0}}}; }
    static chain_bound before(const tx_locator& l) { return {{{l.height, l.offset}}}; }
    static chain_bound through(const tx_locator& l) { return {{{l.height, l.offset + 1}}}; }
    // everything up to and including block `height`
    static chain_bound through_block(uint64_t height) { return {{{height + 1, 0}}}; }

    bool admits(uint64_t height, uint64_t offset) const {
        return !upper || std::pair{height, offset} < *upper;
    }
    bool admits(const tx_locator& l) const { return admits(l.height, l.offset); }
    bool is_all() const { return !upper; }
    std::string describe() const;
};

}  // namespace anh
