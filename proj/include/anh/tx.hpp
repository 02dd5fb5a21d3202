#pragma once

#include <set>

#include "anh/gas.hpp"

namespace anh {

// A signed, fee-bearing chain entry. Blocks commit transactions in a total
// order without executing them, so a transaction records intent (declared
// write set included) and nothing about effects.
struct transaction {
    tx_kind kind = tx_kind::transfer;
    account_id sender;
    uint64_t nonce = 0;  // count of sender's previously sealed transactions
    account_id recipient;
    token_amount value;
    gas_amount gas_limit = 0;
    token_amount gas_price;
    // transfer: unused; create: assembly source; call: JSON initial stack;
    // oath call: JSON claim {query, result, penalty}
    std::string payload;
    std::set<state_key> declared_writes;
    hash32 signature{};
    hash32 tx_id{};

    byte_vec body_bytes() const;  // everything except signature and tx_id

    // Maximum fee, reserved up front: gas_limit * gas_price.
    token_amount fee_reservation() const { return scale(gas_price, gas_limit); }

    // What the sender is out if the transaction seals: value plus the full
    // fee reservation (the refund comes back separately, as income).
    token_amount expense() const { return value + fee_reservation(); }

    // Declared set plus the keys every transaction touches implicitly.
    std::set<state_key> effective_writes() const;

    bool executes_code() const {
        return kind == tx_kind::contract_call || kind == tx_kind::oath_call;
    }
};

hash32 sign_body(const hash32& secret, std::span<const uint8_t> body);
hash32 tx_id_of(std::span<const uint8_t> body, const hash32& signature);

void encode_tx(byte_writer& w, const transaction& tx);
transaction decode_tx(byte_reader& r);

// Fills in the implicit declared keys, signs, and seals the id. Used by the
// scenario runner, the attack generators and tests alike.
struct tx_builder {
    transaction tx;

    tx_builder& kind(tx_kind k) { tx.kind = k; return *this; }
    tx_builder& sender(const account_id& a) { tx.sender = a; return *this; }
    tx_builder& nonce(uint64_t n) { tx.nonce = n; return *this; }
    tx_builder& recipient(const account_id& a) { tx.recipient = a; return *this; }
    tx_builder& value(token_amount v) { tx.value = v; return *this; }
    tx_builder& gas_limit(gas_amount g) { tx.gas_limit = g; return *this; }
    tx_builder& gas_price(token_amount p) { tx.gas_price = p; return *this; }
    tx_builder& payload(std::string p) { tx.payload = std::move(p); return *this; }
    tx_builder& declare(const state_key& k) { tx.declared_writes.insert(k); return *this; }

    transaction sign(const hash32& secret);
};

}  // namespace anh
