#include "anh/tx.hpp"

namespace anh {

static void encode_state_key(byte_writer& w, const state_key& k) {
    w.u8(static_cast<uint8_t>(k.which));
    w.raw(k.account.id);
    w.u8(static_cast<uint8_t>(k.account.kind));
    w.str(k.slot);
}

static state_key decode_state_key(byte_reader& r) {
    state_key k;
    uint8_t tag = r.u8();
    if (tag > 2) throw input_error("bad state key tag");
    k.which = static_cast<state_key::tag>(tag);
    r.raw(k.account.id);
    uint8_t kind = r.u8();
    if (kind > 2) throw input_error("bad account kind");
    k.account.kind = static_cast<account_kind>(kind);
    k.slot = r.str();
    return k;
}

byte_vec transaction::body_bytes() const {
    byte_writer w;
    w.u8(static_cast<uint8_t>(kind));
    w.raw(sender.id);
    w.u8(static_cast<uint8_t>(sender.kind));
    w.u64(nonce);
    w.raw(recipient.id);
    w.u8(static_cast<uint8_t>(recipient.kind));
    w.u64(value.units);
    w.u64(gas_limit);
    w.u64(gas_price.units);
    w.str(payload);
    w.u32(static_cast<uint32_t>(declared_writes.size()));
    for (const state_key& k : declared_writes) encode_state_key(w, k);
    return w.out;
}

std::set<state_key> transaction::effective_writes() const {
    std::set<state_key> keys = declared_writes;
    keys.insert(state_key::balance(sender));
    keys.insert(state_key::nonce(sender));
    keys.insert(state_key::balance(recipient));
    return keys;
}

hash32 sign_body(const hash32& secret, std::span<const uint8_t> body) {
    static const std::string tag = "anh.sig";
    return sha256({as_bytes(tag), secret, body});
}

hash32 tx_id_of(std::span<const uint8_t> body, const hash32& signature) {
    static const std::string tag = "anh.tx";
    return sha256({as_bytes(tag), body, signature});
}

void encode_tx(byte_writer& w, const transaction& tx) {
    byte_vec body = tx.body_bytes();
    w.bytes(body);
    w.raw(tx.signature);
    w.raw(tx.tx_id);
}

transaction decode_tx(byte_reader& r) {
    byte_vec body = r.bytes();
    byte_reader br(body);
    transaction tx;
    uint8_t kind = br.u8();
    if (kind > 3) throw input_error("bad transaction kind tag");
    tx.kind = static_cast<tx_kind>(kind);
    br.raw(tx.sender.id);
    uint8_t skind = br.u8();
    if (skind > 2) throw input_error("bad account kind");
    tx.sender.kind = static_cast<account_kind>(skind);
    tx.nonce = br.u64();
    br.raw(tx.recipient.id);
    uint8_t rkind = br.u8();
    if (rkind > 2) throw input_error("bad account kind");
    tx.recipient.kind = static_cast<account_kind>(rkind);
    tx.value.units = br.u64();
    tx.gas_limit = br.u64();
    tx.gas_price.units = br.u64();
    tx.payload = br.str();
    uint32_t nkeys = br.u32();
    for (uint32_t i = 0; i < nkeys; i++) tx.declared_writes.insert(decode_state_key(br));
    if (!br.done()) throw input_error("trailing bytes in transaction body");
    r.raw(tx.signature);
    r.raw(tx.tx_id);
    return tx;
}

transaction tx_builder::sign(const hash32& secret) {
    tx.declared_writes.insert(state_key::balance(tx.sender));
    tx.declared_writes.insert(state_key::nonce(tx.sender));
    tx.declared_writes.insert(state_key::balance(tx.recipient));
    byte_vec body = tx.body_bytes();
    tx.signature = sign_body(secret, body);
    tx.tx_id = tx_id_of(body, tx.signature);
    return tx;
}

}  // namespace anh
