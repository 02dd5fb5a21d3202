#include "anh/ledger.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace anh {

account_id keychain::register_secret(const hash32& secret) {
    account_id a = user_account_from_secret(secret);
    secrets[a] = secret;
    return a;
}

const hash32* keychain::find(const account_id& a) const {
    auto it = secrets.find(a);
    return it == secrets.end() ? nullptr : &it->second;
}

const char* to_string(admit_reason r) {
    switch (r) {
        case admit_reason::none: return "none";
        case admit_reason::malformed: return "malformed";
        case admit_reason::bad_signature: return "bad_signature";
        case admit_reason::bad_nonce: return "bad_nonce";
        case admit_reason::insufficient_zero_cost_fee: return "insufficient_zero_cost_fee";
    }
    throw internal_error("unknown admit_reason");
}

seal_error::seal_error(size_t i, admit_decision d)
    : std::runtime_error("transaction " + std::to_string(i) + " fails admission (" +
                         to_string(d.reason) + "): " + d.detail),
      index(i),
      decision(std::move(d)) {}

ledger ledger::make_genesis(const std::vector<std::pair<account_id, token_amount>>& allocations,
                            gas_table gt) {
    std::map<account_id, token_amount> alloc;
    for (auto& [account, amount] : allocations) {
        if (!alloc.emplace(account, amount).second)
            throw input_error("duplicate account in genesis allocations: " + account.hex());
    }
    return make_genesis(std::move(alloc), std::move(gt));
}

ledger ledger::make_genesis(std::map<account_id, token_amount> allocations, gas_table gt) {
    if (allocations.empty()) throw input_error("genesis allocations must not be empty");
    for (auto& [account, amount] : allocations) {
        if (is_blackhole(account)) throw input_error("genesis cannot fund the burn address");
        if (amount.units == 0)
            throw input_error("zero genesis allocation for " + account.hex());
    }

    ledger l;
    l.gas = std::move(gt);
    l.genesis_ = std::move(allocations);

    block b;
    b.height = 0;
    b.genesis_alloc = l.genesis_;
    b.block_hash = b.compute_hash();

    admission_state st;
    // Genesis funds are settled by definition: the zero-cost ledger starts
    // at the allocations, which is what lets the very first fees through.
    for (auto& [account, amount] : l.genesis_) st.zc.floor[account] = amount;
    l.adopt(std::move(b), std::move(st));
    return l;
}

admit_decision ledger::check_against(const admission_state& st, const transaction& tx) const {
    using reject = admit_decision;

    if (is_blackhole(tx.sender))
        return reject::reject(admit_reason::malformed, "sender is the burn address");
    if (st.contracts.count(tx.sender))
        return reject::reject(admit_reason::malformed, "contract accounts cannot sign transactions");
    if (tx.gas_price.units == 0)
        return reject::reject(admit_reason::malformed, "gas price must be positive");
    gas_amount intrinsic = gas.intrinsic_of(tx.kind);
    if (tx.gas_limit < intrinsic)
        return reject::reject(admit_reason::malformed,
                              "gas limit " + std::to_string(tx.gas_limit) +
                                  " below intrinsic cost " + std::to_string(intrinsic));

    byte_vec body = tx.body_bytes();
    if (tx.tx_id != tx_id_of(body, tx.signature))
        return reject::reject(admit_reason::malformed, "transaction id does not match body");

    const hash32* secret = keys.find(tx.sender);
    if (!secret)
        return reject::reject(admit_reason::bad_signature,
                              "no key known for sender " + tx.sender.short_hex());
    if (tx.signature != sign_body(*secret, body))
        return reject::reject(admit_reason::bad_signature, "signature check failed");

    auto sent = st.sent.find(tx.sender);
    uint64_t expected = sent == st.sent.end() ? 0 : sent->second;
    if (tx.nonce != expected)
        return reject::reject(admit_reason::bad_nonce,
                              "nonce " + std::to_string(tx.nonce) + ", expected " +
                                  std::to_string(expected));

    if (tx.kind == tx_kind::contract_create &&
        tx.recipient != contract_address(tx.sender, tx.nonce))
        return reject::reject(admit_reason::malformed,
                              "create recipient is not the derived contract address");

    for (const state_key& k : tx.declared_writes) {
        if (k.which != state_key::tag::storage) continue;
        bool known = st.contracts.count(k.account) > 0 ||
                     (tx.kind == tx_kind::contract_create && k.account == tx.recipient);
        if (!known)
            return reject::reject(admit_reason::malformed,
                                  "declared storage on non-contract account " +
                                      k.account.short_hex());
    }

    token_amount fee = tx.fee_reservation();
    token_amount available = st.zc.of(tx.sender);
    if (available < fee)
        return reject::reject(admit_reason::insufficient_zero_cost_fee,
                              "zero-cost balance " + std::to_string(available.units) +
                                  " below fee reservation " + std::to_string(fee.units));
    return admit_decision::accept();
}

// The sealing-time bound update. Deduct what the sender can provably lose,
// credit only what provably arrives: the fee reservation always leaves the
// bound; the value leaves it up to saturation; and only a plain transfer
// fully covered by the sender's own bound credits the recipient, because
// only those cannot fail or roll back at execution. Contract-bound value
// and refunds never credit anyone here.
void ledger::apply_to(admission_state& st, const transaction& tx) {
    st.sent[tx.sender] += 1;

    token_amount zcs = st.zc.of(tx.sender);
    token_amount fee = tx.fee_reservation();
    if (zcs < fee) throw internal_error("zero-cost bound below admitted fee reservation");
    zcs -= fee;

    bool settled = zcs >= tx.value;
    bool recipient_is_user = tx.kind == tx_kind::transfer && !is_blackhole(tx.recipient) &&
                             st.contracts.count(tx.recipient) == 0;
    if (settled)
        zcs -= tx.value;
    else
        zcs = token_amount{0};
    st.zc.floor[tx.sender] = zcs;
    if (settled && recipient_is_user && tx.kind == tx_kind::transfer)
        st.zc.floor[tx.recipient] += tx.value;

    if (tx.kind == tx_kind::contract_create) st.contracts.insert(tx.recipient);
}

void update_zero_cost(const block& b, zero_cost_ledger& zc, std::set<account_id>& contracts) {
    ledger::admission_state st;
    st.zc = zc;
    st.contracts = contracts;
    for (const transaction& tx : b.txs) ledger::apply_to(st, tx);
    zc = std::move(st.zc);
    contracts = std::move(st.contracts);
}

admit_decision ledger::admit(const transaction& tx) const { return check_against(view_, tx); }

void ledger::adopt(block b, admission_state st) {
    chain_.push_back(std::move(b));
    view_ = st;
    post_block_.push_back(std::move(st));
}

block ledger::seal_block(std::vector<transaction> txs) {
    admission_state st = view_;
    for (size_t i = 0; i < txs.size(); i++) {
        admit_decision d = check_against(st, txs[i]);
        if (!d.accepted) throw seal_error(i, std::move(d));
        apply_to(st, txs[i]);
    }
    block b;
    b.height = chain_.size();
    b.prev_hash = head().block_hash;
    b.txs = std::move(txs);
    b.block_hash = b.compute_hash();
    adopt(b, std::move(st));
    return chain_.back();
}

std::pair<block, std::vector<rejected_tx>> ledger::seal_filtered(
    const std::vector<transaction>& candidates) {
    admission_state st = view_;
    std::vector<transaction> accepted;
    std::vector<rejected_tx> rejected;
    for (size_t i = 0; i < candidates.size(); i++) {
        admit_decision d = check_against(st, candidates[i]);
        if (d.accepted) {
            apply_to(st, candidates[i]);
            accepted.push_back(candidates[i]);
        } else {
            rejected.push_back({i, candidates[i].tx_id, std::move(d)});
        }
    }
    block b;
    b.height = chain_.size();
    b.prev_hash = head().block_hash;
    b.txs = std::move(accepted);
    b.block_hash = b.compute_hash();
    if (log_enabled())
        log_line("sealed block " + std::to_string(b.height) + ": admitted " +
                 std::to_string(b.txs.size()) + ", rejected " + std::to_string(rejected.size()));
    adopt(std::move(b), std::move(st));
    return {chain_.back(), std::move(rejected)};
}

validation_result ledger::validate_block(const block& b) const {
    validation_result out;
    auto flag = [&](std::string r) { out.reasons.push_back(std::move(r)); };

    if (b.height != chain_.size())
        flag("height " + std::to_string(b.height) + " does not extend chain at " +
             std::to_string(chain_.size()));
    if (b.prev_hash != head().block_hash) flag("parent hash mismatch");
    if (!b.genesis_alloc.empty()) flag("allocations outside the genesis block");
    if (b.block_hash != b.compute_hash()) flag("stored block hash mismatch");

    admission_state st = view_;
    for (size_t i = 0; i < b.txs.size(); i++) {
        admit_decision d = check_against(st, b.txs[i]);
        if (!d.accepted) {
            flag("tx " + std::to_string(i) + " (" + to_hex(b.txs[i].tx_id).substr(0, 8) +
                 "): " + std::string(to_string(d.reason)) + ": " + d.detail);
            continue;
        }
        apply_to(st, b.txs[i]);
    }
    out.ok = out.reasons.empty();
    return out;
}

void ledger::append_block(const block& b) {
    validation_result v = validate_block(b);
    if (!v.ok) {
        std::string all;
        for (auto& r : v.reasons) all += (all.empty() ? "" : "; ") + r;
        throw input_error("invalid block at height " + std::to_string(b.height) + ": " + all);
    }
    admission_state st = view_;
    for (const transaction& tx : b.txs) apply_to(st, tx);
    adopt(b, std::move(st));
}

uint64_t ledger::tx_count() const {
    uint64_t n = 0;
    for (const block& b : chain_) n += b.txs.size();
    return n;
}

const transaction& ledger::tx_at(uint64_t height, uint64_t offset) const {
    if (height >= chain_.size() || offset >= chain_[height].txs.size())
        throw internal_error("transaction locator out of range: block " +
                             std::to_string(height) + " tx " + std::to_string(offset));
    return chain_[height].txs[offset];
}

tx_locator ledger::locator_at(uint64_t height, uint64_t offset) const {
    return {height, offset, tx_at(height, offset).tx_id};
}

zero_cost_ledger ledger::zero_cost_at(const chain_bound& at) const {
    if (at.is_all()) return view_.zc;
    auto [bh, bo] = *at.upper;
    if (bh >= chain_.size()) return view_.zc;

    admission_state st;
    if (bh == 0) {
        st = post_block_[0];
        return st.zc;  // genesis block carries no transactions
    }
    st = post_block_[bh - 1];
    const block& b = chain_[bh];
    for (uint64_t o = 0; o < bo && o < b.txs.size(); o++) apply_to(st, b.txs[o]);
    return std::move(st.zc);
}

token_amount ledger::genesis_allocation(const account_id& a) const {
    auto it = genesis_.find(a);
    return it == genesis_.end() ? token_amount{} : it->second;
}

token_amount ledger::total_genesis_supply() const {
    token_amount total;
    for (auto& [account, amount] : genesis_) total += amount;
    return total;
}

uint64_t ledger::sent_count_of(const account_id& a) const {
    auto it = view_.sent.find(a);
    return it == view_.sent.end() ? 0 : it->second;
}

static std::string block_file_name(uint64_t height) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "block_%08llu.blk", static_cast<unsigned long long>(height));
    return buf;
}

void ledger::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    gas.save(dir / "gas_table.json");

    nlohmann::ordered_json jkeys;
    for (auto& [account, secret] : keys.secrets) jkeys[account.hex()] = to_hex(secret);
    std::ofstream out(dir / "keys.json");
    if (!out) throw input_error("cannot write keys file");
    out << jkeys.dump(2) << "\n";

    for (const block& b : chain_) save_block_file(b, dir / block_file_name(b.height));
}

ledger ledger::load(const std::filesystem::path& dir) {
    gas_table gt = gas_table::load(dir / "gas_table.json");

    block b0 = load_block_file(dir / block_file_name(0));
    if (b0.height != 0 || !b0.txs.empty() || b0.prev_hash != hash32{} ||
        b0.genesis_alloc.empty())
        throw input_error("malformed genesis block");
    ledger l = make_genesis(b0.genesis_alloc, std::move(gt));
    if (l.head().block_hash != b0.block_hash)
        throw input_error("genesis block hash mismatch");

    std::ifstream in(dir / "keys.json");
    if (!in) throw input_error("missing keys file in " + dir.string());
    nlohmann::json jkeys;
    try {
        in >> jkeys;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("bad keys file: ") + e.what());
    }
    for (auto& [account_hex, secret_hex] : jkeys.items()) {
        hash32 secret = hash32_from_hex(secret_hex.get<std::string>());
        account_id derived = l.keys.register_secret(secret);
        if (derived.hex() != account_hex)
            throw input_error("keys file entry does not match its secret: " + account_hex);
    }

    for (uint64_t h = 1;; h++) {
        std::filesystem::path file = dir / block_file_name(h);
        if (!std::filesystem::exists(file)) break;
        l.append_block(load_block_file(file));
    }
    return l;
}

}  // namespace anh
