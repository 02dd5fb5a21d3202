#pragma once

#include <set>

#include "anh/block.hpp"

namespace anh {

// Lower bound on each account's balance, funded only by transfers whose
// settlement is provable without running anything: genesis allocations and
// user-to-user transfers fully covered by the sender's own bound. This is
// the only state admission ever consults, so admitting a transaction costs
// a couple of map lookups no matter how long the chain is.
struct zero_cost_ledger {
    std::map<account_id, token_amount> floor;

    token_amount of(const account_id& a) const {
        auto it = floor.find(a);
        return it == floor.end() ? token_amount{} : it->second;
    }
};

// Account secrets held by the scenario runner, standing in for real key
// pairs. A signature is a keyed hash over the transaction body; validators
// verify it against the registered secret.
struct keychain {
    std::map<account_id, hash32> secrets;

    account_id register_secret(const hash32& secret);
    const hash32* find(const account_id& a) const;
};

enum class admit_reason : uint8_t {
    none = 0,
    malformed,
    bad_signature,
    bad_nonce,
    insufficient_zero_cost_fee,
};

const char* to_string(admit_reason r);

struct admit_decision {
    bool accepted = false;
    admit_reason reason = admit_reason::none;
    std::string detail;

    static admit_decision accept() { return {true, admit_reason::none, {}}; }
    static admit_decision reject(admit_reason r, std::string d) {
        return {false, r, std::move(d)};
    }
};

// Strict sealing was handed a transaction that fails admission.
struct seal_error : std::runtime_error {
    size_t index;
    admit_decision decision;

    seal_error(size_t i, admit_decision d);
};

struct rejected_tx {
    size_t index = 0;
    hash32 tx_id{};
    admit_decision decision;
};

struct validation_result {
    bool ok = false;
    std::vector<std::string> reasons;
};

// The chain plus everything a validator keeps alongside it: the zero-cost
// ledger, per-sender sent counts (the nonce source) and the statically
// known contract addresses. All of it is derived from sealed blocks alone;
// no transaction is ever executed here.
class ledger {
public:
    gas_table gas;
    keychain keys;

    static ledger make_genesis(const std::vector<std::pair<account_id, token_amount>>& allocations,
                               gas_table gt = gas_table::defaults());
    static ledger make_genesis(std::map<account_id, token_amount> allocations,
                               gas_table gt = gas_table::defaults());

    // Admission: structure, signature, nonce, then the zero-cost fee rule.
    // Consults no executed state whatsoever.
    admit_decision admit(const transaction& tx) const;

    // Seals exactly the given transactions as the next block; throws
    // seal_error if any of them fails admission.
    block seal_block(std::vector<transaction> txs);

    // Seals whatever passes admission (possibly an empty block) and reports
    // the rest. This is the mempool-facing path.
    std::pair<block, std::vector<rejected_tx>> seal_filtered(
        const std::vector<transaction>& candidates);

    // Checks a candidate for the next height: linkage, hashes, and a full
    // admission replay of its transactions.
    validation_result validate_block(const block& b) const;
    void append_block(const block& b);  // validate_block + adopt, throws input_error

    const std::vector<block>& blocks() const { return chain_; }
    const block& head() const { return chain_.back(); }
    uint64_t next_height() const { return chain_.size(); }
    uint64_t tx_count() const;
    const transaction& tx_at(uint64_t height, uint64_t offset) const;
    const transaction& tx_at(const tx_locator& l) const { return tx_at(l.height, l.offset); }
    tx_locator locator_at(uint64_t height, uint64_t offset) const;

    const zero_cost_ledger& zero_cost() const { return view_.zc; }
    // Bound as of an older chain position: cheap replay from the nearest
    // post-block snapshot, still execution-free.
    zero_cost_ledger zero_cost_at(const chain_bound& at) const;

    token_amount genesis_allocation(const account_id& a) const;
    token_amount total_genesis_supply() const;
    const std::map<account_id, token_amount>& genesis_allocations() const { return genesis_; }

    bool is_contract_address(const account_id& a) const { return view_.contracts.count(a) > 0; }
    uint64_t sent_count_of(const account_id& a) const;

    // Directory layout: gas_table.json, keys.json, block_00000000.blk,
    // block_00000001.blk, ... (contiguous heights, canonical bytes).
    void save(const std::filesystem::path& dir) const;
    static ledger load(const std::filesystem::path& dir);

private:
    friend void update_zero_cost(const block& b, zero_cost_ledger& zc,
                                 std::set<account_id>& contracts);

    struct admission_state {
        zero_cost_ledger zc;
        std::map<account_id, uint64_t> sent;
        std::set<account_id> contracts;
    };

    ledger() = default;

    admit_decision check_against(const admission_state& st, const transaction& tx) const;
    static void apply_to(admission_state& st, const transaction& tx);
    void adopt(block b, admission_state st);

    std::vector<block> chain_;
    std::map<account_id, token_amount> genesis_;
    admission_state view_;                    // state at chain head
    std::vector<admission_state> post_block_; // snapshot after each block
};

// Re-derives the zero-cost effects of one sealed block. `contracts` must
// hold the statically known contract addresses from before the block; the
// block's own creations are added as they are passed. Exposed for tests;
// sealing uses the same per-transaction rule.
void update_zero_cost(const block& b, zero_cost_ledger& zc, std::set<account_id>& contracts);

}  // namespace anh
