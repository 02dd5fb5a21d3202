#pragma once

#include <variant>

#include "anh/tx.hpp"

namespace anh {

struct contract_record {
    std::string code_text;  // canonical assembly, empty for oath contracts
    bool oath = false;

    bool operator==(const contract_record&) const = default;
};

// The balances, nonces, contract code and storage implied by executing a
// chain prefix. Never referenced by any block hash; whoever wants it runs
// the transactions (or a dependency-closed subset) themselves.
struct world_state {
    std::map<account_id, token_amount> balances;
    std::map<account_id, uint64_t> nonces;
    std::map<account_id, contract_record> contracts;
    std::map<std::pair<account_id, std::string>, uint64_t> storage;

    static world_state at_genesis(const std::map<account_id, token_amount>& allocations);

    token_amount balance_of(const account_id& a) const;
    uint64_t nonce_of(const account_id& a) const;
    uint64_t storage_of(const account_id& a, const std::string& slot) const;
    const contract_record* contract_at(const account_id& a) const;

    bool operator==(const world_state&) const = default;
};

enum class rollback_reason : uint8_t {
    insufficient_balance = 0,
    undeclared_access,
    out_of_gas,
    stack_error,
    arithmetic_error,
    invalid_code,
    missing_contract,
    invalid_oath,
    underfunded_slash,
};

const char* to_string(rollback_reason r);

enum class receipt_status : uint8_t { applied = 0, rolled_back = 1 };

const char* to_string(receipt_status s);

struct state_delta_entry {
    state_key key;
    // token units for balances, counters for nonces, raw words for storage
    uint64_t before = 0;
    uint64_t after = 0;

    bool operator==(const state_delta_entry&) const = default;
};

// What one execution of one transaction did. Always present once a
// transaction is executed, even for rollbacks: the fee and nonce effects
// survive every failure.
struct execution_receipt {
    hash32 tx_id{};
    tx_locator at;
    receipt_status status = receipt_status::applied;
    rollback_reason reason = rollback_reason::insufficient_balance;  // valid iff rolled back
    gas_amount gas_used = 0;  // what the sender is charged for
    gas_amount vm_gas = 0;    // instruction gas actually metered
    token_amount fee_charged;
    token_amount refund;  // fee_charged + refund == fee reservation
    std::vector<state_delta_entry> delta;  // key-ordered, fee/nonce/refund included

    bool applied() const { return status == receipt_status::applied; }
    // after - before for one key; 0 when the key is untouched
    int64_t delta_on(const state_key& k) const;
};

// Journal entry: enough to undo one primitive mutation.
struct journal_record {
    enum class kind : uint8_t { balance, nonce, storage, contract_install };
    kind which;
    account_id account;
    std::string slot;
    uint64_t old_value = 0;
    bool existed = false;
};

// Mutable execution view over a world state. In partial mode only the keys
// in `tracked` may be touched; reaching outside them means the dependency
// closure that planned this execution was wrong, which is an internal
// error, not a user failure.
class exec_state {
public:
    explicit exec_state(world_state ws) : ws_(std::move(ws)) {}
    exec_state(world_state ws, std::set<state_key> tracked)
        : ws_(std::move(ws)), tracked_(std::move(tracked)) {}

    const world_state& state() const { return ws_; }
    world_state take_state() && { return std::move(ws_); }

    token_amount balance_of(const account_id& a);
    void set_balance(const account_id& a, token_amount v);
    uint64_t nonce_of(const account_id& a);
    void set_nonce(const account_id& a, uint64_t v);
    uint64_t storage_of(const account_id& a, const std::string& slot);
    void set_storage(const account_id& a, const std::string& slot, uint64_t v);
    const contract_record* contract_at(const account_id& a);
    void install_contract(const account_id& a, contract_record rec);

    // Rollback boundary handling: mark, then either keep or revert to it.
    size_t mark() const { return journal_.size(); }
    void revert_to(size_t mark);

    // Key-ordered net changes since `mark`, no-op entries dropped.
    std::vector<state_delta_entry> delta_since(size_t mark) const;
    void forget_journal() { journal_.clear(); }

private:
    void guard(const state_key& k) const;
    void note(journal_record rec) { journal_.push_back(std::move(rec)); }

    world_state ws_;
    std::optional<std::set<state_key>> tracked_;
    std::vector<journal_record> journal_;
};

}  // namespace anh
