#include "anh/state.hpp"

#include <algorithm>

namespace anh {

world_state world_state::at_genesis(const std::map<account_id, token_amount>& allocations) {
    world_state ws;
    ws.balances = allocations;
    return ws;
}

token_amount world_state::balance_of(const account_id& a) const {
    auto it = balances.find(a);
    return it == balances.end() ? token_amount{} : it->second;
}

uint64_t world_state::nonce_of(const account_id& a) const {
    auto it = nonces.find(a);
    return it == nonces.end() ? 0 : it->second;
}

uint64_t world_state::storage_of(const account_id& a, const std::string& slot) const {
    auto it = storage.find({a, slot});
    return it == storage.end() ? 0 : it->second;
}

const contract_record* world_state::contract_at(const account_id& a) const {
    auto it = contracts.find(a);
    return it == contracts.end() ? nullptr : &it->second;
}

const char* to_string(rollback_reason r) {
    switch (r) {
        case rollback_reason::insufficient_balance: return "insufficient_balance";
        case rollback_reason::undeclared_access: return "undeclared_access";
        case rollback_reason::out_of_gas: return "out_of_gas";
        case rollback_reason::stack_error: return "stack_error";
        case rollback_reason::arithmetic_error: return "arithmetic_error";
        case rollback_reason::invalid_code: return "invalid_code";
        case rollback_reason::missing_contract: return "missing_contract";
        case rollback_reason::invalid_oath: return "invalid_oath";
        case rollback_reason::underfunded_slash: return "underfunded_slash";
    }
    throw internal_error("unknown rollback_reason");
}

const char* to_string(receipt_status s) {
    switch (s) {
        case receipt_status::applied: return "applied";
        case receipt_status::rolled_back: return "rolled_back";
    }
    throw internal_error("unknown receipt_status");
}

int64_t execution_receipt::delta_on(const state_key& k) const {
    for (const state_delta_entry& e : delta) {
        if (e.key == k)
            return static_cast<int64_t>(e.after) - static_cast<int64_t>(e.before);
    }
    return 0;
}

void exec_state::guard(const state_key& k) const {
    if (tracked_ && tracked_->count(k) == 0)
        throw internal_error("execution touched untracked key " + k.describe());
}

token_amount exec_state::balance_of(const account_id& a) {
    guard(state_key::balance(a));
    return ws_.balance_of(a);
}

void exec_state::set_balance(const account_id& a, token_amount v) {
    guard(state_key::balance(a));
    auto it = ws_.balances.find(a);
    note({journal_record::kind::balance, a, {}, it == ws_.balances.end() ? 0 : it->second.units,
          it != ws_.balances.end()});
    ws_.balances[a] = v;
}

uint64_t exec_state::nonce_of(const account_id& a) {
    guard(state_key::nonce(a));
    return ws_.nonce_of(a);
}

void exec_state::set_nonce(const account_id& a, uint64_t v) {
    guard(state_key::nonce(a));
    auto it = ws_.nonces.find(a);
    note({journal_record::kind::nonce, a, {}, it == ws_.nonces.end() ? 0 : it->second,
          it != ws_.nonces.end()});
    ws_.nonces[a] = v;
}

uint64_t exec_state::storage_of(const account_id& a, const std::string& slot) {
    guard(state_key::storage(a, slot));
    return ws_.storage_of(a, slot);
}

void exec_state::set_storage(const account_id& a, const std::string& slot, uint64_t v) {
    guard(state_key::storage(a, slot));
    auto it = ws_.storage.find({a, slot});
    note({journal_record::kind::storage, a, slot, it == ws_.storage.end() ? 0 : it->second,
          it != ws_.storage.end()});
    ws_.storage[{a, slot}] = v;
}

// Code lives under the contract's balance key for tracking purposes: any
// closure that pulls in a contract's balance has necessarily pulled in the
// deployment that installed its code.
const contract_record* exec_state::contract_at(const account_id& a) {
    guard(state_key::balance(a));
    return ws_.contract_at(a);
}

void exec_state::install_contract(const account_id& a, contract_record rec) {
    guard(state_key::balance(a));
    if (ws_.contracts.count(a)) throw internal_error("contract already installed");
    note({journal_record::kind::contract_install, a, {}, 0, false});
    ws_.contracts[a] = std::move(rec);
}

void exec_state::revert_to(size_t mark) {
    while (journal_.size() > mark) {
        const journal_record& rec = journal_.back();
        switch (rec.which) {
            case journal_record::kind::balance:
                if (rec.existed)
                    ws_.balances[rec.account] = token_amount{rec.old_value};
                else
                    ws_.balances.erase(rec.account);
                break;
            case journal_record::kind::nonce:
                if (rec.existed)
                    ws_.nonces[rec.account] = rec.old_value;
                else
                    ws_.nonces.erase(rec.account);
                break;
            case journal_record::kind::storage:
                if (rec.existed)
                    ws_.storage[{rec.account, rec.slot}] = rec.old_value;
                else
                    ws_.storage.erase({rec.account, rec.slot});
                break;
            case journal_record::kind::contract_install:
                ws_.contracts.erase(rec.account);
                break;
        }
        journal_.pop_back();
    }
}

std::vector<state_delta_entry> exec_state::delta_since(size_t mark) const {
    std::map<state_key, uint64_t> first_old;
    for (size_t i = mark; i < journal_.size(); i++) {
        const journal_record& rec = journal_[i];
        state_key key;
        switch (rec.which) {
            case journal_record::kind::balance: key = state_key::balance(rec.account); break;
            case journal_record::kind::nonce: key = state_key::nonce(rec.account); break;
            case journal_record::kind::storage:
                key = state_key::storage(rec.account, rec.slot);
                break;
            case journal_record::kind::contract_install:
                continue;  // code presence is not a numeric state key
        }
        first_old.emplace(key, rec.old_value);
    }

    std::vector<state_delta_entry> out;
    for (auto& [key, before] : first_old) {
        uint64_t after = 0;
        switch (key.which) {
            case state_key::tag::balance: after = ws_.balance_of(key.account).units; break;
            case state_key::tag::nonce: after = ws_.nonce_of(key.account); break;
            case state_key::tag::storage:
                after = ws_.storage_of(key.account, key.slot);
                break;
        }
        if (before != after) out.push_back({key, before, after});
    }
    return out;
}

}  // namespace anh
