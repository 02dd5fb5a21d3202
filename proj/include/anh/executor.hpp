#pragma once

#include "anh/txindex.hpp"
#include "anh/vm.hpp"

#include "json.hpp"

namespace anh {

// Something an observer wants to know about executed state, pinned to a
// chain prefix. Consensus never answers these; whoever asks pays for the
// execution needed to answer.
struct query {
    enum class kind_t : uint8_t {
        exact_balance = 0,
        balance_at_least = 1,
        transfer_succeeded = 2,
        storage_value = 3,
    };

    kind_t kind = kind_t::exact_balance;
    account_id account;   // exact_balance / balance_at_least / storage_value
    token_amount amount;  // balance_at_least threshold
    hash32 tx_ref{};      // transfer_succeeded
    std::string slot;     // storage_value
    chain_bound at;       // ignored for transfer_succeeded (the tx pins it)

    static query exact_balance(const account_id& a, const chain_bound& at) {
        return {kind_t::exact_balance, a, {}, {}, {}, at};
    }
    static query balance_at_least(const account_id& a, token_amount threshold,
                                  const chain_bound& at) {
        return {kind_t::balance_at_least, a, threshold, {}, {}, at};
    }
    static query transfer_succeeded(const hash32& tx) {
        return {kind_t::transfer_succeeded, {}, {}, tx, {}, {}};
    }
    static query storage_value(const account_id& contract, std::string slot,
                               const chain_bound& at) {
        return {kind_t::storage_value, contract, {}, {}, std::move(slot), at};
    }

    std::string describe() const;
};

const char* to_string(query::kind_t k);

struct query_result {
    bool is_numeric = false;
    uint64_t value = 0;  // numeric queries
    bool truth = false;  // boolean queries

    static query_result number(uint64_t v) { return {true, v, false}; }
    static query_result boolean(bool b) { return {false, 0, b}; }
    bool operator==(const query_result&) const = default;
    std::string describe() const;
};

nlohmann::json query_to_json(const query& q);
query query_from_json(const nlohmann::json& j);
nlohmann::json bound_to_json(const chain_bound& b);
chain_bound bound_from_json(const nlohmann::json& j);

// What answering something cost: transactions applied and instruction gas
// metered, including any nested oath checking.
struct cost_report {
    uint64_t txs_executed = 0;
    uint64_t vm_steps = 0;
    gas_amount vm_gas = 0;
};

struct eager_options {
    chain_bound upto = chain_bound::all();
    bool keep_block_states = false;  // snapshot the state after every block
};

struct eager_result {
    world_state state;
    std::vector<execution_receipt> receipts;  // chain order
    std::vector<world_state> block_states;    // when requested
    token_amount fee_pool;                    // accumulated charged fees
    cost_report cost;

    const execution_receipt* receipt_of(const hash32& tx_id) const;

private:
    friend eager_result eager_execute(const ledger& l, const eager_options& opt);
    std::map<hash32, size_t> by_id_;
};

// Runs every transaction in the bound, in chain order, from genesis. The
// reference answer for everything else in the system.
eager_result eager_execute(const ledger& l, const eager_options& opt = {});

// Answers a query against an executed prefix. The state (and receipts)
// must come from a run whose bound matches the query's.
query_result answer_on_state(const query& q, const world_state& ws,
                             std::span<const execution_receipt> receipts);

// Total genesis supply must equal circulating balances plus charged fees;
// anything else is an execution bug.
void check_supply(const world_state& ws, token_amount fee_pool, const ledger& l);

// The transactions that can influence a set of state keys within a bound:
// the fixpoint of pulling every writer of every reachable key.
struct provenance_closure {
    std::vector<tx_locator> members;  // chain order
    std::set<state_key> frontier;     // every key the members may touch
    gas_amount gas_limit_total = 0;   // sum of member gas limits (cost ceiling)
};

provenance_closure dependency_closure(const state_key& key, const chain_bound& at,
                                      const ledger& l, const inverted_index& idx);
provenance_closure dependency_closure_of(std::set<state_key> seed, const chain_bound& at,
                                         const ledger& l, const inverted_index& idx);

// Executes exactly a closure's members against a partial state holding only
// the frontier keys (seeded from genesis). Receipts come out identical to
// an eager run's, which is the whole point.
struct closure_run {
    std::map<hash32, execution_receipt> receipts;
    world_state state;  // partial: only frontier keys are meaningful
};
closure_run execute_closure(const provenance_closure& c, const ledger& l,
                            const inverted_index& idx, vm_meter& meter);

struct closure_exceeds_budget : std::runtime_error {
    gas_amount ceiling;
    gas_amount budget;
    closure_exceeds_budget(gas_amount c, gas_amount b);
};

struct observe_outcome {
    query_result result;
    cost_report cost;
    provenance_closure closure;
};

// The lazy path: build the dependency closure for the query, execute only
// that, and project the answer. An optional gas budget rejects over-sized
// closures before any execution happens.
observe_outcome observe(const query& q, const ledger& l, const inverted_index& idx,
                        std::optional<gas_amount> gas_budget = std::nullopt);

// Oath claim payloads: a query, the result the oracle recorded for it, and
// the stake to burn if the record is wrong.
struct oath_claim_payload {
    query q;
    query_result recorded;
    token_amount penalty;
};

std::optional<oath_claim_payload> parse_oath_payload(const std::string& payload);
std::string oath_payload_text(const oath_claim_payload& p);

// Resolvers for apply_context::oath_eval. The eager one re-runs the prefix
// the claim points at; the lazy one observes through closures, billing the
// shared meter (the auditor pays, not the claim).
std::function<oath_verdict(const std::string&, const tx_locator&)> eager_oath_resolver(
    const ledger& l);
std::function<oath_verdict(const std::string&, const tx_locator&)> lazy_oath_resolver(
    const ledger& l, const inverted_index& idx, vm_meter& meter);

}  // namespace anh
