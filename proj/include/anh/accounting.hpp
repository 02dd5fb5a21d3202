#pragma once

#include "anh/executor.hpp"

namespace anh {

enum class income_case : uint8_t {
    direct = 0,    // someone else's transaction raised our balance
    residual = 1,  // our own transaction returned part of its outlay (refunds
                   // included, and everything on rollback except the fee)
};

const char* to_string(income_case c);

// One confirmed (or cached) income event for an account. `amount` and
// `cost_hint` are client-side cache values: every consumer that matters
// re-derives the amount by executing the income's support.
struct income_record {
    tx_locator at;
    account_id beneficiary;
    token_amount amount;
    income_case kind = income_case::direct;
    gas_amount cost_hint = 0;
};

struct income_catalog {
    account_id account;
    std::vector<income_record> entries;  // chain order
};

// Reads one executed receipt as income for `x`. Yields nothing when the
// transaction did not pay x (zero counts as nothing).
std::optional<income_record> classify_income(const execution_receipt& receipt,
                                             const transaction& tx, const account_id& x);

// The minimal execution plan that confirms a set of income amounts.
// Members are applied in chain order; `executed` ones run the machine,
// the rest are transfers and deployments whose outcome the zero-cost
// ledger already proves, applied as synthesized receipts for free. Keys
// that members only write are tracked but never chased, which is what
// keeps hostile floods out of the plan.
struct income_support {
    struct member {
        tx_locator at;
        bool executed = false;
    };
    std::vector<member> members;  // chain order
    std::set<state_key> tracked;
    gas_amount exec_gas_ceiling = 0;  // sum of executed members' gas limits
};

income_support plan_support(const std::vector<tx_locator>& targets, const ledger& l,
                            const inverted_index& idx);

struct support_run {
    std::map<hash32, execution_receipt> receipts;
    cost_report cost;          // what the verifier spent
    gas_amount income_gas = 0; // sum of gas_used over machine-executing members
};

support_run run_support(const income_support& s, const ledger& l, const inverted_index& idx,
                        vm_meter& meter);

// Gas needed to confirm one income's amount: the support of that single
// income, costed by its machine-executing members. Zero exactly when the
// whole support settles through the zero-cost ledger.
gas_amount income_cost(const tx_locator& income_tx, const ledger& l,
                       const inverted_index& idx);

// The provable floor on a balance: genesis allocation, plus confirmed
// income over a chosen set, minus the worst-case outflow of everything the
// account ever sent. Never an estimate in the unsound direction.
struct balance_bound {
    token_amount x0;
    token_amount p_theta;
    token_amount q_expenses;

    long long signed_floor() const {
        return static_cast<long long>(x0.units) + static_cast<long long>(p_theta.units) -
               static_cast<long long>(q_expenses.units);
    }
    token_amount floor() const {
        long long f = signed_floor();
        return token_amount{f > 0 ? static_cast<uint64_t>(f) : 0};
    }
};

struct verified_incomes {
    token_amount total;
    std::map<hash32, token_amount> by_tx;
    cost_report cost;
    gas_amount income_gas = 0;
};

verified_incomes verify_incomes(const account_id& x, const std::vector<tx_locator>& thetas,
                                const ledger& l, const inverted_index& idx, vm_meter& meter);

// Picks which catalog entries to prove so that the resulting floor covers
// `required`, minimizing the cached confirmation cost. Exact search up to
// 20 usable entries, cost-density greedy with redundancy pruning above.
struct theta_selection {
    bool feasible = false;
    std::vector<tx_locator> picked;  // chain order
    gas_amount est_cost = 0;
    token_amount est_amount;
};

theta_selection select_theta(const income_catalog& cat, token_amount required,
                             token_amount q_expenses, token_amount x0);
theta_selection select_theta_exact(const income_catalog& cat, token_amount required,
                                   token_amount q_expenses, token_amount x0);
theta_selection select_theta_greedy(const income_catalog& cat, token_amount required,
                                    token_amount q_expenses, token_amount x0);

// Builds an account's income catalog from executed receipts (its client
// watched the chain). Amounts and costs go in as cache hints only.
income_catalog build_income_catalog(const account_id& x, const ledger& l,
                                    const inverted_index& idx,
                                    const std::vector<execution_receipt>& receipts,
                                    bool with_cost_hints = true);

enum class pay_decision : uint8_t {
    accepted = 0,
    rejected_insufficient = 1,
    unknown_income_tx = 2,
};

const char* to_string(pay_decision d);

// The payee-side check of a sealed payment: confirm the offered incomes,
// charge the sender's whole sending history against them, and accept only
// if the floor still covers the payment's value and fee reservation. Never
// executes the payment itself and never looks at hostile state.
struct pay_outcome {
    pay_decision decision = pay_decision::rejected_insufficient;
    balance_bound bound;
    token_amount required;  // the payment's value + fee reservation
    cost_report cost;
    gas_amount income_gas = 0;
};

pay_outcome pay_verify(const tx_locator& payment, const std::vector<hash32>& theta_ids,
                       const ledger& l, const inverted_index& idx);

// Builds the signed claim transaction binding an oath contract's stake to
// a recorded answer.
transaction make_oath_claim(const account_id& accountant, const hash32& secret,
                            uint64_t nonce, const account_id& oath_contract,
                            const oath_claim_payload& claim, gas_amount gas_limit,
                            token_amount gas_price);

enum class audit_kind : uint8_t {
    honest = 0,       // record matches the chain, stake untouched
    slashed = 1,      // record was false, the penalty burned
    underfunded = 2,  // record was false but the stake cannot cover the
                      // penalty; nothing moved, flagged instead
    invalid = 3,      // claim malformed or not checkable at its position
};

const char* to_string(audit_kind k);

struct audit_outcome {
    audit_kind kind = audit_kind::invalid;
    token_amount penalty;  // what actually moved to the burn address
    cost_report cost;
};

audit_outcome audit_oath(const tx_locator& claim, const ledger& l, const inverted_index& idx);

// Answers "does x hold at least this much" as cheaply as the chain allows:
// the zero-cost ledger first, then an income-backed floor, then the full
// dependency closure. The first two never execute anything beyond the
// income supports, so their cost is immune to unrelated chain volume.
struct maq_outcome {
    bool answer = false;
    std::string path;  // "zero_cost" | "income_bound" | "closure"
    cost_report cost;
    balance_bound bound;  // filled on the income_bound path
};

maq_outcome maq_answer(const query& q, const std::vector<hash32>& theta_hints,
                       const ledger& l, const inverted_index& idx);

}  // namespace anh
