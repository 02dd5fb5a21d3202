#include "anh/accounting.hpp"

#include <algorithm>

namespace anh {

const char* to_string(income_case c) {
    switch (c) {
        case income_case::direct: return "direct";
        case income_case::residual: return "residual";
    }
    throw internal_error("unknown income_case");
}

const char* to_string(pay_decision d) {
    switch (d) {
        case pay_decision::accepted: return "accepted";
        case pay_decision::rejected_insufficient: return "rejected_insufficient";
        case pay_decision::unknown_income_tx: return "unknown_income_tx";
    }
    throw internal_error("unknown pay_decision");
}

const char* to_string(audit_kind k) {
    switch (k) {
        case audit_kind::honest: return "honest";
        case audit_kind::slashed: return "slashed";
        case audit_kind::underfunded: return "underfunded";
        case audit_kind::invalid: return "invalid";
    }
    throw internal_error("unknown audit_kind");
}

std::optional<income_record> classify_income(const execution_receipt& receipt,
                                             const transaction& tx, const account_id& x) {
    if (receipt.tx_id != tx.tx_id)
        throw internal_error("receipt does not belong to this transaction");
    int64_t d = receipt.delta_on(state_key::balance(x));

    if (tx.sender == x) {
        // Residual income: outlay was value + full reservation; whatever the
        // balance ended up above (outlay spent in full) came back. A failed
        // transfer returns everything but the charged fee, a refund returns
        // the unused reservation, and both count.
        int64_t outlay = static_cast<int64_t>(tx.expense().units);
        int64_t amount = outlay + d;
        if (amount < 0)
            throw internal_error("transaction took more than its declared outlay");
        if (amount == 0) return std::nullopt;
        return income_record{receipt.at, x, token_amount{static_cast<uint64_t>(amount)},
                             income_case::residual, 0};
    }

    if (d <= 0) return std::nullopt;
    return income_record{receipt.at, x, token_amount{static_cast<uint64_t>(d)},
                         income_case::direct, 0};
}

namespace {

// Builds the support set for a group of target transactions. Walks reads
// only: a member's sender balance always, plus code-bearing recipients and
// their declared storage. Keys that members merely write (third-party
// payout targets, the burn address) get tracked for the state guard but
// their history is never chased; income amounts come out of receipt
// deltas, which stay exact even when such a key's absolute value is
// unknowable from this plan.
struct support_planner {
    const ledger& l;
    const inverted_index& idx;

    std::map<tx_locator, bool> mode;  // member → needs the machine?
    std::set<state_key> tracked;
    std::map<state_key, std::pair<uint64_t, uint64_t>> expanded_to;

    bool settles_without_execution(const transaction& tx, const tx_locator& at) const {
        if (tx.executes_code()) return false;
        if (tx.kind == tx_kind::contract_create) {
            if (tx.recipient != contract_address(tx.sender, tx.nonce)) return false;
            if (!is_oath_create_payload(tx.payload)) {
                try {
                    contract_code::parse(tx.payload);
                } catch (const input_error&) {
                    return false;
                }
            }
        }
        return l.zero_cost_at(chain_bound::before(at)).of(tx.sender) >= tx.expense();
    }

    void include(const tx_locator& at) {
        if (mode.count(at)) return;
        const transaction& tx = l.tx_at(at);
        bool exec = !settles_without_execution(tx, at);
        mode.emplace(at, exec);
        for (const state_key& k : tx.effective_writes()) tracked.insert(k);
        if (!exec) return;

        expand(state_key::balance(tx.sender), at);
        if (tx.executes_code()) {
            expand(state_key::balance(tx.recipient), at);
            for (const state_key& k : tx.declared_writes)
                if (k.which == state_key::tag::storage) expand(k, at);
        }
    }

    void expand(const state_key& key, const tx_locator& reader) {
        std::pair<uint64_t, uint64_t> upto{reader.height, reader.offset};
        tracked.insert(key);
        auto it = expanded_to.find(key);
        if (it != expanded_to.end() && it->second >= upto) return;
        expanded_to[key] = upto;
        for (const tx_locator& w : idx.txs_touching(key, chain_bound::before(reader)))
            include(w);
    }
};

// Applies a provably-settled transfer or deployment without executing it:
// the zero-cost ledger already proved success, so the receipt is known in
// advance. Write-only keys may hold partial-state garbage; the sender
// debit saturates there, which is fine because any key whose absolute
// value matters was expanded and is exact.
execution_receipt apply_static(exec_state& st, const transaction& tx, const tx_locator& at,
                               const gas_table& gas) {
    if (st.mark() != 0) throw internal_error("apply_static needs a clean journal");

    execution_receipt r;
    r.tx_id = tx.tx_id;
    r.at = at;
    r.status = receipt_status::applied;
    r.gas_used = gas.intrinsic_of(tx.kind);
    r.fee_charged = scale(tx.gas_price, r.gas_used);
    r.refund = tx.fee_reservation() - r.fee_charged;

    token_amount spend = tx.value + r.fee_charged;
    token_amount bal = st.balance_of(tx.sender);
    st.set_balance(tx.sender, bal >= spend ? bal - spend : token_amount{0});
    st.set_nonce(tx.sender, st.nonce_of(tx.sender) + 1);
    st.set_balance(tx.recipient, st.balance_of(tx.recipient) + tx.value);
    if (tx.kind == tx_kind::contract_create) {
        contract_record rec;
        if (is_oath_create_payload(tx.payload))
            rec.oath = true;
        else
            rec.code_text = contract_code::parse(tx.payload).to_text();
        st.install_contract(tx.recipient, std::move(rec));
    }

    r.delta = st.delta_since(0);
    st.forget_journal();
    return r;
}

}  // namespace

income_support plan_support(const std::vector<tx_locator>& targets, const ledger& l,
                            const inverted_index& idx) {
    support_planner planner{l, idx, {}, {}, {}};
    for (const tx_locator& t : targets) planner.include(t);

    income_support s;
    for (auto& [at, exec] : planner.mode) {
        s.members.push_back({at, exec});
        if (exec) s.exec_gas_ceiling = add_checked(s.exec_gas_ceiling, l.tx_at(at).gas_limit);
    }
    s.tracked = std::move(planner.tracked);
    return s;
}

support_run run_support(const income_support& s, const ledger& l, const inverted_index& idx,
                        vm_meter& meter) {
    support_run out;

    world_state ws;
    for (const state_key& k : s.tracked) {
        if (k.which != state_key::tag::balance) continue;
        token_amount alloc = l.genesis_allocation(k.account);
        if (alloc.units > 0) ws.balances[k.account] = alloc;
    }
    exec_state st(std::move(ws), s.tracked);
    apply_context ctx{l.gas, &meter, lazy_oath_resolver(l, idx, meter)};

    vm_meter before = meter;
    for (const income_support::member& m : s.members) {
        const transaction& tx = l.tx_at(m.at);
        execution_receipt r = m.executed ? apply_tx(st, tx, m.at, ctx)
                                         : apply_static(st, tx, m.at, l.gas);
        if (m.executed && tx.executes_code())
            out.income_gas = add_checked(out.income_gas, r.gas_used);
        out.receipts.emplace(tx.tx_id, std::move(r));
    }
    out.cost = {meter.txs - before.txs, meter.steps - before.steps, meter.gas - before.gas};
    return out;
}

gas_amount income_cost(const tx_locator& income_tx, const ledger& l,
                       const inverted_index& idx) {
    income_support s = plan_support({income_tx}, l, idx);
    vm_meter meter;
    return run_support(s, l, idx, meter).income_gas;
}

verified_incomes verify_incomes(const account_id& x, const std::vector<tx_locator>& thetas,
                                const ledger& l, const inverted_index& idx, vm_meter& meter) {
    std::set<tx_locator> uniq(thetas.begin(), thetas.end());
    std::vector<tx_locator> targets(uniq.begin(), uniq.end());

    income_support s = plan_support(targets, l, idx);
    support_run run = run_support(s, l, idx, meter);

    verified_incomes out;
    out.cost = run.cost;
    out.income_gas = run.income_gas;
    for (const tx_locator& at : targets) {
        const transaction& tx = l.tx_at(at);
        auto rec = classify_income(run.receipts.at(tx.tx_id), tx, x);
        token_amount amount = rec ? rec->amount : token_amount{};
        out.by_tx[tx.tx_id] = amount;
        out.total += amount;
    }
    return out;
}

namespace {

std::vector<income_record> usable_entries(const income_catalog& cat) {
    std::vector<income_record> items;
    for (const income_record& e : cat.entries)
        if (e.amount.units > 0) items.push_back(e);
    std::sort(items.begin(), items.end(),
              [](const income_record& a, const income_record& b) { return a.at < b.at; });
    return items;
}

long long coverage_gap(token_amount required, token_amount q_expenses, token_amount x0) {
    return static_cast<long long>(required.units) + static_cast<long long>(q_expenses.units) -
           static_cast<long long>(x0.units);
}

theta_selection selection_from(const std::vector<income_record>& items, uint64_t mask) {
    theta_selection out;
    out.feasible = true;
    for (size_t i = 0; i < items.size(); i++) {
        if (!(mask >> i & 1)) continue;
        out.picked.push_back(items[i].at);
        out.est_cost = add_checked(out.est_cost, items[i].cost_hint);
        out.est_amount += items[i].amount;
    }
    return out;
}

bool denser(const income_record& a, const income_record& b) {
    // compare cost per token without dividing
    unsigned __int128 lhs =
        static_cast<unsigned __int128>(a.cost_hint) * b.amount.units;
    unsigned __int128 rhs =
        static_cast<unsigned __int128>(b.cost_hint) * a.amount.units;
    if (lhs != rhs) return lhs < rhs;
    return a.at < b.at;
}

}  // namespace

theta_selection select_theta_exact(const income_catalog& cat, token_amount required,
                                   token_amount q_expenses, token_amount x0) {
    std::vector<income_record> items = usable_entries(cat);
    long long gap = coverage_gap(required, q_expenses, x0);
    if (gap <= 0) return theta_selection{true, {}, 0, {}};
    if (items.size() > 30)
        throw internal_error("exact selection is limited to 30 usable entries");

    struct node {
        gas_amount cost;
        uint64_t amount;
        uint64_t mask;
    };
    std::vector<node> frontier{{0, 0, 0}};

    auto prune = [](std::vector<node> v) {
        std::sort(v.begin(), v.end(), [](const node& a, const node& b) {
            if (a.cost != b.cost) return a.cost < b.cost;
            if (a.amount != b.amount) return a.amount > b.amount;
            return a.mask < b.mask;  // earliest-entry sets win deterministically
        });
        std::vector<node> out;
        for (const node& n : v)
            if (out.empty() || n.amount > out.back().amount) out.push_back(n);
        return out;
    };

    for (size_t i = 0; i < items.size(); i++) {
        std::vector<node> next = frontier;
        for (const node& n : frontier)
            next.push_back({add_checked(n.cost, items[i].cost_hint),
                            add_checked(n.amount, items[i].amount.units),
                            n.mask | (uint64_t{1} << i)});
        frontier = prune(std::move(next));
    }

    for (const node& n : frontier) {
        if (n.amount >= static_cast<uint64_t>(gap))
            return selection_from(items, n.mask);
    }
    return theta_selection{};  // even everything together cannot cover it
}

theta_selection select_theta_greedy(const income_catalog& cat, token_amount required,
                                    token_amount q_expenses, token_amount x0) {
    std::vector<income_record> items = usable_entries(cat);
    long long gap = coverage_gap(required, q_expenses, x0);
    if (gap <= 0) return theta_selection{true, {}, 0, {}};
    uint64_t need = static_cast<uint64_t>(gap);

    std::sort(items.begin(), items.end(), denser);

    // For every density-order prefix that still falls short, the best way to
    // finish is one more entry that closes the remaining hole as cheaply as
    // possible. Scanning all prefix-plus-closer combinations kills the
    // classic greedy failure of overshooting with one expensive tail pick.
    bool found = false;
    gas_amount best_cost = 0;
    std::vector<size_t> best;

    auto offer = [&](std::vector<size_t> taken, gas_amount cost) {
        if (found && cost >= best_cost) return;
        found = true;
        best_cost = cost;
        best = std::move(taken);
    };

    std::vector<size_t> prefix;
    unsigned long long covered = 0;
    gas_amount spent = 0;
    for (size_t k = 0; k <= items.size(); k++) {
        if (covered >= need) {
            offer(prefix, spent);
            break;  // longer prefixes only cost more
        }
        uint64_t hole = need - covered;
        size_t closer = items.size();
        for (size_t j = k; j < items.size(); j++) {
            if (items[j].amount.units < hole) continue;
            if (closer == items.size() || items[j].cost_hint < items[closer].cost_hint)
                closer = j;
        }
        if (closer != items.size()) {
            std::vector<size_t> taken = prefix;
            taken.push_back(closer);
            offer(std::move(taken), add_checked(spent, items[closer].cost_hint));
        }
        if (k == items.size()) break;
        prefix.push_back(k);
        covered += items[k].amount.units;
        spent = add_checked(spent, items[k].cost_hint);
    }
    if (!found) return theta_selection{};

    // drop whatever later picks made redundant, sparsest-density first
    unsigned long long total = 0;
    for (size_t i : best) total += items[i].amount.units;
    for (auto it = best.rbegin(); it != best.rend();) {
        uint64_t a = items[*it].amount.units;
        if (total - a >= need) {
            total -= a;
            it = decltype(it)(best.erase(std::next(it).base()));
        } else {
            ++it;
        }
    }

    theta_selection out;
    out.feasible = true;
    std::vector<income_record> picked;
    for (size_t i : best) picked.push_back(items[i]);
    std::sort(picked.begin(), picked.end(),
              [](const income_record& a, const income_record& b) { return a.at < b.at; });
    for (const income_record& e : picked) {
        out.picked.push_back(e.at);
        out.est_cost = add_checked(out.est_cost, e.cost_hint);
        out.est_amount += e.amount;
    }
    return out;
}

theta_selection select_theta(const income_catalog& cat, token_amount required,
                             token_amount q_expenses, token_amount x0) {
    size_t usable = 0;
    for (const income_record& e : cat.entries)
        if (e.amount.units > 0) usable++;
    if (usable <= 20) return select_theta_exact(cat, required, q_expenses, x0);
    return select_theta_greedy(cat, required, q_expenses, x0);
}

income_catalog build_income_catalog(const account_id& x, const ledger& l,
                                    const inverted_index& idx,
                                    const std::vector<execution_receipt>& receipts,
                                    bool with_cost_hints) {
    income_catalog cat{x, {}};
    for (const execution_receipt& r : receipts) {
        const transaction& tx = l.tx_at(r.at);
        if (auto rec = classify_income(r, tx, x)) {
            if (with_cost_hints) rec->cost_hint = income_cost(r.at, l, idx);
            cat.entries.push_back(*rec);
        }
    }
    return cat;
}

pay_outcome pay_verify(const tx_locator& payment, const std::vector<hash32>& theta_ids,
                       const ledger& l, const inverted_index& idx) {
    const transaction& pay_tx = l.tx_at(payment);
    const account_id& x = pay_tx.sender;

    pay_outcome out;
    out.required = pay_tx.expense();
    out.bound.x0 = l.genesis_allocation(x);
    // every earlier send at its worst, plus this payment's own reservation
    out.bound.q_expenses =
        idx.total_expenses(x, chain_bound::before(payment)) + pay_tx.fee_reservation();

    std::vector<tx_locator> thetas;
    for (const hash32& id : theta_ids) {
        auto loc = idx.locate(id);
        if (!loc) {
            out.decision = pay_decision::unknown_income_tx;
            return out;
        }
        if (*loc < payment) thetas.push_back(*loc);  // later income proves nothing here
    }

    vm_meter meter;
    verified_incomes vi = verify_incomes(x, thetas, l, idx, meter);
    out.bound.p_theta = vi.total;
    out.cost = vi.cost;
    out.income_gas = vi.income_gas;

    bool covered =
        out.bound.signed_floor() >= static_cast<long long>(pay_tx.value.units);
    out.decision = covered ? pay_decision::accepted : pay_decision::rejected_insufficient;
    return out;
}

transaction make_oath_claim(const account_id& accountant, const hash32& secret,
                            uint64_t nonce, const account_id& oath_contract,
                            const oath_claim_payload& claim, gas_amount gas_limit,
                            token_amount gas_price) {
    return tx_builder{}
        .kind(tx_kind::oath_call)
        .sender(accountant)
        .nonce(nonce)
        .recipient(oath_contract)
        .value(token_amount{0})
        .gas_limit(gas_limit)
        .gas_price(gas_price)
        .payload(oath_payload_text(claim))
        .declare(state_key::balance(blackhole_account()))
        .sign(secret);
}

audit_outcome audit_oath(const tx_locator& claim, const ledger& l,
                         const inverted_index& idx) {
    const transaction& tx = l.tx_at(claim);
    if (tx.kind != tx_kind::oath_call)
        throw input_error("transaction at " + claim.describe() + " is not an oath claim");

    vm_meter meter;
    provenance_closure c = dependency_closure_of(tx.effective_writes(),
                                                 chain_bound::through(claim), l, idx);
    closure_run run = execute_closure(c, l, idx, meter);
    const execution_receipt& r = run.receipts.at(tx.tx_id);

    audit_outcome out;
    out.cost = {meter.txs, meter.steps, meter.gas};
    if (r.applied()) {
        int64_t moved = r.delta_on(state_key::balance(blackhole_account()));
        out.kind = moved > 0 ? audit_kind::slashed : audit_kind::honest;
        if (moved > 0) out.penalty = token_amount{static_cast<uint64_t>(moved)};
    } else if (r.reason == rollback_reason::underfunded_slash) {
        out.kind = audit_kind::underfunded;
    } else {
        out.kind = audit_kind::invalid;
    }
    return out;
}

maq_outcome maq_answer(const query& q, const std::vector<hash32>& theta_hints,
                       const ledger& l, const inverted_index& idx) {
    if (q.kind != query::kind_t::balance_at_least)
        throw input_error("minimum-assumption answering handles balance_at_least only");

    maq_outcome out;

    // path 1: the admission-side floor already proves it, zero work
    if (l.zero_cost_at(q.at).of(q.account) >= q.amount) {
        out.answer = true;
        out.path = "zero_cost";
        return out;
    }

    // path 2: confirm offered incomes, charge the full sending history
    if (!theta_hints.empty()) {
        std::vector<tx_locator> thetas;
        for (const hash32& id : theta_hints) {
            auto loc = idx.locate(id);
            if (!loc) throw input_error("income hint not on chain: " + to_hex(id));
            if (q.at.admits(*loc)) thetas.push_back(*loc);
        }
        vm_meter meter;
        verified_incomes vi = verify_incomes(q.account, thetas, l, idx, meter);
        out.bound = {l.genesis_allocation(q.account), vi.total,
                     idx.total_expenses(q.account, q.at)};
        out.cost = vi.cost;
        if (out.bound.signed_floor() >= static_cast<long long>(q.amount.units)) {
            out.answer = true;
            out.path = "income_bound";
            return out;
        }
    }

    // path 3: exact answer through the dependency closure
    observe_outcome ob = observe(q, l, idx);
    out.answer = ob.result.truth;
    out.path = "closure";
    out.cost.txs_executed += ob.cost.txs_executed;
    out.cost.vm_steps += ob.cost.vm_steps;
    out.cost.vm_gas += ob.cost.vm_gas;
    return out;
}

}  // namespace anh
