#include "anh/executor.hpp"

#include <algorithm>

namespace anh {

const char* to_string(query::kind_t k) {
    switch (k) {
        case query::kind_t::exact_balance: return "exact_balance";
        case query::kind_t::balance_at_least: return "balance_at_least";
        case query::kind_t::transfer_succeeded: return "transfer_succeeded";
        case query::kind_t::storage_value: return "storage_value";
    }
    throw internal_error("unknown query kind");
}

std::string query::describe() const {
    switch (kind) {
        case kind_t::exact_balance:
            return "exact_balance(" + account.short_hex() + ", " + at.describe() + ")";
        case kind_t::balance_at_least:
            return "balance_at_least(" + account.short_hex() + ", " +
                   std::to_string(amount.units) + ", " + at.describe() + ")";
        case kind_t::transfer_succeeded:
            return "transfer_succeeded(" + to_hex(tx_ref).substr(0, 8) + ")";
        case kind_t::storage_value:
            return "storage_value(" + account.short_hex() + ", " + slot + ", " +
                   at.describe() + ")";
    }
    throw internal_error("unknown query kind");
}

std::string query_result::describe() const {
    if (is_numeric) return std::to_string(value);
    return truth ? "true" : "false";
}

nlohmann::json bound_to_json(const chain_bound& b) {
    if (!b.upper) return "all";
    return nlohmann::json{{"before", {b.upper->first, b.upper->second}}};
}

chain_bound bound_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "all") return chain_bound::all();
        throw input_error("bad chain bound: " + j.get<std::string>());
    }
    if (j.is_number_integer() && j.get<int64_t>() >= 0)
        return chain_bound::through_block(j.get<uint64_t>());
    if (j.is_object() && j.contains("before")) {
        auto arr = j.at("before");
        if (!arr.is_array() || arr.size() != 2) throw input_error("bad chain bound");
        return chain_bound{{{arr[0].get<uint64_t>(), arr[1].get<uint64_t>()}}};
    }
    if (j.is_object() && j.contains("through_block"))
        return chain_bound::through_block(j.at("through_block").get<uint64_t>());
    throw input_error("bad chain bound: " + j.dump());
}

nlohmann::json query_to_json(const query& q) {
    nlohmann::json j;
    j["kind"] = to_string(q.kind);
    switch (q.kind) {
        case query::kind_t::exact_balance:
            j["account"] = q.account.hex();
            j["at"] = bound_to_json(q.at);
            break;
        case query::kind_t::balance_at_least:
            j["account"] = q.account.hex();
            j["amount"] = q.amount.units;
            j["at"] = bound_to_json(q.at);
            break;
        case query::kind_t::transfer_succeeded: j["tx"] = to_hex(q.tx_ref); break;
        case query::kind_t::storage_value:
            j["account"] = q.account.hex();
            j["slot"] = q.slot;
            j["at"] = bound_to_json(q.at);
            break;
    }
    return j;
}

query query_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) throw input_error("query needs a kind");
    std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "exact_balance")
            return query::exact_balance({hash32_from_hex(j.at("account").get<std::string>())},
                                        bound_from_json(j.at("at")));
        if (kind == "balance_at_least")
            return query::balance_at_least(
                {hash32_from_hex(j.at("account").get<std::string>())},
                token_amount{j.at("amount").get<uint64_t>()}, bound_from_json(j.at("at")));
        if (kind == "transfer_succeeded")
            return query::transfer_succeeded(hash32_from_hex(j.at("tx").get<std::string>()));
        if (kind == "storage_value")
            return query::storage_value({hash32_from_hex(j.at("account").get<std::string>())},
                                        j.at("slot").get<std::string>(),
                                        bound_from_json(j.at("at")));
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("bad query JSON: ") + e.what());
    }
    throw input_error("unknown query kind: " + kind);
}

const execution_receipt* eager_result::receipt_of(const hash32& tx_id) const {
    auto it = by_id_.find(tx_id);
    return it == by_id_.end() ? nullptr : &receipts[it->second];
}

static bool covers_block(const chain_bound& b, uint64_t height) {
    return !b.upper || std::pair{height + 1, uint64_t{0}} <= *b.upper;
}

eager_result eager_execute(const ledger& l, const eager_options& opt) {
    eager_result out;
    exec_state st(world_state::at_genesis(l.genesis_allocations()));
    vm_meter meter;
    apply_context ctx{l.gas, &meter, eager_oath_resolver(l)};

    for (const block& b : l.blocks()) {
        for (uint64_t o = 0; o < b.txs.size(); o++) {
            if (!opt.upto.admits(b.height, o)) break;
            tx_locator at{b.height, o, b.txs[o].tx_id};
            execution_receipt r = apply_tx(st, b.txs[o], at, ctx);
            out.fee_pool += r.fee_charged;
            out.by_id_.emplace(r.tx_id, out.receipts.size());
            out.receipts.push_back(std::move(r));
        }
        if (opt.keep_block_states && covers_block(opt.upto, b.height))
            out.block_states.push_back(st.state());
        if (!covers_block(opt.upto, b.height)) break;
    }
    out.state = std::move(st).take_state();
    out.cost = {meter.txs, meter.steps, meter.gas};
    return out;
}

query_result answer_on_state(const query& q, const world_state& ws,
                             std::span<const execution_receipt> receipts) {
    switch (q.kind) {
        case query::kind_t::exact_balance:
            return query_result::number(ws.balance_of(q.account).units);
        case query::kind_t::balance_at_least:
            return query_result::boolean(ws.balance_of(q.account) >= q.amount);
        case query::kind_t::storage_value:
            return query_result::number(ws.storage_of(q.account, q.slot));
        case query::kind_t::transfer_succeeded:
            for (const execution_receipt& r : receipts)
                if (r.tx_id == q.tx_ref) return query_result::boolean(r.applied());
            return query_result::boolean(false);  // not sealed within this prefix
    }
    throw internal_error("unknown query kind");
}

void check_supply(const world_state& ws, token_amount fee_pool, const ledger& l) {
    token_amount total = fee_pool;
    for (auto& [account, balance] : ws.balances) total += balance;
    if (total != l.total_genesis_supply())
        throw internal_error("supply violated: balances + fees = " +
                             std::to_string(total.units) + ", genesis minted " +
                             std::to_string(l.total_genesis_supply().units));
}

provenance_closure dependency_closure(const state_key& key, const chain_bound& at,
                                      const ledger& l, const inverted_index& idx) {
    return dependency_closure_of({key}, at, l, idx);
}

provenance_closure dependency_closure_of(std::set<state_key> seed, const chain_bound& at,
                                         const ledger& l, const inverted_index& idx) {
    std::set<tx_locator> members;
    std::set<state_key> frontier = std::move(seed);
    std::vector<state_key> work(frontier.begin(), frontier.end());

    while (!work.empty()) {
        state_key key = std::move(work.back());
        work.pop_back();
        for (const tx_locator& loc : idx.txs_touching(key, at)) {
            if (!members.insert(loc).second) continue;
            const transaction& tx = l.tx_at(loc);
            for (const state_key& k : tx.effective_writes())
                if (frontier.insert(k).second) work.push_back(k);
        }
    }

    provenance_closure c;
    c.members.assign(members.begin(), members.end());
    c.frontier = std::move(frontier);
    for (const tx_locator& loc : c.members) c.gas_limit_total += l.tx_at(loc).gas_limit;
    return c;
}

// Partial state for a frontier: genesis balances for the tracked balance
// keys, zero everything else. Executing a dependency-closed member list on
// top of this reproduces exactly what an eager run would say about those
// keys, because every writer that could move them is in the list.
static world_state genesis_partial_state(const std::set<state_key>& frontier,
                                         const ledger& l) {
    world_state ws;
    for (const state_key& k : frontier) {
        if (k.which != state_key::tag::balance) continue;
        token_amount alloc = l.genesis_allocation(k.account);
        if (alloc.units > 0) ws.balances[k.account] = alloc;
    }
    return ws;
}

closure_run execute_closure(const provenance_closure& c, const ledger& l,
                            const inverted_index& idx, vm_meter& meter) {
    closure_run out;
    if (log_enabled())
        log_line("replaying closure: " + std::to_string(c.members.size()) +
                 " txs, gas ceiling " + std::to_string(c.gas_limit_total));
    exec_state st(genesis_partial_state(c.frontier, l), c.frontier);
    apply_context ctx{l.gas, &meter, lazy_oath_resolver(l, idx, meter)};
    for (const tx_locator& at : c.members) {
        const transaction& tx = l.tx_at(at);
        out.receipts.emplace(tx.tx_id, apply_tx(st, tx, at, ctx));
    }
    out.state = std::move(st).take_state();
    return out;
}

closure_exceeds_budget::closure_exceeds_budget(gas_amount c, gas_amount b)
    : std::runtime_error("closure gas ceiling " + std::to_string(c) +
                         " exceeds observer budget " + std::to_string(b)),
      ceiling(c),
      budget(b) {}

static observe_outcome observe_with_meter(const query& q, const ledger& l,
                                          const inverted_index& idx,
                                          std::optional<gas_amount> gas_budget,
                                          vm_meter& meter) {
    std::set<state_key> seed;
    chain_bound bound = q.at;
    std::optional<tx_locator> ref_loc;

    switch (q.kind) {
        case query::kind_t::exact_balance:
        case query::kind_t::balance_at_least:
            seed.insert(state_key::balance(q.account));
            break;
        case query::kind_t::storage_value:
            seed.insert(state_key::storage(q.account, q.slot));
            break;
        case query::kind_t::transfer_succeeded: {
            ref_loc = idx.locate(q.tx_ref);
            if (!ref_loc)
                throw input_error("transfer_succeeded references unsealed transaction " +
                                  to_hex(q.tx_ref));
            seed = l.tx_at(*ref_loc).effective_writes();
            bound = chain_bound::through(*ref_loc);
            break;
        }
    }

    observe_outcome out;
    out.closure = dependency_closure_of(std::move(seed), bound, l, idx);
    if (log_enabled())
        log_line("query needs " + std::to_string(out.closure.members.size()) +
                 " of " + std::to_string(l.tx_count()) + " sealed txs");
    if (gas_budget && out.closure.gas_limit_total > *gas_budget)
        throw closure_exceeds_budget(out.closure.gas_limit_total, *gas_budget);

    vm_meter before = meter;
    closure_run run = execute_closure(out.closure, l, idx, meter);
    out.cost = {meter.txs - before.txs, meter.steps - before.steps, meter.gas - before.gas};

    switch (q.kind) {
        case query::kind_t::exact_balance:
            out.result = query_result::number(run.state.balance_of(q.account).units);
            break;
        case query::kind_t::balance_at_least:
            out.result = query_result::boolean(run.state.balance_of(q.account) >= q.amount);
            break;
        case query::kind_t::storage_value:
            out.result = query_result::number(run.state.storage_of(q.account, q.slot));
            break;
        case query::kind_t::transfer_succeeded: {
            auto it = run.receipts.find(q.tx_ref);
            if (it == run.receipts.end())
                throw internal_error("closure lost its own seed transaction");
            out.result = query_result::boolean(it->second.applied());
            break;
        }
    }
    return out;
}

observe_outcome observe(const query& q, const ledger& l, const inverted_index& idx,
                        std::optional<gas_amount> gas_budget) {
    vm_meter meter;
    return observe_with_meter(q, l, idx, gas_budget, meter);
}

std::optional<oath_claim_payload> parse_oath_payload(const std::string& payload) {
    nlohmann::json j = nlohmann::json::parse(payload, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    if (!j.contains("query") || !j.contains("result") || !j.contains("penalty"))
        return std::nullopt;

    oath_claim_payload out;
    try {
        out.q = query_from_json(j.at("query"));
    } catch (const input_error&) {
        return std::nullopt;
    }
    const auto& r = j.at("result");
    if (r.is_boolean())
        out.recorded = query_result::boolean(r.get<bool>());
    else if (r.is_number_unsigned())
        out.recorded = query_result::number(r.get<uint64_t>());
    else
        return std::nullopt;
    if (!j.at("penalty").is_number_unsigned()) return std::nullopt;
    out.penalty = token_amount{j.at("penalty").get<uint64_t>()};
    return out;
}

std::string oath_payload_text(const oath_claim_payload& p) {
    nlohmann::ordered_json j;
    j["query"] = query_to_json(p.q);
    if (p.recorded.is_numeric)
        j["result"] = p.recorded.value;
    else
        j["result"] = p.recorded.truth;
    j["penalty"] = p.penalty.units;
    return j.dump();
}

// Shared oath-claim checking: parse, enforce that the claim only looks at
// the chain strictly before itself, then compare the recorded result with
// whatever `answer` computes.
static oath_verdict resolve_oath(
    const std::string& payload, const tx_locator& at,
    const std::function<std::optional<tx_locator>(const hash32&)>& locate,
    const std::function<query_result(const query&)>& answer) {
    auto parsed = parse_oath_payload(payload);
    if (!parsed) return {};

    if (parsed->q.kind == query::kind_t::transfer_succeeded) {
        auto loc = locate(parsed->q.tx_ref);
        if (!loc || !(*loc < at)) return {};
    } else {
        if (parsed->q.at.admits(at)) return {};
    }

    oath_verdict v;
    v.valid = true;
    v.truthful = answer(parsed->q) == parsed->recorded;
    v.penalty = parsed->penalty;
    return v;
}

static std::optional<tx_locator> find_tx_linear(const ledger& l, const hash32& id) {
    for (const block& b : l.blocks())
        for (uint64_t o = 0; o < b.txs.size(); o++)
            if (b.txs[o].tx_id == id) return tx_locator{b.height, o, id};
    return std::nullopt;
}

std::function<oath_verdict(const std::string&, const tx_locator&)> eager_oath_resolver(
    const ledger& l) {
    return [&l](const std::string& payload, const tx_locator& at) {
        return resolve_oath(
            payload, at, [&l](const hash32& id) { return find_tx_linear(l, id); },
            [&l](const query& q) {
                chain_bound bound = q.at;
                if (q.kind == query::kind_t::transfer_succeeded) {
                    auto loc = find_tx_linear(l, q.tx_ref);
                    if (!loc) throw internal_error("oath reference vanished");
                    bound = chain_bound::through(*loc);
                }
                eager_result res = eager_execute(l, {bound, false});
                return answer_on_state(q, res.state, res.receipts);
            });
    };
}

std::function<oath_verdict(const std::string&, const tx_locator&)> lazy_oath_resolver(
    const ledger& l, const inverted_index& idx, vm_meter& meter) {
    return [&l, &idx, &meter](const std::string& payload, const tx_locator& at) {
        return resolve_oath(
            payload, at, [&idx](const hash32& id) { return idx.locate(id); },
            [&l, &idx, &meter](const query& q) {
                return observe_with_meter(q, l, idx, std::nullopt, meter).result;
            });
    };
}

}  // namespace anh
