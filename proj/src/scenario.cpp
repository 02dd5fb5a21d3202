#include "anh/scenario.hpp"

#include <fstream>

namespace anh {

using nlohmann::json;
using nlohmann::ordered_json;

scenario scenario::from_json(json j) {
    if (!j.is_object()) throw input_error("scenario must be a JSON object");
    scenario sc;
    sc.name = j.value("name", std::string{"unnamed"});
    sc.seed = j.value("seed", uint64_t{0});
    sc.raw = std::move(j);
    return sc;
}

scenario scenario::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw input_error("cannot open scenario file: " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw input_error("scenario " + file.string() + ": " + e.what());
    }
    return from_json(std::move(j));
}

account_id resolve_account_token(const std::string& tok,
                                 const std::map<std::string, account_id>& names) {
    if (tok == "blackhole") return blackhole_account();
    if (!tok.empty() && tok[0] == '@') return account_id{hash32_from_hex(tok.substr(1))};
    auto it = names.find(tok);
    if (it == names.end()) throw input_error("unknown account name: " + tok);
    return it->second;
}

hash32 resolve_tx_token(const std::string& tok,
                        const std::map<std::string, tx_locator>& labels) {
    if (tok.rfind("label:", 0) == 0) {
        auto it = labels.find(tok.substr(6));
        if (it == labels.end()) throw input_error("unknown transaction label: " + tok);
        return it->second.tx_id;
    }
    return hash32_from_hex(tok);
}

state_key resolve_key_token(const std::string& tok,
                            const std::map<std::string, account_id>& names) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t colon = tok.find(':', start);
        if (colon == std::string::npos) {
            parts.push_back(tok.substr(start));
            break;
        }
        parts.push_back(tok.substr(start, colon - start));
        start = colon + 1;
    }
    if (parts.size() == 2 && parts[0] == "balance")
        return state_key::balance(resolve_account_token(parts[1], names));
    if (parts.size() == 2 && parts[0] == "nonce")
        return state_key::nonce(resolve_account_token(parts[1], names));
    if (parts.size() == 3 && parts[0] == "storage")
        return state_key::storage(resolve_account_token(parts[1], names), parts[2]);
    throw input_error("bad state key token: " + tok +
                      " (want balance:A, nonce:A or storage:C:slot)");
}

query resolve_query_json(json q, const std::map<std::string, account_id>& names,
                         const std::map<std::string, tx_locator>& labels) {
    if (!q.is_object()) throw input_error("query must be a JSON object");
    if (q.contains("account") && q.at("account").is_string())
        q["account"] = resolve_account_token(q.at("account").get<std::string>(), names).hex();
    if (q.contains("tx") && q.at("tx").is_string())
        q["tx"] = to_hex(resolve_tx_token(q.at("tx").get<std::string>(), labels));
    std::string kind = q.value("kind", std::string{});
    if (kind != "transfer_succeeded" && !q.contains("at")) q["at"] = "all";
    return query_from_json(q);
}

namespace {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

ordered_json cost_json(const cost_report& c) {
    ordered_json j;
    j["txs_executed"] = c.txs_executed;
    j["vm_steps"] = c.vm_steps;
    j["vm_gas"] = c.vm_gas;
    return j;
}

ordered_json result_json(const query_result& r) {
    return r.is_numeric ? ordered_json(r.value) : ordered_json(r.truth);
}

ordered_json bound_json(const balance_bound& b) {
    ordered_json j;
    j["genesis"] = b.x0.units;
    j["proven_income"] = b.p_theta.units;
    j["worst_case_expenses"] = b.q_expenses.units;
    j["floor"] = b.signed_floor();
    return j;
}

// One attack flood expanded into the current block's candidate list, plus
// what to measure once the block seals.
struct attack_span {
    std::string type;
    std::string label;
    uint64_t count = 0;
    size_t first = 0;  // candidate index range [first, last)
    size_t last = 0;
    std::optional<account_id> victim;
    std::optional<token_amount> probe_amount;
};

struct scenario_runner {
    const scenario& sc;
    const run_options& opt;
    uint64_t seed;

    ledger led;
    inverted_index idx;
    std::map<std::string, account_id> names;
    std::map<std::string, tx_locator> labels;
    std::map<account_id, uint64_t> planned_nonce;

    std::vector<std::string> violations;
    std::vector<std::string> diffs;

    // results the oracle pass re-checks
    std::vector<std::pair<query, query_result>> answered;
    std::vector<std::pair<tx_locator, pay_outcome>> pay_results;
    std::vector<std::pair<query, maq_outcome>> maq_results;

    ordered_json blocks_rep = ordered_json::array();
    ordered_json attacks_rep = ordered_json::array();
    ordered_json queries_rep = ordered_json::array();
    ordered_json income_costs_rep = ordered_json::array();
    ordered_json pays_rep = ordered_json::array();
    ordered_json audits_rep = ordered_json::array();
    ordered_json maqs_rep = ordered_json::array();
    ordered_json oracle_rep = ordered_json::object();

    scenario_runner(const scenario& s, const run_options& o)
        : sc(s), opt(o), seed(o.seed_override.value_or(s.seed)), led(build_genesis(s, o)) {
        names["blackhole"] = blackhole_account();
        json gen = sc.raw.value("genesis", json::object());
        for (const auto& [token, ignored] : gen.items()) resolve_account(token);
        idx = inverted_index::build(led);
    }

    hash32 secret_for(const std::string& name) const {
        byte_writer w;
        w.u64(seed);
        w.str(sc.name);
        w.str(name);
        return sha256({as_bytes("anh.secret"), std::span<const uint8_t>(w.out)});
    }

    // Account tokens in operations auto-register fresh user keys; queries
    // and verification phases use the strict resolver instead.
    account_id resolve_account(const std::string& tok) {
        if (tok == "blackhole") return blackhole_account();
        if (!tok.empty() && tok[0] == '@') return account_id{hash32_from_hex(tok.substr(1))};
        auto it = names.find(tok);
        if (it != names.end()) return it->second;
        account_id a = led.keys.register_secret(secret_for(tok));
        names.emplace(tok, a);
        return a;
    }

    const hash32& signing_secret(const account_id& a, const std::string& tok) const {
        const hash32* s = led.keys.find(a);
        if (!s) throw input_error("no signing key for account: " + tok);
        return *s;
    }

    static ledger build_genesis(const scenario& s, const run_options& o) {
        gas_table gt =
            o.gas_table_file ? gas_table::load(*o.gas_table_file) : gas_table::defaults();
        json gen = s.raw.value("genesis", json::object());
        if (gen.empty()) throw input_error("scenario needs a non-empty genesis section");
        uint64_t sd = o.seed_override.value_or(s.seed);
        std::map<account_id, token_amount> allocs;
        for (const auto& [token, units] : gen.items()) {
            account_id a;
            if (!token.empty() && token[0] == '@') {
                a = account_id{hash32_from_hex(token.substr(1))};
            } else {
                byte_writer w;
                w.u64(sd);
                w.str(s.name);
                w.str(token);
                a = user_account_from_secret(
                    sha256({as_bytes("anh.secret"), std::span<const uint8_t>(w.out)}));
            }
            if (!units.is_number_unsigned())
                throw input_error("genesis allocation for " + token +
                                  " must be an unsigned amount");
            if (!allocs.emplace(a, token_amount{units.get<uint64_t>()}).second)
                throw input_error("duplicate genesis account: " + token);
        }
        return ledger::make_genesis(std::move(allocs), std::move(gt));
    }

    run_outcome run() {
        try {
            run_blocks();
        } catch (const internal_error& e) {
            violations.push_back(std::string{"block phase: "} + e.what());
        }
        run_queries();
        run_income_costs();
        run_pays();
        run_audits();
        run_maqs();
        if (opt.oracle_check) run_oracle();
        if (opt.save_chain_dir) led.save(*opt.save_chain_dir);
        return assemble();
    }

    // ---- block phase ---------------------------------------------------

    void run_blocks() {
        json blocks = sc.raw.value("blocks", json::array());
        if (!blocks.is_array()) throw input_error("blocks must be an array of arrays");
        for (size_t bi = 0; bi < blocks.size(); bi++) {
            const json& ops = blocks[bi];
            if (!ops.is_array())
                throw input_error("block " + std::to_string(bi) + " must be an array");
            seal_one_block(bi, ops);
        }
    }

    void seal_one_block(size_t bi, const json& ops) {
        std::vector<transaction> cands;
        std::vector<bool> expect_admit;
        std::vector<std::string> cand_labels;  // empty string = unlabeled
        std::vector<attack_span> spans;

        auto push = [&](transaction tx, bool admit, std::string label) {
            cands.push_back(std::move(tx));
            expect_admit.push_back(admit);
            cand_labels.push_back(std::move(label));
        };

        for (size_t oi = 0; oi < ops.size(); oi++) {
            const json& op = ops[oi];
            std::string what = op.value("op", std::string{});
            if (what == "transfer")
                build_transfer(op, push);
            else if (what == "create")
                build_create(op, push);
            else if (what == "call")
                build_call(op, push);
            else if (what == "oath_claim")
                build_oath_claim(op, push);
            else if (what == "attack")
                build_attack(op, bi, oi, cands.size(), spans, push);
            else
                throw input_error("block " + std::to_string(bi) + " op " +
                                  std::to_string(oi) + ": unknown op \"" + what + "\"");
        }

        uint64_t steps_before = global_vm_steps();
        auto [blk, rejected] = led.seal_filtered(cands);
        uint64_t consensus_steps = global_vm_steps() - steps_before;
        if (consensus_steps != 0)
            violations.push_back("sealing block " + std::to_string(blk.height) + " ran " +
                                 std::to_string(consensus_steps) + " contract instructions");
        idx.index_block(blk);

        std::map<size_t, std::string> reject_reason;
        for (const rejected_tx& r : rejected)
            reject_reason.emplace(r.index, std::string{to_string(r.decision.reason)});

        std::map<hash32, uint64_t> offset_of;
        for (uint64_t o = 0; o < blk.txs.size(); o++) offset_of.emplace(blk.txs[o].tx_id, o);

        ordered_json labels_rep = ordered_json::object();
        std::map<std::string, uint64_t> reason_hist;
        for (size_t i = 0; i < cands.size(); i++) {
            bool admitted = !reject_reason.count(i);
            if (admitted != expect_admit[i])
                violations.push_back(
                    "block " + std::to_string(blk.height) + " candidate " + std::to_string(i) +
                    (admitted ? " was admitted but expected rejected"
                              : " was rejected (" + reject_reason[i] + ") but expected admitted"));
            if (!admitted) reason_hist[reject_reason[i]]++;
            if (!cand_labels[i].empty() && admitted) {
                tx_locator loc = led.locator_at(blk.height, offset_of.at(cands[i].tx_id));
                labels.emplace(cand_labels[i], loc);
                ordered_json e;
                e["offset"] = loc.offset;
                e["id"] = to_hex(loc.tx_id);
                labels_rep[cand_labels[i]] = std::move(e);
            }
        }

        ordered_json brep;
        brep["height"] = blk.height;
        brep["hash"] = to_hex(blk.block_hash);
        brep["sealed"] = blk.txs.size();
        brep["rejected"] = rejected.size();
        ordered_json hist = ordered_json::object();
        for (const auto& [reason, n] : reason_hist) hist[reason] = n;
        brep["rejected_reasons"] = std::move(hist);
        brep["labels"] = std::move(labels_rep);
        blocks_rep.push_back(std::move(brep));

        for (const attack_span& sp : spans)
            measure_attack(sp, blk.height, reject_reason, consensus_steps);
    }

    // ---- operation builders ---------------------------------------------

    struct op_common {
        std::string label;
        uint64_t gas_price = 1;
        std::optional<uint64_t> gas_limit;
        int64_t nonce_offset = 0;
        bool forge = false;
        bool expect_admit = true;
        std::vector<state_key> declared;
    };

    op_common common_of(const json& op) {
        op_common c;
        c.label = op.value("label", std::string{});
        c.gas_price = op.value("gas_price", uint64_t{1});
        if (op.contains("gas_limit")) c.gas_limit = op.at("gas_limit").get<uint64_t>();
        c.nonce_offset = op.value("nonce_offset", int64_t{0});
        c.forge = op.value("forge_signature", false);
        std::string expect = op.value("expect", std::string{"admitted"});
        if (expect == "rejected")
            c.expect_admit = false;
        else if (expect != "admitted")
            throw input_error("expect must be \"admitted\" or \"rejected\", got " + expect);
        for (const json& d : op.value("declare", json::array()))
            c.declared.push_back(resolve_key_token(d.get<std::string>(), names));
        return c;
    }

    uint64_t next_nonce(const account_id& from, const op_common& c) {
        uint64_t base = planned_nonce[from];
        return static_cast<uint64_t>(static_cast<int64_t>(base) + c.nonce_offset);
    }

    void forge_signature(transaction& tx) {
        tx.signature[0] ^= 0x5a;
        tx.tx_id = tx_id_of(tx.body_bytes(), tx.signature);
    }

    template <typename Push>
    void finish(tx_builder& b, const account_id& from, const std::string& from_tok,
                const op_common& c, Push&& push) {
        for (const state_key& k : c.declared) b.declare(k);
        transaction tx = b.sign(signing_secret(from, from_tok));
        if (c.forge) forge_signature(tx);
        if (c.expect_admit) planned_nonce[from]++;
        push(std::move(tx), c.expect_admit, c.label);
    }

    template <typename Push>
    void build_transfer(const json& op, Push&& push) {
        op_common c = common_of(op);
        std::string from_tok = op.at("from").get<std::string>();
        account_id from = resolve_account(from_tok);
        account_id to = resolve_account(op.at("to").get<std::string>());
        tx_builder b;
        b.kind(tx_kind::transfer)
            .sender(from)
            .nonce(next_nonce(from, c))
            .recipient(to)
            .value(token_amount{op.at("value").get<uint64_t>()})
            .gas_limit(c.gas_limit.value_or(led.gas.intrinsic_of(tx_kind::transfer)))
            .gas_price(token_amount{c.gas_price});
        finish(b, from, from_tok, c, push);
    }

    std::string code_text_of(const json& op) {
        if (op.value("oath", false)) return "#oath";
        std::string text;
        if (op.contains("code_text")) {
            text = op.at("code_text").get<std::string>();
        } else if (op.contains("code") && op.at("code").is_array()) {
            for (const json& line : op.at("code")) text += line.get<std::string>() + "\n";
        } else {
            throw input_error("create needs \"code\" lines, \"code_text\" or \"oath\": true");
        }
        text = resolve_code_names(text, names);
        contract_code::parse(text);  // surface assembly typos at build time
        return text;
    }

    template <typename Push>
    void build_create(const json& op, Push&& push) {
        op_common c = common_of(op);
        std::string from_tok = op.at("from").get<std::string>();
        account_id from = resolve_account(from_tok);
        uint64_t nonce = next_nonce(from, c);
        std::string cname = op.at("contract").get<std::string>();
        account_id target = contract_address(from, nonce);
        names[cname] = target;
        tx_builder b;
        b.kind(tx_kind::contract_create)
            .sender(from)
            .nonce(nonce)
            .recipient(target)
            .value(token_amount{op.value("value", uint64_t{0})})
            .gas_limit(c.gas_limit.value_or(led.gas.intrinsic_of(tx_kind::contract_create)))
            .gas_price(token_amount{c.gas_price})
            .payload(code_text_of(op));
        finish(b, from, from_tok, c, push);
    }

    std::string call_payload(const json& op) {
        json args = op.value("args", json::array());
        if (!args.is_array()) throw input_error("call args must be an array");
        if (args.empty()) return "";
        json resolved = json::array();
        for (const json& a : args) {
            if (a.is_string()) {
                std::string s = a.get<std::string>();
                if (!s.empty() && s[0] == '@')
                    s = "@" + resolve_account(s.substr(1)).hex();
                resolved.push_back(s);
            } else {
                resolved.push_back(a);
            }
        }
        return resolved.dump();
    }

    template <typename Push>
    void build_call(const json& op, Push&& push) {
        op_common c = common_of(op);
        std::string from_tok = op.at("from").get<std::string>();
        account_id from = resolve_account(from_tok);
        account_id target = resolve_account_token(op.at("contract").get<std::string>(), names);
        tx_builder b;
        b.kind(tx_kind::contract_call)
            .sender(from)
            .nonce(next_nonce(from, c))
            .recipient(target)
            .value(token_amount{op.value("value", uint64_t{0})})
            .gas_limit(
                c.gas_limit.value_or(led.gas.intrinsic_of(tx_kind::contract_call) + 10000))
            .gas_price(token_amount{c.gas_price})
            .payload(call_payload(op));
        finish(b, from, from_tok, c, push);
    }

    template <typename Push>
    void build_oath_claim(const json& op, Push&& push) {
        op_common c = common_of(op);
        std::string from_tok = op.at("from").get<std::string>();
        account_id from = resolve_account(from_tok);
        account_id target = resolve_account_token(op.at("contract").get<std::string>(), names);
        oath_claim_payload claim;
        claim.q = resolve_query_json(op.at("query"), names, labels);
        const json& r = op.at("result");
        claim.recorded = r.is_boolean() ? query_result::boolean(r.get<bool>())
                                        : query_result::number(r.get<uint64_t>());
        claim.penalty = token_amount{op.at("penalty").get<uint64_t>()};
        transaction tx = make_oath_claim(
            from, signing_secret(from, from_tok), next_nonce(from, c), target, claim,
            c.gas_limit.value_or(led.gas.intrinsic_of(tx_kind::oath_call)),
            token_amount{c.gas_price});
        if (c.forge) forge_signature(tx);
        if (c.expect_admit) planned_nonce[from]++;
        push(std::move(tx), c.expect_admit, c.label);
    }

    template <typename Push>
    void build_attack(const json& op, size_t bi, size_t oi, size_t first_index,
                      std::vector<attack_span>& spans, Push&& push) {
        attack_span sp;
        sp.type = op.at("attack").get<std::string>();
        sp.label = op.value("label", sp.type);
        sp.count = op.at("count").get<uint64_t>();
        sp.first = first_index;
        if (op.contains("probe_amount"))
            sp.probe_amount = token_amount{op.at("probe_amount").get<uint64_t>()};

        if (sp.type == "tx_dos") {
            uint64_t sub = mix64(seed ^ (uint64_t(bi) << 20) ^ oi);
            for (transaction& tx : gen_tx_dos(sp.count, sub, led.keys, led.gas))
                push(std::move(tx), /*admit=*/false, "");
            sp.last = first_index + sp.count;
        } else if (sp.type == "exec_dos" || sp.type == "targeted") {
            std::string from_tok = op.at("from").get<std::string>();
            account_id funder = resolve_account(from_tok);
            const hash32& secret = signing_secret(funder, from_tok);
            uint64_t base = planned_nonce[funder];
            gas_amount burn = op.value("burn", uint64_t{5000});
            token_amount price{op.value("gas_price", uint64_t{1})};
            contract_attack ca;
            if (sp.type == "exec_dos") {
                ca = gen_exec_dos(funder, secret, base, sp.count, burn, price, led.gas);
            } else {
                sp.victim = resolve_account(op.at("victim").get<std::string>());
                token_amount bait{op.value("bait", uint64_t{1})};
                ca = gen_targeted(funder, secret, base, sp.count, burn, *sp.victim, bait,
                                  price, led.gas);
            }
            planned_nonce[funder] += 1 + sp.count;
            if (op.contains("contract"))
                names[op.at("contract").get<std::string>()] = ca.contract;
            push(std::move(ca.deploy), true, sp.label + "_deploy");
            for (transaction& tx : ca.calls) push(std::move(tx), true, "");
            sp.last = first_index + 1 + sp.count;
        } else {
            throw input_error("unknown attack type: " + sp.type);
        }
        spans.push_back(std::move(sp));
    }

    void measure_attack(const attack_span& sp, uint64_t height,
                        const std::map<size_t, std::string>& reject_reason,
                        uint64_t consensus_steps) {
        attack_metrics m;
        m.attack = sp.type;
        m.count = sp.count;
        m.vm_steps_during_consensus = consensus_steps;
        for (const auto& [i, reason] : reject_reason)
            if (i >= sp.first && i < sp.last) m.admission_rejects++;

        if (sp.victim && sp.probe_amount) {
            chain_bound at = chain_bound::through_block(height);
            query q = query::balance_at_least(*sp.victim, *sp.probe_amount, at);
            maq_outcome mo = maq_answer(q, theta_hints(*sp.victim, *sp.probe_amount, at),
                                        led, idx);
            m.victim_maq_gas = mo.cost.vm_gas;
            observe_outcome oo = observe(query::exact_balance(*sp.victim, at), led, idx);
            m.victim_exact_balance_gas = oo.cost.vm_gas;
        }

        ordered_json a;
        a["label"] = sp.label;
        a["attack"] = m.attack;
        a["count"] = m.count;
        a["admission_rejects"] = m.admission_rejects;
        a["vm_steps_during_consensus"] = m.vm_steps_during_consensus;
        if (sp.victim && sp.probe_amount) {
            a["victim_maq_gas"] = m.victim_maq_gas;
            a["victim_exact_balance_gas"] = m.victim_exact_balance_gas;
        }
        attacks_rep.push_back(std::move(a));
    }

    // The cheapest income set whose floor covers `required`, offered as
    // hints. Falls back to the whole catalog when no subset suffices.
    std::vector<hash32> theta_hints(const account_id& x, token_amount required,
                                    const chain_bound& at) {
        eager_result client_view = eager_execute(led);
        income_catalog cat = build_income_catalog(x, led, idx, client_view.receipts);
        income_catalog within{x, {}};
        for (const income_record& e : cat.entries)
            if (at.admits(e.at)) within.entries.push_back(e);
        theta_selection sel =
            select_theta(within, required, idx.total_expenses(x, at), led.genesis_allocation(x));
        std::vector<hash32> ids;
        if (sel.feasible) {
            for (const tx_locator& t : sel.picked) ids.push_back(t.tx_id);
        } else {
            for (const income_record& e : within.entries) ids.push_back(e.at.tx_id);
        }
        return ids;
    }

    // ---- observer phases -------------------------------------------------

    void run_queries() {
        for (const json& entry : sc.raw.value("queries", json::array())) {
            ordered_json rep;
            rep["label"] = entry.value("label", std::string{});
            try {
                query q = resolve_query_json(entry.at("query"), names, labels);
                rep["query"] = ordered_json(query_to_json(q));
                std::optional<gas_amount> budget;
                if (entry.contains("budget")) budget = entry.at("budget").get<uint64_t>();
                observe_outcome oo = observe(q, led, idx, budget);
                rep["result"] = result_json(oo.result);
                rep["closure_txs"] = oo.closure.members.size();
                rep["closure_gas_ceiling"] = oo.closure.gas_limit_total;
                rep["cost"] = cost_json(oo.cost);
                answered.emplace_back(q, oo.result);
            } catch (const closure_exceeds_budget& e) {
                rep["refused"] = e.what();
            } catch (const internal_error& e) {
                violations.push_back(std::string{"query: "} + e.what());
                rep["error"] = e.what();
            }
            queries_rep.push_back(std::move(rep));
        }
    }

    void run_income_costs() {
        for (const json& entry : sc.raw.value("income_costs", json::array())) {
            ordered_json rep;
            rep["label"] = entry.value("label", std::string{});
            try {
                hash32 id = resolve_tx_token(entry.at("income").get<std::string>(), labels);
                auto loc = idx.locate(id);
                if (!loc) throw input_error("income is not on the chain: " + to_hex(id));
                rep["income"] = to_hex(id);
                rep["income_gas"] = income_cost(*loc, led, idx);
            } catch (const internal_error& e) {
                violations.push_back(std::string{"income cost: "} + e.what());
                rep["error"] = e.what();
            }
            income_costs_rep.push_back(std::move(rep));
        }
    }

    void run_pays() {
        for (const json& entry : sc.raw.value("pays", json::array())) {
            ordered_json rep;
            rep["label"] = entry.value("label", std::string{});
            try {
                hash32 id = resolve_tx_token(entry.at("payment").get<std::string>(), labels);
                auto loc = idx.locate(id);
                if (!loc) throw input_error("payment is not on the chain: " + to_hex(id));
                std::vector<hash32> theta = theta_refs(entry, *loc);
                pay_outcome po = pay_verify(*loc, theta, led, idx);
                rep["payment"] = to_hex(id);
                ordered_json tj = ordered_json::array();
                for (const hash32& t : theta) tj.push_back(to_hex(t));
                rep["theta"] = std::move(tj);
                rep["decision"] = to_string(po.decision);
                rep["required"] = po.required.units;
                rep["bound"] = bound_json(po.bound);
                rep["income_gas"] = po.income_gas;
                rep["cost"] = cost_json(po.cost);
                pay_results.emplace_back(*loc, po);
            } catch (const internal_error& e) {
                violations.push_back(std::string{"pay: "} + e.what());
                rep["error"] = e.what();
            }
            pays_rep.push_back(std::move(rep));
        }
    }

    // "theta": "auto" picks the cheapest covering set from the payer's own
    // catalog; an explicit array names transactions directly.
    std::vector<hash32> theta_refs(const json& entry, const tx_locator& payment) {
        json t = entry.value("theta", json{"auto"});
        if (t.is_string() && t.get<std::string>() == "auto") {
            const transaction& pay_tx = led.tx_at(payment);
            token_amount q = idx.total_expenses(pay_tx.sender, chain_bound::before(payment)) +
                             pay_tx.fee_reservation();
            eager_result client_view = eager_execute(led);
            income_catalog cat =
                build_income_catalog(pay_tx.sender, led, idx, client_view.receipts);
            income_catalog before{pay_tx.sender, {}};
            for (const income_record& e : cat.entries)
                if (e.at < payment) before.entries.push_back(e);
            theta_selection sel = select_theta(before, pay_tx.value, q,
                                               led.genesis_allocation(pay_tx.sender));
            std::vector<hash32> ids;
            if (sel.feasible) {
                for (const tx_locator& l : sel.picked) ids.push_back(l.tx_id);
            } else {
                for (const income_record& e : before.entries) ids.push_back(e.at.tx_id);
            }
            return ids;
        }
        if (!t.is_array()) throw input_error("theta must be \"auto\" or an array");
        std::vector<hash32> ids;
        for (const json& ref : t) ids.push_back(resolve_tx_token(ref.get<std::string>(), labels));
        return ids;
    }

    void run_audits() {
        for (const json& entry : sc.raw.value("audits", json::array())) {
            ordered_json rep;
            rep["label"] = entry.value("label", std::string{});
            try {
                hash32 id = resolve_tx_token(entry.at("claim").get<std::string>(), labels);
                auto loc = idx.locate(id);
                if (!loc) throw input_error("claim is not on the chain: " + to_hex(id));
                audit_outcome ao = audit_oath(*loc, led, idx);
                rep["claim"] = to_hex(id);
                rep["kind"] = to_string(ao.kind);
                rep["penalty"] = ao.penalty.units;
                rep["cost"] = cost_json(ao.cost);
            } catch (const internal_error& e) {
                violations.push_back(std::string{"audit: "} + e.what());
                rep["error"] = e.what();
            }
            audits_rep.push_back(std::move(rep));
        }
    }

    void run_maqs() {
        for (const json& entry : sc.raw.value("maqs", json::array())) {
            ordered_json rep;
            rep["label"] = entry.value("label", std::string{});
            try {
                account_id a =
                    resolve_account_token(entry.at("account").get<std::string>(), names);
                token_amount amount{entry.at("amount").get<uint64_t>()};
                chain_bound at = entry.contains("at") ? bound_from_json(entry.at("at"))
                                                      : chain_bound::all();
                query q = query::balance_at_least(a, amount, at);
                std::vector<hash32> hints;
                json t = entry.value("theta", json{"auto"});
                if (t.is_string() && t.get<std::string>() == "auto") {
                    hints = theta_hints(a, amount, at);
                } else if (t.is_array()) {
                    for (const json& ref : t)
                        hints.push_back(resolve_tx_token(ref.get<std::string>(), labels));
                }
                maq_outcome mo = maq_answer(q, hints, led, idx);
                rep["account"] = a.hex();
                rep["amount"] = amount.units;
                rep["at"] = ordered_json(bound_to_json(at));
                rep["answer"] = mo.answer;
                rep["path"] = mo.path;
                if (mo.path == "income_bound") rep["bound"] = bound_json(mo.bound);
                rep["cost"] = cost_json(mo.cost);
                maq_results.emplace_back(q, mo);
            } catch (const internal_error& e) {
                violations.push_back(std::string{"maq: "} + e.what());
                rep["error"] = e.what();
            }
            maqs_rep.push_back(std::move(rep));
        }
    }

    // ---- oracle pass -----------------------------------------------------

    void run_oracle() {
        oracle_rep["checked"] = true;
        try {
            eager_options eo;
            eo.keep_block_states = true;
            eager_result full = eager_execute(led, eo);
            check_supply(full.state, full.fee_pool, led);
            oracle_rep["supply_ok"] = true;

            // the zero-cost bound must never exceed the executed balance
            bool zc_sound = true;
            for (uint64_t h = 0; h < led.blocks().size(); h++) {
                zero_cost_ledger zcb = led.zero_cost_at(chain_bound::through_block(h));
                for (const auto& [a, floor] : zcb.floor) {
                    if (floor > full.block_states[h].balance_of(a)) {
                        zc_sound = false;
                        violations.push_back("zero-cost floor above balance for " +
                                             a.short_hex() + " at block " + std::to_string(h));
                    }
                }
            }
            oracle_rep["zero_cost_sound"] = zc_sound;

            for (const auto& [q, lazy] : answered) {
                eager_options qo;
                qo.upto = q.kind == query::kind_t::transfer_succeeded ? chain_bound::all()
                                                                      : q.at;
                eager_result er = eager_execute(led, qo);
                query_result ref = answer_on_state(q, er.state, er.receipts);
                if (!(ref == lazy))
                    diffs.push_back("query " + q.describe() + ": lazy " + lazy.describe() +
                                    " vs eager " + ref.describe());
            }

            for (const auto& [loc, po] : pay_results) {
                if (po.decision != pay_decision::accepted) continue;
                const execution_receipt* r = full.receipt_of(loc.tx_id);
                if (!r || !r->applied()) {
                    diffs.push_back("accepted payment at " + loc.describe() +
                                    " did not settle under eager execution");
                    continue;
                }
                eager_options before;
                before.upto = chain_bound::before(loc);
                eager_result er = eager_execute(led, before);
                uint64_t actual = er.state.balance_of(led.tx_at(loc).sender).units;
                if (po.bound.signed_floor() > static_cast<long long>(actual))
                    diffs.push_back("payment bound at " + loc.describe() + " claims floor " +
                                    std::to_string(po.bound.signed_floor()) +
                                    " above actual balance " + std::to_string(actual));
            }

            for (const auto& [q, mo] : maq_results) {
                eager_options qo;
                qo.upto = q.at;
                eager_result er = eager_execute(led, qo);
                bool actual = er.state.balance_of(q.account) >= q.amount;
                if (mo.answer && !actual)
                    diffs.push_back("affirmative floor answer for " + q.describe() +
                                    " is unsound (path " + mo.path + ")");
                if (mo.path == "closure" && mo.answer != actual)
                    diffs.push_back("closure answer for " + q.describe() + " wrong");
            }
        } catch (const internal_error& e) {
            violations.push_back(std::string{"oracle: "} + e.what());
        }
    }

    // ---- report ----------------------------------------------------------

    run_outcome assemble() {
        ordered_json rep;
        rep["scenario"] = sc.name;
        rep["seed"] = seed;
        rep["gas_table_digest"] = to_hex(led.gas.digest());
        ordered_json chain;
        chain["blocks"] = led.blocks().size();
        chain["transactions"] = led.tx_count();
        rep["chain"] = std::move(chain);

        ordered_json accounts = ordered_json::object();
        for (const auto& [name, a] : names) {
            ordered_json e;
            e["id"] = a.hex();
            e["kind"] = is_blackhole(a)               ? "blackhole"
                        : led.is_contract_address(a)  ? "contract"
                                                      : "user";
            e["genesis"] = led.genesis_allocation(a).units;
            e["zero_cost_floor"] = led.zero_cost().of(a).units;
            e["sent"] = led.sent_count_of(a);
            accounts[name] = std::move(e);
        }
        rep["accounts"] = std::move(accounts);
        rep["blocks"] = blocks_rep;
        rep["attacks"] = attacks_rep;
        rep["queries"] = queries_rep;
        rep["income_costs"] = income_costs_rep;
        rep["pays"] = pays_rep;
        rep["audits"] = audits_rep;
        rep["maqs"] = maqs_rep;
        if (!opt.oracle_check) oracle_rep["checked"] = false;
        ordered_json diff_rep = ordered_json::array();
        for (const std::string& d : diffs) diff_rep.push_back(d);
        oracle_rep["diffs"] = std::move(diff_rep);
        rep["oracle"] = oracle_rep;
        ordered_json viol = ordered_json::array();
        for (const std::string& v : violations) viol.push_back(v);
        rep["violations"] = std::move(viol);

        int ec = !violations.empty() ? 2 : (!diffs.empty() ? 1 : 0);
        rep["status"] = ec == 0 ? "ok" : (ec == 1 ? "oracle_mismatch" : "violation");
        return run_outcome{std::move(rep), ec,         std::move(led),
                           std::move(idx), std::move(names), std::move(labels)};
    }
};

}  // namespace

run_outcome run_scenario(const scenario& sc, const run_options& opt) {
    scenario_runner r(sc, opt);
    return r.run();
}

}  // namespace anh
