// Command-line front end: run scenario files, ask one-off queries against
// the chain a scenario builds, verify payments, replay canned attack floods
// and audit oath claims. Everything prints JSON on stdout; diagnostics go
// to stderr (set ANH_LOG=1 for more).

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "anh/scenario.hpp"

using namespace anh;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

run_outcome load_and_run(const std::string& file, std::optional<uint64_t> seed,
                         bool oracle, const std::string& gas_file,
                         const std::string& save_dir) {
    scenario sc = scenario::load(file);
    run_options opt;
    opt.oracle_check = oracle;
    opt.seed_override = seed;
    if (!gas_file.empty()) opt.gas_table_file = gas_file;
    if (!save_dir.empty()) opt.save_chain_dir = save_dir;
    return run_scenario(sc, opt);
}

ordered_json cost_json(const cost_report& c) {
    ordered_json j;
    j["txs_executed"] = c.txs_executed;
    j["vm_steps"] = c.vm_steps;
    j["vm_gas"] = c.vm_gas;
    return j;
}

// The cheapest covering income set for `x`, offered as verification hints.
std::vector<hash32> pick_hints(const account_id& x, token_amount required,
                               const chain_bound& at, const ledger& led,
                               const inverted_index& idx) {
    eager_result view = eager_execute(led);
    income_catalog cat = build_income_catalog(x, led, idx, view.receipts);
    income_catalog within{x, {}};
    for (const income_record& e : cat.entries)
        if (at.admits(e.at)) within.entries.push_back(e);
    theta_selection sel =
        select_theta(within, required, idx.total_expenses(x, at), led.genesis_allocation(x));
    std::vector<hash32> ids;
    if (sel.feasible)
        for (const tx_locator& t : sel.picked) ids.push_back(t.tx_id);
    else
        for (const income_record& e : within.entries) ids.push_back(e.at.tx_id);
    return ids;
}

int cmd_run(const std::string& file, std::optional<uint64_t> seed, bool no_oracle,
            const std::string& gas_file, const std::string& save_dir,
            const std::string& report_file) {
    run_outcome out = load_and_run(file, seed, !no_oracle, gas_file, save_dir);
    std::string text = out.report.dump(2);
    if (!report_file.empty()) {
        std::ofstream rf(report_file);
        if (!rf) throw input_error("cannot write report file: " + report_file);
        rf << text << "\n";
    }
    std::cout << text << "\n";
    return out.exit_code;
}

int cmd_observe(const std::string& file, std::optional<uint64_t> seed,
                const std::string& query_text, std::optional<uint64_t> budget) {
    run_outcome out = load_and_run(file, seed, /*oracle=*/false, "", "");
    query q = resolve_query_json(json::parse(query_text), out.names, out.labels);
    ordered_json rep;
    rep["query"] = ordered_json(query_to_json(q));
    try {
        observe_outcome oo = observe(q, out.led, out.idx, budget);
        rep["result"] = oo.result.is_numeric ? ordered_json(oo.result.value)
                                             : ordered_json(oo.result.truth);
        rep["closure_txs"] = oo.closure.members.size();
        rep["closure_gas_ceiling"] = oo.closure.gas_limit_total;
        rep["cost"] = cost_json(oo.cost);
    } catch (const closure_exceeds_budget& e) {
        rep["refused"] = e.what();
    }
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int cmd_pay(const std::string& file, std::optional<uint64_t> seed,
            const std::string& payment, const std::vector<std::string>& theta) {
    run_outcome out = load_and_run(file, seed, /*oracle=*/false, "", "");
    hash32 id = resolve_tx_token(payment, out.labels);
    auto loc = out.idx.locate(id);
    if (!loc) throw input_error("payment is not on the chain: " + to_hex(id));

    std::vector<hash32> ids;
    if (theta.size() == 1 && theta[0] == "auto") {
        const transaction& tx = out.led.tx_at(*loc);
        ids = pick_hints(tx.sender, tx.expense(), chain_bound::before(*loc), out.led, out.idx);
    } else {
        for (const std::string& t : theta) ids.push_back(resolve_tx_token(t, out.labels));
    }

    pay_outcome po = pay_verify(*loc, ids, out.led, out.idx);
    ordered_json rep;
    rep["payment"] = to_hex(id);
    rep["decision"] = to_string(po.decision);
    rep["required"] = po.required.units;
    rep["floor"] = po.bound.signed_floor();
    rep["income_gas"] = po.income_gas;
    rep["cost"] = cost_json(po.cost);
    std::cout << rep.dump(2) << "\n";
    return po.decision == pay_decision::accepted ? 0 : 1;
}

int cmd_audit(const std::string& file, std::optional<uint64_t> seed,
              const std::string& claim) {
    run_outcome out = load_and_run(file, seed, /*oracle=*/false, "", "");
    hash32 id = resolve_tx_token(claim, out.labels);
    auto loc = out.idx.locate(id);
    if (!loc) throw input_error("claim is not on the chain: " + to_hex(id));
    audit_outcome ao = audit_oath(*loc, out.led, out.idx);
    ordered_json rep;
    rep["claim"] = to_hex(id);
    rep["kind"] = to_string(ao.kind);
    rep["penalty"] = ao.penalty.units;
    rep["cost"] = cost_json(ao.cost);
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int cmd_dump_index(const std::string& file, std::optional<uint64_t> seed,
                   const std::string& key_token) {
    run_outcome out = load_and_run(file, seed, /*oracle=*/false, "", "");
    ordered_json rep;
    if (key_token.empty()) {
        ordered_json keys = ordered_json::array();
        for (const auto& [key, postings] : out.idx.key_postings()) {
            ordered_json e;
            e["key"] = key.describe();
            e["writers"] = postings.size();
            keys.push_back(std::move(e));
        }
        rep["keys"] = std::move(keys);
    } else {
        state_key key = resolve_key_token(key_token, out.names);
        rep["key"] = key.describe();
        ordered_json postings = ordered_json::array();
        for (const tx_locator& at : out.idx.txs_touching(key, chain_bound::all())) {
            ordered_json e;
            e["height"] = at.height;
            e["offset"] = at.offset;
            e["id"] = to_hex(at.tx_id);
            postings.push_back(std::move(e));
        }
        rep["writers"] = std::move(postings);
    }
    std::cout << rep.dump(2) << "\n";
    return 0;
}

// A self-contained flood demo: a funded attacker, a small-balance victim
// with a little legitimate income, one attack block, then the victim's own
// view of their balance measured both ways.
int cmd_attack(const std::string& type, uint64_t count, uint64_t burn, uint64_t bait,
               uint64_t probe, uint64_t seed) {
    auto secret_of = [&](const std::string& who) {
        byte_writer w;
        w.u64(seed);
        w.str(who);
        return sha256({as_bytes("anh.attack"), std::span<const uint8_t>(w.out)});
    };
    hash32 attacker_secret = secret_of("attacker");
    hash32 whale_secret = secret_of("whale");
    account_id attacker = user_account_from_secret(attacker_secret);
    account_id whale = user_account_from_secret(whale_secret);
    account_id victim = user_account_from_secret(secret_of("victim"));

    ledger led = ledger::make_genesis(std::map<account_id, token_amount>{
        {attacker, tokens(1'000'000'000'000)},
        {whale, tokens(1'000'000'000)},
        {victim, tokens(1000)},
    });
    led.keys.register_secret(attacker_secret);
    led.keys.register_secret(whale_secret);

    // legitimate history the victim can later prove income from
    auto legit = [&](uint64_t nonce, uint64_t value) {
        tx_builder b;
        return b.kind(tx_kind::transfer)
            .sender(whale)
            .nonce(nonce)
            .recipient(victim)
            .value(tokens(value))
            .gas_limit(led.gas.intrinsic_of(tx_kind::transfer))
            .gas_price(tokens(1))
            .sign(whale_secret);
    };
    led.seal_block({legit(0, 500), legit(1, 300)});

    std::vector<transaction> cands;
    if (type == "tx_dos") {
        cands = gen_tx_dos(count, seed ^ 0x7a, led.keys, led.gas);
    } else if (type == "exec_dos") {
        contract_attack ca = gen_exec_dos(attacker, attacker_secret, 0, count, burn,
                                          tokens(1), led.gas);
        cands.push_back(ca.deploy);
        cands.insert(cands.end(), ca.calls.begin(), ca.calls.end());
    } else if (type == "targeted") {
        contract_attack ca = gen_targeted(attacker, attacker_secret, 0, count, burn, victim,
                                          tokens(bait), tokens(1), led.gas);
        cands.push_back(ca.deploy);
        cands.insert(cands.end(), ca.calls.begin(), ca.calls.end());
    } else {
        throw input_error("unknown attack type: " + type);
    }

    uint64_t steps_before = global_vm_steps();
    auto [blk, rejected] = led.seal_filtered(cands);
    uint64_t consensus_steps = global_vm_steps() - steps_before;
    inverted_index idx = inverted_index::build(led);

    attack_metrics m;
    m.attack = type;
    m.count = count;
    m.admission_rejects = rejected.size();
    m.vm_steps_during_consensus = consensus_steps;

    chain_bound at = chain_bound::through_block(blk.height);
    query q = query::balance_at_least(victim, tokens(probe), at);
    maq_outcome mo = maq_answer(q, pick_hints(victim, tokens(probe), at, led, idx), led, idx);
    m.victim_maq_gas = mo.cost.vm_gas;
    observe_outcome oo = observe(query::exact_balance(victim, at), led, idx);
    m.victim_exact_balance_gas = oo.cost.vm_gas;

    ordered_json rep;
    rep["attack"] = m.attack;
    rep["count"] = m.count;
    rep["admission_rejects"] = m.admission_rejects;
    rep["vm_steps_during_consensus"] = m.vm_steps_during_consensus;
    rep["victim_maq_gas"] = m.victim_maq_gas;
    rep["victim_exact_balance_gas"] = m.victim_exact_balance_gas;
    rep["victim_maq_answer"] = mo.answer;
    rep["victim_maq_path"] = mo.path;
    rep["victim_exact_balance"] = oo.result.value;
    std::cout << rep.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blockless-chain simulator: blocks order transactions without executing "
                 "them; whoever wants executed state pays to derive it"};
    app.require_subcommand(1);

    std::string file, gas_file, save_dir, report_file, query_text, payment, claim, key_token;
    std::vector<std::string> theta{"auto"};
    std::optional<uint64_t> seed, budget;
    bool no_oracle = false;
    std::string attack_type = "targeted";
    uint64_t count = 100, burn = 5000, bait = 1, probe = 600, attack_seed = 1;

    auto add_scenario = [&](CLI::App* cmd) {
        cmd->add_option("-s,--scenario", file, "scenario JSON file")->required();
        cmd->add_option("--seed", seed, "override the scenario seed");
    };

    CLI::App* run = app.add_subcommand("run", "run a scenario and print its report");
    add_scenario(run);
    run->add_flag("--no-oracle", no_oracle, "skip the eager reference re-execution");
    run->add_option("--gas-table", gas_file, "gas table JSON overriding the defaults");
    run->add_option("--save-chain", save_dir, "write the sealed chain to this directory");
    run->add_option("-o,--report", report_file, "also write the report to this file");

    CLI::App* obs = app.add_subcommand("observe", "answer one query against the chain");
    add_scenario(obs);
    obs->add_option("-q,--query", query_text, "query JSON (names allowed)")->required();
    obs->add_option("--budget", budget, "refuse closures above this gas ceiling");

    CLI::App* pay = app.add_subcommand("pay", "verify a sealed payment as the payee");
    add_scenario(pay);
    pay->add_option("-p,--payment", payment, "payment: label:<l> or tx id hex")->required();
    pay->add_option("-t,--theta", theta, "income transactions to prove, or \"auto\"");

    CLI::App* audit = app.add_subcommand("audit-oath", "check a sealed oath claim");
    add_scenario(audit);
    audit->add_option("-c,--claim", claim, "claim: label:<l> or tx id hex")->required();

    CLI::App* dump = app.add_subcommand("dump-index", "show the write index");
    add_scenario(dump);
    dump->add_option("-k,--key", key_token, "one key (balance:A, nonce:A, storage:C:slot)");

    CLI::App* atk = app.add_subcommand("attack", "run a canned flood and measure it");
    atk->add_option("--type", attack_type, "tx_dos, exec_dos or targeted");
    atk->add_option("--count", count, "flood size");
    atk->add_option("--burn", burn, "gas burned per hostile call");
    atk->add_option("--bait", bait, "tokens pushed at the victim per call (targeted)");
    atk->add_option("--probe", probe, "threshold for the victim's floor query");
    atk->add_option("--seed", attack_seed, "attack derivation seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(file, seed, no_oracle, gas_file, save_dir, report_file);
        if (obs->parsed()) return cmd_observe(file, seed, query_text, budget);
        if (pay->parsed()) return cmd_pay(file, seed, payment, theta);
        if (audit->parsed()) return cmd_audit(file, seed, claim);
        if (dump->parsed()) return cmd_dump_index(file, seed, key_token);
        if (atk->parsed())
            return cmd_attack(attack_type, count, burn, bait, probe, attack_seed);
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
