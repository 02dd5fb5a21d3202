#include "doctest.h"

#include <random>

#include "chain_fixtures.hpp"

using namespace anh;
using fixtures::testbed;

namespace {

// Deploys the standard payout contract: every call sends 25 to `payee`.
struct payout_rig {
    testbed bed;
    account_id contract;
    gas_amount call_gas = 0;

    static payout_rig make(std::vector<std::pair<std::string, uint64_t>> genesis,
                           const std::string& payee) {
        payout_rig r{testbed::with_genesis(std::move(genesis)), {}, 0};
        std::string code =
            "PUSH 25\nPUSH @" + r.bed.at(payee).id.hex() + "\nTRANSFER\nHALT\n";
        auto [deploy, addr] = r.bed.create("alice", code, 100000);
        r.contract = addr;
        r.bed.seal({deploy});
        const gas_table& gt = r.bed.led.gas;
        r.call_gas = gt.intrinsic_of(tx_kind::contract_call) + 1 + 1 +
                     gt.cost_of(opcode::transfer, 0) + 1;
        return r;
    }

    transaction pay_once(const std::string& payee) {
        transaction call = bed.call("alice", contract, "", 0, call_gas + 100,
                                    {state_key::balance(bed.at(payee).id)});
        bed.seal({call});
        return call;
    }
};

}  // namespace

TEST_CASE("income classification") {
    testbed bed = testbed::with_genesis({{"alice", 100000}, {"bob", 50000}});
    account_id alice = bed.at("alice").id;
    account_id bob = bed.at("bob").id;
    gas_amount xfer = bed.led.gas.intrinsic_of(tx_kind::transfer);

    transaction tight = bed.transfer("alice", bob, 2500);             // refund 0
    transaction loose = bed.transfer("alice", bob, 100, xfer + 700);  // refund 700
    bed.seal({tight, loose});

    eager_result er = eager_execute(bed.led);
    const execution_receipt& r_tight = *er.receipt_of(tight.tx_id);
    const execution_receipt& r_loose = *er.receipt_of(loose.tx_id);

    SUBCASE("a foreign positive delta is direct income") {
        auto rec = classify_income(r_tight, tight, bob);
        REQUIRE(rec.has_value());
        CHECK(rec->kind == income_case::direct);
        CHECK(rec->amount == tokens(2500));
        CHECK(rec->beneficiary == bob);
    }

    SUBCASE("an outlay spent in full yields nothing for the sender") {
        CHECK_FALSE(classify_income(r_tight, tight, alice).has_value());
    }

    SUBCASE("an unused reservation comes back as residual income") {
        auto rec = classify_income(r_loose, loose, alice);
        REQUIRE(rec.has_value());
        CHECK(rec->kind == income_case::residual);
        CHECK(rec->amount == tokens(700));
    }

    SUBCASE("untouched accounts see nothing") {
        account_id carol = bed.add_actor("carol").id;
        CHECK_FALSE(classify_income(r_tight, tight, carol).has_value());
    }
}

TEST_CASE("a rolled-back call returns its value as residual income") {
    testbed bed = testbed::with_genesis({{"alice", 100000}});
    auto [deploy, counter] = bed.create("alice", "LOAD c\nPUSH 1\nADD\nSTORE c\nHALT", 0);
    bed.seal({deploy});

    // one unit of machine gas cannot even finish the LOAD
    gas_amount starved = bed.led.gas.intrinsic_of(tx_kind::contract_call) + 1;
    transaction call =
        bed.call("alice", counter, "", 400, starved, {state_key::storage(counter, "c")});
    bed.seal({call});

    eager_result er = eager_execute(bed.led);
    const execution_receipt& r = *er.receipt_of(call.tx_id);
    REQUIRE(r.status == receipt_status::rolled_back);
    CHECK(r.reason == rollback_reason::out_of_gas);

    auto rec = classify_income(r, call, bed.at("alice").id);
    REQUIRE(rec.has_value());
    CHECK(rec->kind == income_case::residual);
    CHECK(rec->amount == tokens(400));  // the value came back; the fee did not
}

TEST_CASE("transfers settled by the zero-cost ledger confirm for free") {
    testbed bed = testbed::with_genesis({{"alice", 100000}, {"bob", 50000}});
    transaction t = bed.transfer("alice", bed.at("bob").id, 2500);
    bed.seal({t});

    CHECK(income_cost(bed.locate(t), bed.led, bed.idx) == 0);

    vm_meter meter;
    verified_incomes vi =
        verify_incomes(bed.at("bob").id, {bed.locate(t)}, bed.led, bed.idx, meter);
    CHECK(vi.total == tokens(2500));
    CHECK(vi.by_tx.at(t.tx_id) == tokens(2500));
    CHECK(vi.income_gas == 0);
}

TEST_CASE("income through a contract call costs exactly that call's gas") {
    payout_rig rig = payout_rig::make({{"alice", 1000000}, {"bob", 50000}}, "bob");
    transaction call = rig.pay_once("bob");

    CHECK(income_cost(rig.bed.locate(call), rig.bed.led, rig.bed.idx) == rig.call_gas);

    income_support plan = plan_support({rig.bed.locate(call)}, rig.bed.led, rig.bed.idx);
    REQUIRE(plan.members.size() == 2);
    CHECK_FALSE(plan.members[0].executed);  // the deployment settles via the floor
    CHECK(plan.members[1].executed);        // the call has to run
    CHECK(plan.exec_gas_ceiling == call.gas_limit);

    vm_meter meter;
    verified_incomes vi = verify_incomes(rig.bed.at("bob").id, {rig.bed.locate(call)},
                                         rig.bed.led, rig.bed.idx, meter);
    CHECK(vi.total == tokens(25));
    CHECK(vi.income_gas == rig.call_gas);
}

TEST_CASE("payments aimed at the beneficiary never bloat an income's support") {
    payout_rig rig =
        payout_rig::make({{"alice", 1000000}, {"mallory", 1000000}, {"bob", 50000}}, "bob");
    account_id bob = rig.bed.at("bob").id;

    std::vector<transaction> bait;
    for (int i = 0; i < 30; i++) bait.push_back(rig.bed.transfer("mallory", bob, 1));
    rig.bed.seal(std::move(bait));
    transaction call = rig.pay_once("bob");

    // the support tracks bob's balance as a write target but never chases it
    income_support plan = plan_support({rig.bed.locate(call)}, rig.bed.led, rig.bed.idx);
    CHECK(plan.members.size() == 2);
    CHECK(plan.tracked.count(state_key::balance(bob)) == 1);
    CHECK(income_cost(rig.bed.locate(call), rig.bed.led, rig.bed.idx) == rig.call_gas);

    // the full dependency closure of the same balance does drag the bait in
    provenance_closure c =
        dependency_closure(state_key::balance(bob), chain_bound::all(), rig.bed.led,
                           rig.bed.idx);
    CHECK(c.members.size() >= 32);
}

TEST_CASE("the full income set pins the floor to the actual balance") {
    fixtures::random_chain_options o;
    o.seed = 77;
    o.blocks = 5;
    auto rc = fixtures::random_chain(o);
    eager_result er = eager_execute(rc.bed.led);

    for (const auto& [name, a] : rc.bed.actors) {
        income_catalog cat =
            build_income_catalog(a.id, rc.bed.led, rc.bed.idx, er.receipts, false);
        std::vector<tx_locator> all;
        for (const income_record& e : cat.entries) all.push_back(e.at);

        vm_meter meter;
        verified_incomes vi = verify_incomes(a.id, all, rc.bed.led, rc.bed.idx, meter);
        balance_bound bb{rc.bed.led.genesis_allocation(a.id), vi.total,
                         rc.bed.idx.total_expenses(a.id, chain_bound::all())};
        CHECK(bb.signed_floor() ==
              static_cast<long long>(er.state.balance_of(a.id).units));
    }
}

TEST_CASE("theta selection: exact search matches brute force") {
    std::mt19937_64 rng(2026);
    for (int round = 0; round < 60; round++) {
        income_catalog cat;
        size_t n = 1 + rng() % 8;
        for (size_t i = 0; i < n; i++) {
            income_record e;
            e.at = {i + 1, 0};
            e.amount = tokens(rng() % 50);
            e.cost_hint = rng() % 40;
            cat.entries.push_back(e);
        }
        token_amount required = tokens(rng() % 120);
        token_amount q = tokens(rng() % 30);
        token_amount x0 = tokens(rng() % 30);

        // cheapest subset whose floor covers the requirement
        bool best_ok = false;
        uint64_t best_cost = 0;
        for (size_t mask = 0; mask < (size_t{1} << n); mask++) {
            long long floor = static_cast<long long>(x0.units) -
                              static_cast<long long>(q.units);
            uint64_t cost = 0;
            for (size_t i = 0; i < n; i++)
                if (mask >> i & 1) {
                    floor += static_cast<long long>(cat.entries[i].amount.units);
                    cost += cat.entries[i].cost_hint;
                }
            if (floor < static_cast<long long>(required.units)) continue;
            if (!best_ok || cost < best_cost) best_ok = true, best_cost = cost;
        }

        theta_selection exact = select_theta_exact(cat, required, q, x0);
        CHECK(exact.feasible == best_ok);
        if (best_ok) CHECK(exact.est_cost == best_cost);

        theta_selection greedy = select_theta_greedy(cat, required, q, x0);
        CHECK(greedy.feasible == best_ok);
        if (best_ok) {
            CHECK(greedy.est_cost >= exact.est_cost);
            CHECK(static_cast<long long>(x0.units + greedy.est_amount.units) -
                      static_cast<long long>(q.units) >=
                  static_cast<long long>(required.units));
        }
    }
}

TEST_CASE("theta selection: big catalogs fall back to the greedy picker") {
    income_catalog cat;
    for (uint64_t i = 0; i < 40; i++) {
        income_record e;
        e.at = {i + 1, 0};
        e.amount = tokens(10);
        e.cost_hint = (i % 2) ? 1 : 1000;  // half the entries are cheap to prove
        cat.entries.push_back(e);
    }
    theta_selection sel = select_theta(cat, tokens(100), tokens(0), tokens(0));
    REQUIRE(sel.feasible);
    CHECK(sel.est_amount >= tokens(100));
    CHECK(sel.est_cost == 10);  // ten cheap entries cover it
    CHECK(std::is_sorted(sel.picked.begin(), sel.picked.end()));
}

TEST_CASE("theta selection: impossible requirements are reported, not forced") {
    income_catalog cat;
    income_record e;
    e.at = {1, 0};
    e.amount = tokens(5);
    cat.entries.push_back(e);
    CHECK_FALSE(select_theta(cat, tokens(100), tokens(0), tokens(0)).feasible);
    CHECK_FALSE(select_theta_greedy(cat, tokens(100), tokens(0), tokens(0)).feasible);
}

TEST_CASE("payee-side payment verification") {
    testbed bed =
        testbed::with_genesis({{"alice", 1000000}, {"bob", 20000}, {"carol", 30000}});
    account_id bob = bed.at("bob").id;
    account_id carol = bed.at("carol").id;

    transaction b1 = bed.transfer("bob", carol, 5000);
    transaction a1 = bed.transfer("alice", bob, 40000);
    bed.seal({b1, a1});
    transaction payment = bed.transfer("bob", carol, 30000);
    bed.seal({payment});
    tx_locator pat = bed.locate(payment);

    SUBCASE("a confirmed income covers the payment") {
        pay_outcome out = pay_verify(pat, {a1.tx_id}, bed.led, bed.idx);
        CHECK(out.decision == pay_decision::accepted);
        CHECK(out.bound.x0 == tokens(20000));
        CHECK(out.bound.p_theta == tokens(40000));
        // bob's earlier send at its worst, plus this payment's reservation
        CHECK(out.bound.q_expenses == tokens(6000) + payment.fee_reservation());
        CHECK(out.required == payment.expense());
        CHECK(out.income_gas == 0);  // the income was a zero-cost transfer
    }

    SUBCASE("without the income the floor falls short") {
        pay_outcome out = pay_verify(pat, {}, bed.led, bed.idx);
        CHECK(out.decision == pay_decision::rejected_insufficient);
        CHECK(out.bound.p_theta == tokens(0));
    }

    SUBCASE("an off-chain income reference is its own failure mode") {
        hash32 ghost{};
        ghost[0] = 0xaa;
        CHECK(pay_verify(pat, {ghost}, bed.led, bed.idx).decision ==
              pay_decision::unknown_income_tx);
    }

    SUBCASE("incomes sealed after the payment prove nothing for it") {
        transaction late = bed.transfer("alice", bob, 500000);
        bed.seal({late});
        pay_outcome out = pay_verify(pat, {late.tx_id}, bed.led, bed.idx);
        CHECK(out.decision == pay_decision::rejected_insufficient);
        CHECK(out.bound.p_theta == tokens(0));
    }
}

TEST_CASE("minimum-assumption balance queries pick the cheapest sufficient path") {
    payout_rig rig = payout_rig::make({{"alice", 1000000}, {"bob", 3000}}, "bob");
    account_id bob = rig.bed.at("bob").id;
    transaction call = rig.pay_once("bob");

    SUBCASE("the admission floor answers genesis-funded questions for free") {
        maq_outcome out = maq_answer(
            query::balance_at_least(bob, tokens(3000), chain_bound::all()), {},
            rig.bed.led, rig.bed.idx);
        CHECK(out.answer);
        CHECK(out.path == "zero_cost");
        CHECK(out.cost.vm_gas == 0);
        CHECK(out.cost.txs_executed == 0);
    }

    SUBCASE("contract income needs the income bound") {
        // the floor never credits contract payouts, so 3010 needs the call
        maq_outcome out = maq_answer(
            query::balance_at_least(bob, tokens(3010), chain_bound::all()),
            {call.tx_id}, rig.bed.led, rig.bed.idx);
        CHECK(out.answer);
        CHECK(out.path == "income_bound");
        CHECK(out.bound.p_theta == tokens(25));
        CHECK(out.cost.txs_executed == 1);
        // metered instruction gas: the call's cost above its intrinsic charge
        CHECK(out.cost.vm_gas ==
              rig.call_gas - rig.bed.led.gas.intrinsic_of(tx_kind::contract_call));
    }

    SUBCASE("no hints means falling through to the dependency closure") {
        maq_outcome out = maq_answer(
            query::balance_at_least(bob, tokens(3010), chain_bound::all()), {},
            rig.bed.led, rig.bed.idx);
        CHECK(out.answer);
        CHECK(out.path == "closure");
        CHECK(out.cost.txs_executed > 0);
    }

    SUBCASE("a hopeless threshold comes back false from the closure") {
        maq_outcome out = maq_answer(
            query::balance_at_least(bob, tokens(1000000000), chain_bound::all()),
            {call.tx_id}, rig.bed.led, rig.bed.idx);
        CHECK_FALSE(out.answer);
        CHECK(out.path == "closure");
    }

    SUBCASE("hints that are not on chain are an input error") {
        hash32 ghost{};
        ghost[5] = 1;
        CHECK_THROWS_AS(
            maq_answer(query::balance_at_least(bob, tokens(3010), chain_bound::all()),
                       {ghost}, rig.bed.led, rig.bed.idx),
            input_error);
    }

    SUBCASE("only balance_at_least goes through this machinery") {
        CHECK_THROWS_AS(maq_answer(query::exact_balance(bob, chain_bound::all()), {},
                                   rig.bed.led, rig.bed.idx),
                        input_error);
    }
}

TEST_CASE("oath audits") {
    testbed bed = testbed::with_genesis({{"keeper", 50000}, {"dave", 20000}});
    account_id dave = bed.at("dave").id;
    bed.seal({bed.transfer("dave", bed.at("keeper").id, 1500)});

    auto [box_tx, box] = bed.create("keeper", "#oath", 3000, 0);
    bed.seal({box_tx});

    SUBCASE("claim transactions declare the burn address up front") {
        CHECK(box_tx.payload == "#oath");
        oath_claim_payload p{query::balance_at_least(dave, tokens(1), chain_bound::all()),
                             query_result::boolean(true), tokens(1)};
        transaction c = make_oath_claim(bed.at("keeper").id, bed.at("keeper").secret, 99,
                                        box, p, 3000, tokens(1));
        CHECK(c.declared_writes.count(state_key::balance(blackhole_account())) == 1);
    }

    // honest: dave really did hold at least 10000 at genesis
    oath_claim_payload honest{
        query::balance_at_least(dave, tokens(10000), chain_bound::through_block(0)),
        query_result::boolean(true), tokens(2000)};
    transaction c1 = bed.claim("keeper", box, honest);
    bed.seal({c1});

    // false: after block 1 dave held 17500, not 999
    oath_claim_payload wrong{
        query::exact_balance(dave, chain_bound::through_block(1)),
        query_result::number(999), tokens(2000)};
    transaction c2 = bed.claim("keeper", box, wrong);
    bed.seal({c2});

    // false again, but the penalty exceeds the 1000 left in the box
    oath_claim_payload broke{
        query::exact_balance(dave, chain_bound::through_block(1)),
        query_result::number(998), tokens(5000)};
    transaction c3 = bed.claim("keeper", box, broke);
    bed.seal({c3});

    audit_outcome a1 = audit_oath(bed.locate(c1), bed.led, bed.idx);
    CHECK(a1.kind == audit_kind::honest);
    CHECK(a1.penalty == tokens(0));

    audit_outcome a2 = audit_oath(bed.locate(c2), bed.led, bed.idx);
    CHECK(a2.kind == audit_kind::slashed);
    CHECK(a2.penalty == tokens(2000));  // exactly the staked promise, never partial

    audit_outcome a3 = audit_oath(bed.locate(c3), bed.led, bed.idx);
    CHECK(a3.kind == audit_kind::underfunded);
    CHECK(a3.penalty == tokens(0));

    eager_result er = eager_execute(bed.led);
    CHECK(er.state.balance_of(box) == tokens(1000));
    CHECK(er.state.balance_of(blackhole_account()) == tokens(2000));

    SUBCASE("a malformed claim audits as invalid") {
        fixtures::actor& k = bed.at("keeper");
        transaction junk = tx_builder{}
                               .kind(tx_kind::oath_call)
                               .sender(k.id)
                               .nonce(k.nonce++)
                               .recipient(box)
                               .gas_limit(bed.led.gas.intrinsic_of(tx_kind::oath_call))
                               .gas_price(tokens(1))
                               .payload("not a claim")
                               .declare(state_key::balance(blackhole_account()))
                               .sign(k.secret);
        bed.seal({junk});
        CHECK(audit_oath(bed.locate(junk), bed.led, bed.idx).kind == audit_kind::invalid);
    }

    SUBCASE("auditing a plain transfer is a caller mistake") {
        transaction t = bed.transfer("dave", bed.at("keeper").id, 1);
        bed.seal({t});
        CHECK_THROWS_AS(audit_oath(bed.locate(t), bed.led, bed.idx), input_error);
    }
}
