#include "doctest.h"

#include "chain_fixtures.hpp"

using namespace anh;
using fixtures::testbed;

TEST_CASE("eager bounds cut mid-block") {
    testbed bed = testbed::with_genesis({{"alice", 100000}, {"bob", 50000}});
    account_id bob = bed.at("bob").id;
    transaction t1 = bed.transfer("alice", bob, 1000);
    transaction t2 = bed.transfer("alice", bob, 2000);
    bed.seal({t1, t2});

    eager_options upto_first;
    upto_first.upto = chain_bound::through(bed.locate(t1));
    eager_result er = eager_execute(bed.led, upto_first);
    CHECK(er.state.balance_of(bob) == tokens(51000));
    CHECK(er.receipts.size() == 1);

    eager_result full = eager_execute(bed.led);
    CHECK(full.state.balance_of(bob) == tokens(53000));
    CHECK(full.fee_pool == tokens(2000));
}

TEST_CASE("block state snapshots line up with bounded runs") {
    testbed bed = testbed::with_genesis({{"alice", 100000}, {"bob", 50000}});
    bed.seal({bed.transfer("alice", bed.at("bob").id, 1000)});
    bed.seal({bed.transfer("bob", bed.at("alice").id, 300)});

    eager_options eo;
    eo.keep_block_states = true;
    eager_result er = eager_execute(bed.led, eo);
    REQUIRE(er.block_states.size() == 3);
    for (uint64_t h = 0; h < 3; h++) {
        eager_options bounded;
        bounded.upto = chain_bound::through_block(h);
        CHECK(er.block_states[h] == eager_execute(bed.led, bounded).state);
    }
}

TEST_CASE("closures pull exactly the transactions that can matter") {
    testbed bed = testbed::with_genesis(
        {{"alice", 100000}, {"bob", 50000}, {"carol", 30000}});
    account_id bob = bed.at("bob").id;
    account_id carol = bed.at("carol").id;

    transaction ab = bed.transfer("alice", bob, 1000);
    transaction cc = bed.transfer("carol", carol, 1);  // self-transfer, unrelated
    bed.seal({ab, cc});
    transaction bc = bed.transfer("bob", carol, 500);
    bed.seal({bc});

    // carol's balance depends on cc, bc, and through bc on ab
    provenance_closure c =
        dependency_closure(state_key::balance(carol), chain_bound::all(), bed.led, bed.idx);
    CHECK(c.members.size() == 3);

    // bob's balance before bc needs only ab
    provenance_closure before =
        dependency_closure(state_key::balance(bob), chain_bound::before(bed.locate(bc)),
                           bed.led, bed.idx);
    REQUIRE(before.members.size() == 1);
    CHECK(before.members[0].tx_id == ab.tx_id);
}

TEST_CASE("closure execution reproduces eager receipts bit for bit") {
    fixtures::random_chain_options o;
    o.seed = 42;
    o.blocks = 5;
    o.txs_per_block = 10;
    o.contract_count = 3;
    auto rc = fixtures::random_chain(o);
    eager_result eager = eager_execute(rc.bed.led);

    for (const auto& [name, a] : rc.bed.actors) {
        provenance_closure c = dependency_closure(state_key::balance(a.id),
                                                  chain_bound::all(), rc.bed.led, rc.bed.idx);
        vm_meter meter;
        closure_run run = execute_closure(c, rc.bed.led, rc.bed.idx, meter);
        for (const tx_locator& at : c.members) {
            const execution_receipt* ref = eager.receipt_of(at.tx_id);
            REQUIRE(ref != nullptr);
            const execution_receipt& lazy = run.receipts.at(at.tx_id);
            CHECK(lazy.status == ref->status);
            CHECK(lazy.reason == ref->reason);
            CHECK(lazy.gas_used == ref->gas_used);
            CHECK(lazy.fee_charged == ref->fee_charged);
            CHECK(lazy.refund == ref->refund);
            CHECK(lazy.delta == ref->delta);
        }
    }
}

TEST_CASE("observation answers match the oracle at every block boundary") {
    for (uint64_t seed : {7u, 8u, 9u}) {
        fixtures::random_chain_options o;
        o.seed = seed;
        o.blocks = 4;
        o.txs_per_block = 8;
        auto rc = fixtures::random_chain(o);

        eager_options eo;
        eo.keep_block_states = true;
        eager_result eager = eager_execute(rc.bed.led, eo);

        for (uint64_t h = 0; h < rc.bed.led.blocks().size(); h++) {
            chain_bound at = chain_bound::through_block(h);
            for (const auto& [name, a] : rc.bed.actors) {
                observe_outcome oo =
                    observe(query::exact_balance(a.id, at), rc.bed.led, rc.bed.idx);
                CHECK(oo.result.value == eager.block_states[h].balance_of(a.id).units);
            }
            for (const fixtures::deployed_contract& dc : rc.contracts) {
                for (const state_key& k : dc.call_declares) {
                    if (k.which != state_key::tag::storage) continue;
                    observe_outcome oo = observe(query::storage_value(dc.id, k.slot, at),
                                                 rc.bed.led, rc.bed.idx);
                    CHECK(oo.result.value ==
                          eager.block_states[h].storage_of(dc.id, k.slot));
                }
            }
        }
    }
}

TEST_CASE("settlement queries read the receipt of the sealed transfer") {
    testbed bed = testbed::with_genesis({{"alice", 11000}, {"bob", 100}});
    account_id bob = bed.at("bob").id;
    transaction ok = bed.transfer("alice", bob, 9000);
    transaction broke = bed.transfer("alice", bob, 9000);  // second one cannot settle
    bed.seal({ok, broke});

    CHECK(observe(query::transfer_succeeded(ok.tx_id), bed.led, bed.idx).result.truth);
    CHECK_FALSE(
        observe(query::transfer_succeeded(broke.tx_id), bed.led, bed.idx).result.truth);
    hash32 unknown{};
    CHECK_THROWS_AS(observe(query::transfer_succeeded(unknown), bed.led, bed.idx),
                    input_error);
}

TEST_CASE("a gas budget refuses oversized closures before executing") {
    testbed bed = testbed::with_genesis({{"alice", 100000}, {"bob", 50000}});
    account_id bob = bed.at("bob").id;
    bed.seal({bed.transfer("alice", bob, 1000)});
    bed.seal({bed.transfer("alice", bob, 1000)});

    query q = query::exact_balance(bob, chain_bound::all());
    uint64_t steps_before = global_vm_steps();
    CHECK_THROWS_AS(observe(q, bed.led, bed.idx, gas_amount{1}), closure_exceeds_budget);
    CHECK(global_vm_steps() == steps_before);
    CHECK(observe(q, bed.led, bed.idx, gas_amount{5000}).result.value == 52000);
}

TEST_CASE("queries pin their own bound") {
    testbed bed = testbed::with_genesis({{"alice", 100000}, {"bob", 50000}});
    account_id bob = bed.at("bob").id;
    bed.seal({bed.transfer("alice", bob, 1000)});
    bed.seal({bed.transfer("alice", bob, 2000)});

    CHECK(observe(query::exact_balance(bob, chain_bound::through_block(0)), bed.led, bed.idx)
              .result.value == 50000);
    CHECK(observe(query::exact_balance(bob, chain_bound::through_block(1)), bed.led, bed.idx)
              .result.value == 51000);
    CHECK(observe(query::balance_at_least(bob, tokens(52000), chain_bound::all()), bed.led,
                  bed.idx)
              .result.truth);
    CHECK_FALSE(observe(query::balance_at_least(bob, tokens(52000),
                                                chain_bound::through_block(1)),
                        bed.led, bed.idx)
                    .result.truth);
}

TEST_CASE("query and bound JSON round trips") {
    hash32 s = testbed::secret_of("q");
    account_id a = user_account_from_secret(s);

    query q1 = query::balance_at_least(a, tokens(55), chain_bound::through_block(3));
    query back = query_from_json(query_to_json(q1));
    CHECK(back.kind == q1.kind);
    CHECK(back.account == q1.account);
    CHECK(back.amount == q1.amount);
    CHECK(back.at.upper == q1.at.upper);

    chain_bound b = bound_from_json(nlohmann::json::parse("{\"before\":[2,1]}"));
    CHECK(b.upper == std::pair<uint64_t, uint64_t>{2, 1});
    CHECK(bound_from_json(bound_to_json(chain_bound::all())).is_all());
    CHECK(bound_from_json(nlohmann::json(4)).upper == std::pair<uint64_t, uint64_t>{5, 0});
    CHECK_THROWS_AS(bound_from_json(nlohmann::json::parse("\"sometimes\"")), input_error);
}

TEST_CASE("oath claims resolve the same under eager and closure execution") {
    testbed bed = testbed::with_genesis({{"keeper", 50000}, {"dave", 20000}});
    auto [box, box_addr] = bed.create("keeper", "#oath", 3000, 2000);
    bed.seal({box});

    // a false record about dave's starting balance
    oath_claim_payload p;
    p.q = query::exact_balance(bed.at("dave").id, chain_bound::through_block(0));
    p.recorded = query_result::number(1);
    p.penalty = tokens(2000);
    transaction claim = bed.claim("keeper", box_addr, p);
    bed.seal({claim});

    eager_result eager = eager_execute(bed.led);
    const execution_receipt* ref = eager.receipt_of(claim.tx_id);
    REQUIRE(ref != nullptr);
    CHECK(ref->applied());
    CHECK(ref->delta_on(state_key::balance(blackhole_account())) == 2000);

    provenance_closure c = dependency_closure_of(claim.effective_writes(),
                                                 chain_bound::through(bed.locate(claim)),
                                                 bed.led, bed.idx);
    vm_meter meter;
    closure_run run = execute_closure(c, bed.led, bed.idx, meter);
    CHECK(run.receipts.at(claim.tx_id).delta == ref->delta);
}
