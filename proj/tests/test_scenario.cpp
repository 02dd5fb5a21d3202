#include "doctest.h"

#include <fstream>

#include "chain_fixtures.hpp"

using namespace anh;
using nlohmann::json;

namespace {

scenario make_scenario(json j) {
    if (!j.contains("name")) j["name"] = "unit";
    if (!j.contains("seed")) j["seed"] = 7;
    return scenario::from_json(std::move(j));
}

const json basic = json::parse(R"({
    "name": "basic",
    "seed": 11,
    "genesis": {"alice": 100000, "bob": 50000},
    "blocks": [
        [
            {"op": "transfer", "from": "alice", "to": "bob", "value": 1200,
             "label": "t1"},
            {"op": "create", "from": "alice", "contract": "y", "value": 500,
             "code": ["PUSH 7", "STORE slot", "HALT"], "label": "mk"}
        ],
        [
            {"op": "call", "from": "bob", "contract": "y", "gas_limit": 2100,
             "declare": ["storage:y:slot"], "label": "poke"}
        ]
    ],
    "queries": [
        {"label": "bob_now", "query": {"kind": "exact_balance", "account": "bob",
                                       "at": "all"}}
    ]
})");

}  // namespace

TEST_CASE("the same scenario renders byte-identical reports") {
    run_outcome a = run_scenario(make_scenario(basic), {});
    run_outcome b = run_scenario(make_scenario(basic), {});
    CHECK(a.exit_code == 0);
    CHECK(a.report.dump(2) == b.report.dump(2));
}

TEST_CASE("the seed feeds every derived identity") {
    run_outcome a = run_scenario(make_scenario(basic), {});
    run_options other;
    other.seed_override = 99;
    run_outcome b = run_scenario(make_scenario(basic), other);

    CHECK(b.exit_code == 0);
    CHECK(b.report["seed"] == 99);
    CHECK(a.names.at("alice") != b.names.at("alice"));
    CHECK(a.report["chain"]["blocks"] == b.report["chain"]["blocks"]);
    // balances agree; the accounts holding them differ
    CHECK(a.report["accounts"]["bob"]["id"] != b.report["accounts"]["bob"]["id"]);
}

TEST_CASE("labels point at the sealed transactions") {
    run_outcome out = run_scenario(make_scenario(basic), {});
    REQUIRE(out.labels.count("t1") == 1);
    REQUIRE(out.labels.count("poke") == 1);
    CHECK(out.labels.at("t1").height == 1);
    CHECK(out.labels.at("poke").height == 2);
    CHECK(out.led.tx_at(out.labels.at("poke")).kind == tx_kind::contract_call);

    const json& q = out.report["queries"][0];
    CHECK(q["label"] == "bob_now");
    // 50000 + 1200, minus the charged part of poke's fee (PUSH+STORE+HALT = 22
    // machine gas on top of the 2000 intrinsic; the other 78 came back)
    CHECK(q["result"] == 51200 - 2022);
}

TEST_CASE("expectation mismatches surface as violations and exit 2") {
    json j = basic;
    j["name"] = "expect_broken";
    // a fee reservation far beyond alice's floor, marked as if it should seal
    // (a huge value alone would not do it: admission prices fees, not values)
    j["blocks"][0].push_back(json{{"op", "transfer"},
                                         {"from", "alice"},
                                         {"to", "bob"},
                                         {"value", 10},
                                         {"gas_limit", 100000000},
                                         {"expect", "admitted"}});
    run_outcome out = run_scenario(make_scenario(j), {});
    CHECK(out.exit_code == 2);
    CHECK(out.report["status"] == "violation");
    REQUIRE(out.report["violations"].size() == 1);
    std::string text = out.report["violations"][0].get<std::string>();
    CHECK(text.find("insufficient_zero_cost_fee") != std::string::npos);
}

TEST_CASE("expected rejections that seal anyway are violations too") {
    json j = basic;
    j["name"] = "expect_broken_2";
    j["blocks"][0].push_back(json{{"op", "transfer"},
                                         {"from", "alice"},
                                         {"to", "bob"},
                                         {"value", 10},
                                         {"expect", "rejected"}});
    run_outcome out = run_scenario(make_scenario(j), {});
    CHECK(out.exit_code == 2);
    CHECK(out.report["status"] == "violation");
}

TEST_CASE("unknown names are input errors, not silent accounts") {
    json j = basic;
    j["name"] = "bad_tokens";
    j["queries"][0]["query"]["account"] = "nobody_at_all";
    // queries never mint accounts, unlike transfer recipients
    CHECK_THROWS_AS(run_scenario(make_scenario(j), {}), input_error);
}

TEST_CASE("token resolution") {
    std::map<std::string, account_id> names;
    hash32 s = fixtures::testbed::secret_of("tok");
    account_id a = user_account_from_secret(s);
    names["alice"] = a;

    CHECK(resolve_account_token("alice", names) == a);
    CHECK(resolve_account_token("blackhole", names) == blackhole_account());
    CHECK(resolve_account_token("@" + a.hex(), names) == a);
    CHECK_THROWS_AS(resolve_account_token("nobody", names), input_error);
    CHECK_THROWS_AS(resolve_account_token("@zz", names), input_error);

    std::map<std::string, tx_locator> labels;
    hash32 id{};
    id[3] = 9;
    labels["t"] = tx_locator{4, 2, id};
    CHECK(resolve_tx_token("label:t", labels) == id);
    CHECK(resolve_tx_token(to_hex(id), labels) == id);
    CHECK_THROWS_AS(resolve_tx_token("label:missing", labels), input_error);

    CHECK(resolve_key_token("balance:alice", names) == state_key::balance(a));
    CHECK(resolve_key_token("nonce:alice", names) == state_key::nonce(a));
    CHECK(resolve_key_token("storage:alice:spot", names) ==
          state_key::storage(a, "spot"));
    CHECK_THROWS_AS(resolve_key_token("balance", names), input_error);
    CHECK_THROWS_AS(resolve_key_token("mood:alice", names), input_error);
}

TEST_CASE("saved chains reload into an equivalent ledger") {
    auto dir = std::filesystem::temp_directory_path() / "anh_scenario_save_test";
    std::filesystem::remove_all(dir);
    run_options opt;
    opt.save_chain_dir = dir;
    run_outcome out = run_scenario(make_scenario(basic), opt);

    ledger back = ledger::load(dir);
    REQUIRE(back.blocks().size() == out.led.blocks().size());
    for (size_t h = 0; h < back.blocks().size(); h++)
        CHECK(back.blocks()[h].block_hash == out.led.blocks()[h].block_hash);
    CHECK(back.zero_cost_at(chain_bound::all()).of(out.names.at("bob")) ==
          out.led.zero_cost_at(chain_bound::all()).of(out.names.at("bob")));
    std::filesystem::remove_all(dir);
}

TEST_CASE("scenario files load from disk and reject junk") {
    auto file = std::filesystem::temp_directory_path() / "anh_scenario_load_test.json";
    {
        std::ofstream out(file);
        out << basic.dump();
    }
    scenario sc = scenario::load(file);
    CHECK(sc.name == "basic");
    CHECK(sc.seed == 11);
    {
        std::ofstream out(file);
        out << "{ not json";
    }
    CHECK_THROWS_AS(scenario::load(file), input_error);
    std::filesystem::remove(file);
    CHECK_THROWS_AS(scenario::load(file), input_error);
}
