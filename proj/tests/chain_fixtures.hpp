#pragma once

#include <random>

#include "anh/scenario.hpp"

namespace fixtures {

using namespace anh;

struct actor {
    std::string name;
    hash32 secret{};
    account_id id;
    uint64_t nonce = 0;  // local mirror of the sent count
};

// Hand-driven chain builder for tests: registers keys, tracks nonces, and
// seals through the real admission path.
struct testbed {
    ledger led;
    inverted_index idx;
    std::map<std::string, actor> actors;

    static testbed with_genesis(const std::vector<std::pair<std::string, uint64_t>>& allocs,
                                gas_table gt = gas_table::defaults());
    static hash32 secret_of(const std::string& name);

    actor& add_actor(const std::string& name);  // fresh key, no funds
    actor& at(const std::string& name);

    transaction transfer(const std::string& from, const account_id& to, uint64_t value,
                         gas_amount limit = 0, uint64_t price = 1);
    // returns the deployment and the address it lands at
    std::pair<transaction, account_id> create(const std::string& from, const std::string& code,
                                              uint64_t value, gas_amount limit = 0,
                                              uint64_t price = 1);
    transaction call(const std::string& from, const account_id& contract,
                     const std::string& payload, uint64_t value, gas_amount limit,
                     const std::set<state_key>& declares = {}, uint64_t price = 1);
    transaction claim(const std::string& from, const account_id& oath,
                      const oath_claim_payload& payload, gas_amount limit = 0,
                      uint64_t price = 1);

    block seal(std::vector<transaction> txs);  // strict; throws on any reject
    std::pair<block, std::vector<rejected_tx>> seal_loose(
        const std::vector<transaction>& candidates);

    tx_locator locate(const transaction& tx) const;

private:
    explicit testbed(ledger l) : led(std::move(l)) {}
    void resync_nonces();
};

// A contract the random generator deployed, with what its callers need.
struct deployed_contract {
    account_id id;
    std::set<state_key> call_declares;
    gas_amount call_gas = 0;  // exact gas a successful call consumes
};

struct random_chain_options {
    uint64_t seed = 1;
    int blocks = 6;
    int actor_count = 6;
    int txs_per_block = 8;
    int contract_count = 2;
};

struct random_chain_result {
    testbed bed;
    std::vector<deployed_contract> contracts;
    uint64_t rejected = 0;
};

// Seed-driven mix of transfers, deployments and calls: some candidates are
// over-sized, under-declared or under-funded on purpose, so the sealed
// chain contains settled, rolled-back and rejected traffic.
random_chain_result random_chain(const random_chain_options& o);

}  // namespace fixtures
