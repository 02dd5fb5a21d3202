#include "chain_fixtures.hpp"

namespace fixtures {

hash32 testbed::secret_of(const std::string& name) {
    return sha256({as_bytes("anh.test"), as_bytes(name)});
}

testbed testbed::with_genesis(const std::vector<std::pair<std::string, uint64_t>>& allocs,
                              gas_table gt) {
    std::map<account_id, token_amount> by_id;
    std::map<std::string, actor> cast;
    for (const auto& [name, units] : allocs) {
        actor a{name, secret_of(name), user_account_from_secret(secret_of(name)), 0};
        by_id.emplace(a.id, token_amount{units});
        cast.emplace(name, std::move(a));
    }
    testbed bed(ledger::make_genesis(std::move(by_id), std::move(gt)));
    bed.actors = std::move(cast);
    for (auto& [name, a] : bed.actors) bed.led.keys.register_secret(a.secret);
    bed.idx = inverted_index::build(bed.led);
    return bed;
}

actor& testbed::add_actor(const std::string& name) {
    auto it = actors.find(name);
    if (it != actors.end()) return it->second;
    actor a{name, secret_of(name), {}, 0};
    a.id = led.keys.register_secret(a.secret);
    return actors.emplace(name, std::move(a)).first->second;
}

actor& testbed::at(const std::string& name) {
    auto it = actors.find(name);
    if (it == actors.end()) throw input_error("fixture has no actor " + name);
    return it->second;
}

transaction testbed::transfer(const std::string& from, const account_id& to, uint64_t value,
                              gas_amount limit, uint64_t price) {
    actor& a = at(from);
    tx_builder b;
    return b.kind(tx_kind::transfer)
        .sender(a.id)
        .nonce(a.nonce++)
        .recipient(to)
        .value(tokens(value))
        .gas_limit(limit ? limit : led.gas.intrinsic_of(tx_kind::transfer))
        .gas_price(tokens(price))
        .sign(a.secret);
}

std::pair<transaction, account_id> testbed::create(const std::string& from,
                                                   const std::string& code, uint64_t value,
                                                   gas_amount limit, uint64_t price) {
    actor& a = at(from);
    account_id target = contract_address(a.id, a.nonce);
    tx_builder b;
    transaction tx = b.kind(tx_kind::contract_create)
                         .sender(a.id)
                         .nonce(a.nonce++)
                         .recipient(target)
                         .value(tokens(value))
                         .gas_limit(limit ? limit : led.gas.intrinsic_of(tx_kind::contract_create))
                         .gas_price(tokens(price))
                         .payload(code)
                         .sign(a.secret);
    return {std::move(tx), target};
}

transaction testbed::call(const std::string& from, const account_id& contract,
                          const std::string& payload, uint64_t value, gas_amount limit,
                          const std::set<state_key>& declares, uint64_t price) {
    actor& a = at(from);
    tx_builder b;
    b.kind(tx_kind::contract_call)
        .sender(a.id)
        .nonce(a.nonce++)
        .recipient(contract)
        .value(tokens(value))
        .gas_limit(limit)
        .gas_price(tokens(price))
        .payload(payload);
    for (const state_key& k : declares) b.declare(k);
    return b.sign(a.secret);
}

transaction testbed::claim(const std::string& from, const account_id& oath,
                           const oath_claim_payload& payload, gas_amount limit,
                           uint64_t price) {
    actor& a = at(from);
    return make_oath_claim(a.id, a.secret, a.nonce++, oath, payload,
                           limit ? limit : led.gas.intrinsic_of(tx_kind::oath_call),
                           tokens(price));
}

block testbed::seal(std::vector<transaction> txs) {
    block b = led.seal_block(std::move(txs));
    idx.index_block(b);
    resync_nonces();
    return b;
}

std::pair<block, std::vector<rejected_tx>> testbed::seal_loose(
    const std::vector<transaction>& candidates) {
    auto out = led.seal_filtered(candidates);
    idx.index_block(out.first);
    resync_nonces();
    return out;
}

void testbed::resync_nonces() {
    for (auto& [name, a] : actors) a.nonce = led.sent_count_of(a.id);
}

tx_locator testbed::locate(const transaction& tx) const {
    auto loc = idx.locate(tx.tx_id);
    if (!loc) throw input_error("fixture transaction was not sealed");
    return *loc;
}

namespace {

// Three call targets with different shapes: one pays a fixed actor, one
// bumps a counter slot, one burns gas and stores a product.
deployed_contract deploy_template(testbed& bed, int which, const std::string& from,
                                  const account_id& payee,
                                  std::vector<transaction>& out_txs) {
    const gas_table& gt = bed.led.gas;
    gas_amount call_base = gt.intrinsic_of(tx_kind::contract_call);
    std::string code;
    deployed_contract dc;
    uint64_t deposit = 0;
    if (which == 0) {
        code = "PUSH 25\nPUSH @" + payee.hex() + "\nTRANSFER\nHALT\n";
        dc.call_declares = {state_key::balance(payee)};
        dc.call_gas = call_base + 1 + 1 + gt.cost_of(opcode::transfer, 0) + 1;
        deposit = 100000;
    } else if (which == 1) {
        code = "LOAD c\nPUSH 1\nADD\nSTORE c\nHALT\n";
        dc.call_gas = call_base + gt.cost_of(opcode::load, 0) + 1 + 1 +
                      gt.cost_of(opcode::store, 0) + 1;
    } else {
        code = "BURN 200\nPUSH 3\nPUSH 9\nMUL\nSTORE prod\nHALT\n";
        dc.call_gas = call_base + 200 + 1 + 1 + 1 + gt.cost_of(opcode::store, 0) + 1;
    }
    auto [tx, addr] = bed.create(from, code, deposit,
                                 gt.intrinsic_of(tx_kind::contract_create));
    dc.id = addr;
    if (which == 1) dc.call_declares = {state_key::storage(addr, "c")};
    if (which == 2) dc.call_declares = {state_key::storage(addr, "prod")};
    out_txs.push_back(std::move(tx));
    return dc;
}

}  // namespace

random_chain_result random_chain(const random_chain_options& o) {
    std::mt19937_64 rng(o.seed);
    std::vector<std::pair<std::string, uint64_t>> allocs;
    std::vector<std::string> names;
    for (int i = 0; i < o.actor_count; i++) {
        std::string name = "u" + std::to_string(o.seed) + "_" + std::to_string(i);
        names.push_back(name);
        allocs.emplace_back(name, i < 2 ? 1'000'000'000 : 1 + rng() % 60000);
    }

    random_chain_result out{testbed::with_genesis(allocs), {}, 0};
    testbed& bed = out.bed;
    // two actors outside genesis: anything they send must die at the fee check
    std::string broke1 = "broke" + std::to_string(o.seed) + "_a";
    std::string broke2 = "broke" + std::to_string(o.seed) + "_b";
    bed.add_actor(broke1);
    bed.add_actor(broke2);

    std::vector<transaction> deploys;
    for (int c = 0; c < o.contract_count; c++) {
        const std::string& payee = names[(c + 1) % names.size()];
        out.contracts.push_back(
            deploy_template(bed, c % 3, names[0], bed.at(payee).id, deploys));
    }
    if (!deploys.empty()) bed.seal(std::move(deploys));

    auto any_actor = [&]() -> const std::string& { return names[rng() % names.size()]; };

    for (int b = 0; b < o.blocks; b++) {
        std::vector<transaction> cands;
        for (int t = 0; t < o.txs_per_block; t++) {
            uint64_t roll = rng() % 100;
            if (roll < 55 || out.contracts.empty()) {
                // mostly modest transfers; sometimes far beyond any balance
                uint64_t value = roll < 8 ? rng() % 2'000'000'000 : rng() % 20000;
                cands.push_back(bed.transfer(any_actor(), bed.at(any_actor()).id, value,
                                             0, 1 + rng() % 2));
            } else if (roll < 85) {
                const deployed_contract& dc = out.contracts[rng() % out.contracts.size()];
                std::set<state_key> declares = dc.call_declares;
                if (rng() % 10 == 0 && !declares.empty())
                    declares.erase(declares.begin());  // provoke undeclared faults
                gas_amount limit = dc.call_gas;
                if (rng() % 7 == 0) {
                    gas_amount cut = rng() % 150;
                    gas_amount floor_limit = bed.led.gas.intrinsic_of(tx_kind::contract_call);
                    limit = limit > cut && limit - cut >= floor_limit ? limit - cut
                                                                      : floor_limit;
                }
                cands.push_back(bed.call(any_actor(), dc.id, "", rng() % 50, limit, declares));
            } else if (roll < 93) {
                uint64_t k = rng() % 1000;
                std::string code =
                    "PUSH " + std::to_string(k) + "\nSTORE s\nHALT\n";
                auto [tx, addr] = bed.create(any_actor(), code, rng() % 100);
                cands.push_back(std::move(tx));
                deployed_contract dc;
                dc.id = addr;
                dc.call_declares = {state_key::storage(addr, "s")};
                dc.call_gas = bed.led.gas.intrinsic_of(tx_kind::contract_call) + 1 + 20 + 1;
                out.contracts.push_back(std::move(dc));
            } else {
                cands.push_back(bed.transfer(rng() % 2 ? broke1 : broke2,
                                             bed.at(any_actor()).id, 1 + rng() % 100));
            }
        }
        auto [blk, rejected] = bed.seal_loose(cands);
        out.rejected += rejected.size();
    }
    return out;
}

}  // namespace fixtures
