#pragma once

#include "anh/ledger.hpp"

namespace anh {

// Flood of perfectly well-formed, well-signed transactions from brand-new
// keys that hold nothing. Against balance-checking admission each one
// forces a state lookup after executing predecessors; against the
// zero-cost fee rule each one dies at a map lookup.
std::vector<transaction> gen_tx_dos(uint64_t count, uint64_t seed, keychain& keys,
                                    const gas_table& gas);

struct contract_attack {
    transaction deploy;
    account_id contract;
    std::vector<transaction> calls;
};

// Deploys a contract that wastes `burn_gas` per call and dribbles one
// token to a freshly derived account each time, so every call writes a
// key nobody has ever seen. The attacker pays full fees; the damage model
// is making *other people's* queries expensive, not free riding.
contract_attack gen_exec_dos(const account_id& attacker, const hash32& attacker_secret,
                             uint64_t base_nonce, uint64_t count, gas_amount burn_gas,
                             token_amount gas_price, const gas_table& gas);

// Same burn, but every call also pays `bait` tokens to the victim. That
// plants the victim's balance key into each call's write set, dragging the
// whole flood into any dependency closure over that balance.
contract_attack gen_targeted(const account_id& attacker, const hash32& attacker_secret,
                             uint64_t base_nonce, uint64_t count, gas_amount burn_gas,
                             const account_id& victim, token_amount bait,
                             token_amount gas_price, const gas_table& gas);

struct attack_metrics {
    std::string attack;
    uint64_t count = 0;
    uint64_t admission_rejects = 0;
    uint64_t vm_steps_during_consensus = 0;
    gas_amount victim_maq_gas = 0;
    gas_amount victim_exact_balance_gas = 0;
};

}  // namespace anh
