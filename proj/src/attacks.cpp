#include "anh/attacks.hpp"

namespace anh {

std::vector<transaction> gen_tx_dos(uint64_t count, uint64_t seed, keychain& keys,
                                    const gas_table& gas) {
    static const std::string tag = "anh.txdos";
    std::vector<transaction> out;
    out.reserve(count);
    for (uint64_t i = 0; i < count; i++) {
        byte_writer w;
        w.raw(as_bytes(tag));
        w.u64(seed);
        w.u64(i);
        hash32 secret = sha256(w.out);
        account_id sender = keys.register_secret(secret);

        w.u64(~i);  // unrelated recipient, also fresh
        account_id target = user_account_from_secret(sha256(w.out));

        out.push_back(tx_builder{}
                          .kind(tx_kind::transfer)
                          .sender(sender)
                          .nonce(0)
                          .recipient(target)
                          .value(token_amount{1})
                          .gas_limit(gas.intrinsic_of(tx_kind::transfer))
                          .gas_price(token_amount{1})
                          .sign(secret));
    }
    return out;
}

static gas_amount code_gas(const gas_table& gas, std::initializer_list<opcode> ops,
                           gas_amount burn_gas) {
    gas_amount total = 0;
    for (opcode op : ops) total += gas.cost_of(op, burn_gas);
    return total;
}

contract_attack gen_exec_dos(const account_id& attacker, const hash32& attacker_secret,
                             uint64_t base_nonce, uint64_t count, gas_amount burn_gas,
                             token_amount gas_price, const gas_table& gas) {
    contract_attack out;
    out.contract = contract_address(attacker, base_nonce);

    // one token per call leaves through DERIVE_ACCOUNT + TRANSFER
    std::string code =
        "PUSH 1\n"
        "PUSH 7\n"
        "DERIVE_ACCOUNT\n"
        "TRANSFER\n"
        "BURN " + std::to_string(burn_gas) + "\n"
        "HALT\n";

    out.deploy = tx_builder{}
                     .kind(tx_kind::contract_create)
                     .sender(attacker)
                     .nonce(base_nonce)
                     .recipient(out.contract)
                     .value(token_amount{count})
                     .gas_limit(gas.intrinsic_of(tx_kind::contract_create))
                     .gas_price(gas_price)
                     .payload(code)
                     .sign(attacker_secret);

    gas_amount limit =
        gas.intrinsic_of(tx_kind::contract_call) +
        code_gas(gas,
                 {opcode::push, opcode::push, opcode::derive_account, opcode::transfer,
                  opcode::burn, opcode::halt},
                 burn_gas);

    for (uint64_t i = 0; i < count; i++) {
        uint64_t nonce = base_nonce + 1 + i;
        out.calls.push_back(
            tx_builder{}
                .kind(tx_kind::contract_call)
                .sender(attacker)
                .nonce(nonce)
                .recipient(out.contract)
                .value(token_amount{0})
                .gas_limit(limit)
                .gas_price(gas_price)
                .declare(state_key::balance(derived_account(7, attacker, nonce)))
                .sign(attacker_secret));
    }
    return out;
}

contract_attack gen_targeted(const account_id& attacker, const hash32& attacker_secret,
                             uint64_t base_nonce, uint64_t count, gas_amount burn_gas,
                             const account_id& victim, token_amount bait,
                             token_amount gas_price, const gas_table& gas) {
    contract_attack out;
    out.contract = contract_address(attacker, base_nonce);

    std::string code =
        "BURN " + std::to_string(burn_gas) + "\n"
        "PUSH " + std::to_string(bait.units) + "\n"
        "PUSH @" + victim.hex() + "\n"
        "TRANSFER\n"
        "HALT\n";

    out.deploy = tx_builder{}
                     .kind(tx_kind::contract_create)
                     .sender(attacker)
                     .nonce(base_nonce)
                     .recipient(out.contract)
                     .value(scale(bait, count))
                     .gas_limit(gas.intrinsic_of(tx_kind::contract_create))
                     .gas_price(gas_price)
                     .payload(code)
                     .sign(attacker_secret);

    gas_amount limit =
        gas.intrinsic_of(tx_kind::contract_call) +
        code_gas(gas, {opcode::burn, opcode::push, opcode::push, opcode::transfer, opcode::halt},
                 burn_gas);

    for (uint64_t i = 0; i < count; i++) {
        out.calls.push_back(tx_builder{}
                                .kind(tx_kind::contract_call)
                                .sender(attacker)
                                .nonce(base_nonce + 1 + i)
                                .recipient(out.contract)
                                .value(token_amount{0})
                                .gas_limit(limit)
                                .gas_price(gas_price)
                                .declare(state_key::balance(victim))
                                .sign(attacker_secret));
    }
    return out;
}

}  // namespace anh
