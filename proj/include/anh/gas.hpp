#pragma once

#include <filesystem>
#include <map>

#include "anh/types.hpp"

namespace anh {

enum class tx_kind : uint8_t {
    transfer = 0,
    contract_create = 1,
    contract_call = 2,
    oath_call = 3,
};

const char* to_string(tx_kind k);
tx_kind tx_kind_from_string(const std::string& s);

enum class opcode : uint8_t {
    push = 0,
    add,
    sub,
    mul,
    load,
    store,
    jumpif,
    transfer,
    burn,
    derive_account,
    halt,
};

const char* to_string(opcode op);

// Pricing for transaction kinds and contract instructions. Every cost is
// at least 1, so gas strictly decreases and any program halts within its
// limit. BURN is special: it costs exactly its operand.
struct gas_table {
    std::map<tx_kind, gas_amount> intrinsic;
    std::map<opcode, gas_amount> op_cost;  // burn priced by operand, not listed here

    static gas_table defaults();
    static gas_table load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    gas_amount intrinsic_of(tx_kind k) const;
    gas_amount cost_of(opcode op, uint64_t burn_arg) const;
    hash32 digest() const;  // canonical hash, recorded in run reports
};

}  // namespace anh
