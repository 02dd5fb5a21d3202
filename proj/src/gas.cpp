#include "anh/gas.hpp"

#include <fstream>

#include "json.hpp"

namespace anh {

const char* to_string(tx_kind k) {
    switch (k) {
        case tx_kind::transfer: return "transfer";
        case tx_kind::contract_create: return "contract_create";
        case tx_kind::contract_call: return "contract_call";
        case tx_kind::oath_call: return "oath_call";
    }
    throw internal_error("unknown tx_kind");
}

tx_kind tx_kind_from_string(const std::string& s) {
    if (s == "transfer") return tx_kind::transfer;
    if (s == "contract_create") return tx_kind::contract_create;
    if (s == "contract_call") return tx_kind::contract_call;
    if (s == "oath_call") return tx_kind::oath_call;
    throw input_error("unknown transaction kind: " + s);
}

const char* to_string(opcode op) {
    switch (op) {
        case opcode::push: return "PUSH";
        case opcode::add: return "ADD";
        case opcode::sub: return "SUB";
        case opcode::mul: return "MUL";
        case opcode::load: return "LOAD";
        case opcode::store: return "STORE";
        case opcode::jumpif: return "JUMPIF";
        case opcode::transfer: return "TRANSFER";
        case opcode::burn: return "BURN";
        case opcode::derive_account: return "DERIVE_ACCOUNT";
        case opcode::halt: return "HALT";
    }
    throw internal_error("unknown opcode");
}

gas_table gas_table::defaults() {
    gas_table t;
    t.intrinsic[tx_kind::transfer] = 1000;
    t.intrinsic[tx_kind::contract_create] = 2000;
    t.intrinsic[tx_kind::contract_call] = 2000;
    t.intrinsic[tx_kind::oath_call] = 2000;
    t.op_cost[opcode::push] = 1;
    t.op_cost[opcode::add] = 1;
    t.op_cost[opcode::sub] = 1;
    t.op_cost[opcode::mul] = 1;
    t.op_cost[opcode::load] = 20;
    t.op_cost[opcode::store] = 20;
    t.op_cost[opcode::jumpif] = 1;
    t.op_cost[opcode::transfer] = 100;
    t.op_cost[opcode::derive_account] = 20;
    t.op_cost[opcode::halt] = 1;
    return t;
}

gas_amount gas_table::intrinsic_of(tx_kind k) const {
    auto it = intrinsic.find(k);
    if (it == intrinsic.end()) throw internal_error("gas table missing intrinsic cost");
    return it->second;
}

gas_amount gas_table::cost_of(opcode op, uint64_t burn_arg) const {
    if (op == opcode::burn) return burn_arg < 1 ? 1 : burn_arg;
    auto it = op_cost.find(op);
    if (it == op_cost.end()) throw internal_error("gas table missing opcode cost");
    return it->second;
}

hash32 gas_table::digest() const {
    byte_writer w;
    w.u32(static_cast<uint32_t>(intrinsic.size()));
    for (auto& [k, v] : intrinsic) {
        w.u8(static_cast<uint8_t>(k));
        w.u64(v);
    }
    w.u32(static_cast<uint32_t>(op_cost.size()));
    for (auto& [op, v] : op_cost) {
        w.u8(static_cast<uint8_t>(op));
        w.u64(v);
    }
    return sha256(w.out);
}

static const tx_kind all_tx_kinds[] = {
    tx_kind::transfer,
    tx_kind::contract_create,
    tx_kind::contract_call,
    tx_kind::oath_call,
};

static const opcode priced_opcodes[] = {
    opcode::push, opcode::add,    opcode::sub,            opcode::mul,  opcode::load,
    opcode::store, opcode::jumpif, opcode::transfer,       opcode::derive_account,
    opcode::halt,
};

gas_table gas_table::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw input_error("cannot open gas table file: " + file.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("bad gas table JSON in " + file.string() + ": " + e.what());
    }

    gas_table t = defaults();
    if (j.contains("intrinsic")) {
        for (auto& [name, cost] : j.at("intrinsic").items())
            t.intrinsic[tx_kind_from_string(name)] = cost.get<gas_amount>();
    }
    if (j.contains("ops")) {
        for (auto& [name, cost] : j.at("ops").items()) {
            bool known = false;
            for (opcode op : priced_opcodes) {
                if (name == to_string(op)) {
                    t.op_cost[op] = cost.get<gas_amount>();
                    known = true;
                    break;
                }
            }
            if (!known) throw input_error("unknown opcode in gas table: " + name);
        }
    }
    for (auto& [k, v] : t.intrinsic)
        if (v < 1) throw input_error("intrinsic cost must be at least 1");
    for (auto& [op, v] : t.op_cost)
        if (v < 1) throw input_error("opcode cost must be at least 1");
    return t;
}

void gas_table::save(const std::filesystem::path& file) const {
    nlohmann::ordered_json j;
    for (tx_kind k : all_tx_kinds) j["intrinsic"][to_string(k)] = intrinsic_of(k);
    for (opcode op : priced_opcodes) j["ops"][to_string(op)] = cost_of(op, 0);
    std::ofstream out(file);
    if (!out) throw input_error("cannot write gas table file: " + file.string());
    out << j.dump(2) << "\n";
}

}  // namespace anh
