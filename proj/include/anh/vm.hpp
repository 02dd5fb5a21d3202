#pragma once

#include <functional>

#include "anh/state.hpp"

namespace anh {

using vm_word = std::variant<uint64_t, account_id>;

struct instruction {
    opcode op = opcode::halt;
    vm_word operand{uint64_t{0}};  // PUSH
    std::string slot;              // LOAD / STORE
    uint64_t arg = 0;              // JUMPIF target or BURN amount
};

// Straight-line stack code with one conditional jump, one instruction per
// line. `#` or `;` starts a comment line. PUSH takes a decimal word or
// @<64 hex chars> for an account constant; jump targets are instruction
// indices and are validated at parse time.
struct contract_code {
    std::vector<instruction> ops;

    static contract_code parse(const std::string& text);  // throws input_error
    std::string to_text() const;
};

// Rewrites @name operands through the table, leaving @<hex> untouched.
// Scenario files write code against friendly names; the chain stores the
// resolved text.
std::string resolve_code_names(const std::string& text,
                               const std::map<std::string, account_id>& names);

// A deployment payload of exactly "#oath" (plus comments) creates a
// code-less oath contract: a stake bound to off-chain answers, slashable
// through oath_call transactions.
bool is_oath_create_payload(const std::string& payload);

// Call payloads seed the stack: an empty payload is an empty stack,
// otherwise a JSON array listed deepest-first, where numbers and decimal
// strings become machine words and "@<hex>" becomes an account constant.
// Anything else is nullopt, which faults the call as invalid code.
std::optional<std::vector<vm_word>> parse_call_stack(const std::string& payload);

struct vm_meter {
    uint64_t steps = 0;     // instructions retired
    gas_amount gas = 0;     // instruction gas consumed
    uint64_t txs = 0;       // transactions applied
};

// Process-wide instruction counter. Consensus paths assert it never moves.
uint64_t global_vm_steps();

struct oath_verdict {
    bool valid = false;    // claim parses and is checkable at this position
    bool truthful = false; // recorded result matches the chain
    token_amount penalty;
};

struct apply_context {
    const gas_table& gas;
    vm_meter* meter = nullptr;
    // Supplied by executors: evaluates an oath claim payload against the
    // chain strictly before `at`. Without a resolver oath calls fault.
    std::function<oath_verdict(const std::string& payload, const tx_locator& at)> oath_eval;
};

// Executes one transaction. The fee reservation and the nonce bump always
// land; every other effect rolls back as a unit on any fault. Requires a
// clean journal and leaves one behind.
execution_receipt apply_tx(exec_state& st, const transaction& tx, const tx_locator& at,
                           const apply_context& ctx);

struct contract_result {
    std::optional<rollback_reason> fault;
    gas_amount gas_metered = 0;  // instruction costs actually consumed
};

// Inner instruction loop, exposed for direct tests. `budget` is what the
// code may spend on top of the intrinsic charge; `stack` is the initial
// stack (call arguments, deepest first).
contract_result run_contract(exec_state& st, const account_id& self, const transaction& tx,
                             const contract_code& code, gas_amount budget,
                             std::vector<vm_word> stack, const apply_context& ctx);

}  // namespace anh
