#include "anh/vm.hpp"

#include <atomic>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace anh {

static std::atomic<uint64_t> vm_step_counter{0};

uint64_t global_vm_steps() { return vm_step_counter.load(std::memory_order_relaxed); }

static std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

static bool parse_u64(const std::string& s, uint64_t& out) {
    if (s.empty() || s.size() > 20) return false;
    uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        uint64_t digit = static_cast<uint64_t>(c - '0');
        if (v > (std::numeric_limits<uint64_t>::max() - digit) / 10) return false;
        v = v * 10 + digit;
    }
    out = v;
    return true;
}

contract_code contract_code::parse(const std::string& text) {
    contract_code code;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    auto bad = [&](const std::string& why) {
        return input_error("code line " + std::to_string(lineno) + ": " + why);
    };

    while (std::getline(in, line)) {
        lineno++;
        std::vector<std::string> tok = split_tokens(line);
        if (tok.empty() || tok[0][0] == '#' || tok[0][0] == ';') continue;

        instruction ins;
        const std::string& name = tok[0];
        auto expect_args = [&](size_t n) {
            if (tok.size() != n + 1)
                throw bad(name + " takes " + std::to_string(n) + " operand(s)");
        };

        if (name == "PUSH") {
            expect_args(1);
            ins.op = opcode::push;
            const std::string& a = tok[1];
            if (!a.empty() && a[0] == '@') {
                ins.operand = account_id{hash32_from_hex(a.substr(1))};
            } else {
                uint64_t v;
                if (!parse_u64(a, v)) throw bad("bad PUSH operand: " + a);
                ins.operand = v;
            }
        } else if (name == "ADD" || name == "SUB" || name == "MUL" || name == "HALT" ||
                   name == "TRANSFER" || name == "DERIVE_ACCOUNT") {
            expect_args(0);
            if (name == "ADD") ins.op = opcode::add;
            else if (name == "SUB") ins.op = opcode::sub;
            else if (name == "MUL") ins.op = opcode::mul;
            else if (name == "TRANSFER") ins.op = opcode::transfer;
            else if (name == "DERIVE_ACCOUNT") ins.op = opcode::derive_account;
            else ins.op = opcode::halt;
        } else if (name == "LOAD" || name == "STORE") {
            expect_args(1);
            ins.op = name == "LOAD" ? opcode::load : opcode::store;
            ins.slot = tok[1];
        } else if (name == "JUMPIF" || name == "BURN") {
            expect_args(1);
            ins.op = name == "JUMPIF" ? opcode::jumpif : opcode::burn;
            if (!parse_u64(tok[1], ins.arg)) throw bad("bad " + name + " operand: " + tok[1]);
        } else {
            throw bad("unknown instruction: " + name);
        }
        code.ops.push_back(std::move(ins));
    }

    for (size_t i = 0; i < code.ops.size(); i++) {
        const instruction& ins = code.ops[i];
        if (ins.op == opcode::jumpif && ins.arg > code.ops.size())
            throw input_error("jump target " + std::to_string(ins.arg) +
                              " past end of code (" + std::to_string(code.ops.size()) + ")");
    }
    return code;
}

std::string contract_code::to_text() const {
    std::string out;
    for (const instruction& ins : ops) {
        out += to_string(ins.op);
        switch (ins.op) {
            case opcode::push:
                if (std::holds_alternative<uint64_t>(ins.operand))
                    out += " " + std::to_string(std::get<uint64_t>(ins.operand));
                else
                    out += " @" + std::get<account_id>(ins.operand).hex();
                break;
            case opcode::load:
            case opcode::store: out += " " + ins.slot; break;
            case opcode::jumpif:
            case opcode::burn: out += " " + std::to_string(ins.arg); break;
            default: break;
        }
        out += "\n";
    }
    return out;
}

static bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_';
}

std::string resolve_code_names(const std::string& text,
                               const std::map<std::string, account_id>& names) {
    std::string out;
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '@') {
            out += text[i++];
            continue;
        }
        size_t j = i + 1;
        while (j < text.size() && is_name_char(text[j])) j++;
        std::string word = text.substr(i + 1, j - i - 1);
        auto it = names.find(word);
        if (it != names.end()) {
            out += "@" + it->second.hex();
        } else {
            // leave @<hex> and unknown names alone; the parser will complain
            // about the latter with a line number
            out += text.substr(i, j - i);
        }
        i = j;
    }
    return out;
}

bool is_oath_create_payload(const std::string& payload) {
    std::istringstream in(payload);
    std::string line;
    bool marker = false;
    while (std::getline(in, line)) {
        std::vector<std::string> tok = split_tokens(line);
        if (tok.empty()) continue;
        if (tok.size() == 1 && tok[0] == "#oath" && !marker) {
            marker = true;
            continue;
        }
        if (tok[0][0] == '#' || tok[0][0] == ';') continue;
        return false;  // real instructions disqualify the marker form
    }
    return marker;
}

// Deterministic junk for BURN results: splitmix64 finalizer over the burn
// amount, sender and nonce.
static uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

static uint64_t burn_result(uint64_t amount, const transaction& tx, size_t pc) {
    uint64_t sender_word = 0;
    for (int i = 0; i < 8; i++) sender_word |= static_cast<uint64_t>(tx.sender.id[i]) << (8 * i);
    return mix64(amount ^ mix64(tx.nonce ^ mix64(sender_word ^ pc)));
}

static constexpr size_t stack_limit = 256;

contract_result run_contract(exec_state& st, const account_id& self, const transaction& tx,
                             const contract_code& code, gas_amount budget,
                             std::vector<vm_word> stack, const apply_context& ctx) {
    contract_result out;
    const std::set<state_key> declared = tx.effective_writes();

    auto pop_u64 = [&](uint64_t& v) {
        if (stack.empty() || !std::holds_alternative<uint64_t>(stack.back())) return false;
        v = std::get<uint64_t>(stack.back());
        stack.pop_back();
        return true;
    };
    auto pop_account = [&](account_id& a) {
        if (stack.empty() || !std::holds_alternative<account_id>(stack.back())) return false;
        a = std::get<account_id>(stack.back());
        stack.pop_back();
        return true;
    };
    auto fault = [&](rollback_reason r) { out.fault = r; };

    size_t pc = 0;
    while (!out.fault && pc < code.ops.size()) {
        const instruction& ins = code.ops[pc];
        gas_amount cost = ctx.gas.cost_of(ins.op, ins.arg);
        if (cost > budget - out.gas_metered) {
            fault(rollback_reason::out_of_gas);
            break;
        }
        out.gas_metered += cost;
        vm_step_counter.fetch_add(1, std::memory_order_relaxed);
        if (ctx.meter) {
            ctx.meter->steps += 1;
            ctx.meter->gas += cost;
        }

        bool jumped = false;
        switch (ins.op) {
            case opcode::push:
                if (stack.size() >= stack_limit) fault(rollback_reason::stack_error);
                else stack.push_back(ins.operand);
                break;
            case opcode::add:
            case opcode::sub:
            case opcode::mul: {
                uint64_t b, a;
                if (!pop_u64(b) || !pop_u64(a)) {
                    fault(rollback_reason::stack_error);
                    break;
                }
                bool ok;
                uint64_t r = 0;
                if (ins.op == opcode::add) {
                    ok = b <= std::numeric_limits<uint64_t>::max() - a;
                    if (ok) r = a + b;
                } else if (ins.op == opcode::sub) {
                    ok = b <= a;
                    if (ok) r = a - b;
                } else {
                    ok = b == 0 || a <= std::numeric_limits<uint64_t>::max() / b;
                    if (ok) r = a * b;
                }
                if (!ok) fault(rollback_reason::arithmetic_error);
                else stack.push_back(r);
                break;
            }
            case opcode::load: {
                state_key key = state_key::storage(self, ins.slot);
                if (!declared.count(key)) fault(rollback_reason::undeclared_access);
                else if (stack.size() >= stack_limit) fault(rollback_reason::stack_error);
                else stack.push_back(st.storage_of(self, ins.slot));
                break;
            }
            case opcode::store: {
                uint64_t v;
                state_key key = state_key::storage(self, ins.slot);
                if (!pop_u64(v)) fault(rollback_reason::stack_error);
                else if (!declared.count(key)) fault(rollback_reason::undeclared_access);
                else st.set_storage(self, ins.slot, v);
                break;
            }
            case opcode::jumpif: {
                uint64_t cond;
                if (!pop_u64(cond)) fault(rollback_reason::stack_error);
                else if (cond != 0) {
                    pc = ins.arg;
                    jumped = true;
                }
                break;
            }
            case opcode::transfer: {
                account_id target;
                uint64_t amount;
                if (!pop_account(target) || !pop_u64(amount)) {
                    fault(rollback_reason::stack_error);
                    break;
                }
                if (!declared.count(state_key::balance(target))) {
                    fault(rollback_reason::undeclared_access);
                    break;
                }
                token_amount bal = st.balance_of(self);
                if (bal < token_amount{amount}) {
                    fault(rollback_reason::insufficient_balance);
                    break;
                }
                st.set_balance(self, bal - token_amount{amount});
                st.set_balance(target, st.balance_of(target) + token_amount{amount});
                break;
            }
            case opcode::burn:
                if (stack.size() >= stack_limit) fault(rollback_reason::stack_error);
                else stack.push_back(burn_result(ins.arg, tx, pc));
                break;
            case opcode::derive_account: {
                uint64_t seed;
                if (!pop_u64(seed)) fault(rollback_reason::stack_error);
                else stack.push_back(derived_account(seed, tx.sender, tx.nonce));
                break;
            }
            case opcode::halt: return out;
        }
        if (!jumped) pc++;
    }
    return out;
}

std::optional<std::vector<vm_word>> parse_call_stack(const std::string& payload) {
    std::vector<vm_word> stack;
    bool blank = payload.find_first_not_of(" \t\r\n") == std::string::npos;
    if (blank) return stack;

    nlohmann::json j = nlohmann::json::parse(payload, nullptr, false);
    if (j.is_discarded() || !j.is_array()) return std::nullopt;
    for (const auto& e : j) {
        if (e.is_number_unsigned()) {
            stack.emplace_back(e.get<uint64_t>());
        } else if (e.is_string()) {
            std::string s = e.get<std::string>();
            if (!s.empty() && s[0] == '@') {
                try {
                    stack.emplace_back(account_id{hash32_from_hex(s.substr(1))});
                } catch (const input_error&) {
                    return std::nullopt;
                }
            } else {
                uint64_t v;
                if (!parse_u64(s, v)) return std::nullopt;
                stack.emplace_back(v);
            }
        } else {
            return std::nullopt;
        }
        if (stack.size() > stack_limit) return std::nullopt;
    }
    return stack;
}

execution_receipt apply_tx(exec_state& st, const transaction& tx, const tx_locator& at,
                           const apply_context& ctx) {
    if (st.mark() != 0) throw internal_error("apply_tx needs a clean journal");
    if (ctx.meter) ctx.meter->txs += 1;

    execution_receipt r;
    r.tx_id = tx.tx_id;
    r.at = at;

    token_amount reservation = tx.fee_reservation();
    token_amount sender_balance = st.balance_of(tx.sender);
    if (sender_balance < reservation)
        throw internal_error("sealed transaction cannot cover its fee reservation; "
                             "admission is broken");
    st.set_balance(tx.sender, sender_balance - reservation);
    st.set_nonce(tx.sender, st.nonce_of(tx.sender) + 1);
    size_t work_mark = st.mark();

    gas_amount intrinsic = ctx.gas.intrinsic_of(tx.kind);
    if (tx.gas_limit < intrinsic)
        throw internal_error("sealed transaction below intrinsic gas; admission is broken");
    gas_amount charged = intrinsic;
    std::optional<rollback_reason> fault;

    switch (tx.kind) {
        case tx_kind::transfer: {
            token_amount bal = st.balance_of(tx.sender);
            if (bal < tx.value) {
                fault = rollback_reason::insufficient_balance;
                break;
            }
            st.set_balance(tx.sender, bal - tx.value);
            st.set_balance(tx.recipient, st.balance_of(tx.recipient) + tx.value);
            break;
        }
        case tx_kind::contract_create: {
            if (tx.recipient != contract_address(tx.sender, tx.nonce) ||
                st.contract_at(tx.recipient) != nullptr) {
                fault = rollback_reason::invalid_code;
                break;
            }
            contract_record rec;
            if (is_oath_create_payload(tx.payload)) {
                rec.oath = true;
            } else {
                try {
                    rec.code_text = contract_code::parse(tx.payload).to_text();
                } catch (const input_error&) {
                    fault = rollback_reason::invalid_code;
                    break;
                }
            }
            token_amount bal = st.balance_of(tx.sender);
            if (bal < tx.value) {
                fault = rollback_reason::insufficient_balance;
                break;
            }
            st.set_balance(tx.sender, bal - tx.value);
            st.set_balance(tx.recipient, st.balance_of(tx.recipient) + tx.value);
            st.install_contract(tx.recipient, std::move(rec));
            break;
        }
        case tx_kind::contract_call: {
            const contract_record* rec = st.contract_at(tx.recipient);
            if (!rec || rec->oath) {
                fault = rollback_reason::missing_contract;
                break;
            }
            auto stack = parse_call_stack(tx.payload);
            if (!stack) {
                fault = rollback_reason::invalid_code;
                break;
            }
            token_amount bal = st.balance_of(tx.sender);
            if (bal < tx.value) {
                fault = rollback_reason::insufficient_balance;
                break;
            }
            st.set_balance(tx.sender, bal - tx.value);
            st.set_balance(tx.recipient, st.balance_of(tx.recipient) + tx.value);

            contract_code code = contract_code::parse(rec->code_text);
            contract_result run = run_contract(st, tx.recipient, tx, code,
                                               tx.gas_limit - intrinsic, std::move(*stack), ctx);
            charged += run.gas_metered;
            r.vm_gas = run.gas_metered;
            fault = run.fault;
            break;
        }
        case tx_kind::oath_call: {
            const contract_record* rec = st.contract_at(tx.recipient);
            if (!rec || !rec->oath) {
                fault = rollback_reason::invalid_oath;
                break;
            }
            token_amount bal = st.balance_of(tx.sender);
            if (bal < tx.value) {
                fault = rollback_reason::insufficient_balance;
                break;
            }
            st.set_balance(tx.sender, bal - tx.value);
            st.set_balance(tx.recipient, st.balance_of(tx.recipient) + tx.value);

            if (!ctx.oath_eval) {
                fault = rollback_reason::invalid_oath;
                break;
            }
            oath_verdict verdict = ctx.oath_eval(tx.payload, at);
            if (!verdict.valid) {
                fault = rollback_reason::invalid_oath;
                break;
            }
            if (!verdict.truthful) {
                account_id sink = blackhole_account();
                // slashing writes the burn address, so the claim must have
                // declared it; otherwise eager and closure-based execution
                // could disagree
                if (tx.effective_writes().count(state_key::balance(sink)) == 0) {
                    fault = rollback_reason::undeclared_access;
                    break;
                }
                token_amount stake = st.balance_of(tx.recipient);
                if (stake < verdict.penalty) {
                    // never slash partially: the whole claim rolls back and
                    // the receipt says why
                    fault = rollback_reason::underfunded_slash;
                    break;
                }
                st.set_balance(tx.recipient, stake - verdict.penalty);
                st.set_balance(sink, st.balance_of(sink) + verdict.penalty);
            }
            break;
        }
    }

    if (fault) {
        st.revert_to(work_mark);
        r.status = receipt_status::rolled_back;
        r.reason = *fault;
        if (*fault == rollback_reason::out_of_gas) charged = tx.gas_limit;
    }
    r.gas_used = charged;
    r.fee_charged = scale(tx.gas_price, charged);
    r.refund = reservation - r.fee_charged;
    st.set_balance(tx.sender, st.balance_of(tx.sender) + r.refund);
    r.delta = st.delta_since(0);
    st.forget_journal();
    return r;
}

}  // namespace anh
