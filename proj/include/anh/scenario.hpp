#pragma once

#include "anh/accounting.hpp"
#include "anh/attacks.hpp"

namespace anh {

// A declarative end-to-end exercise: genesis funding, blocks of operations
// (transfers, deployments, calls, oath claims, attack floods), then
// observer-side work (queries, payment verifications, audits, floor
// queries). The runner keeps every step deterministic under (name, seed).
struct scenario {
    std::string name;
    uint64_t seed = 0;
    nlohmann::json raw;

    static scenario from_json(nlohmann::json j);
    static scenario load(const std::filesystem::path& file);
};

struct run_options {
    bool oracle_check = true;
    std::optional<uint64_t> seed_override;
    std::optional<std::filesystem::path> gas_table_file;
    std::optional<std::filesystem::path> save_chain_dir;
};

// Exit codes: 0 clean, 1 the lazy path disagreed with the eager oracle,
// 2 an internal invariant broke or the scenario itself is inconsistent.
struct run_outcome {
    nlohmann::ordered_json report;
    int exit_code = 0;

    // post-run artifacts, for the CLI's follow-up commands
    ledger led;
    inverted_index idx;
    std::map<std::string, account_id> names;
    std::map<std::string, tx_locator> labels;
};

run_outcome run_scenario(const scenario& sc, const run_options& opt);

// Token forms shared by scenario files and the CLI. Accounts: a name from
// the scenario, "blackhole", or "@<64 hex chars>". Transactions:
// "label:<l>" or a tx id in hex. Keys: "balance:A", "nonce:A",
// "storage:C:slot".
account_id resolve_account_token(const std::string& tok,
                                 const std::map<std::string, account_id>& names);
hash32 resolve_tx_token(const std::string& tok,
                        const std::map<std::string, tx_locator>& labels);
state_key resolve_key_token(const std::string& tok,
                            const std::map<std::string, account_id>& names);
query resolve_query_json(nlohmann::json q, const std::map<std::string, account_id>& names,
                         const std::map<std::string, tx_locator>& labels);

}  // namespace anh
