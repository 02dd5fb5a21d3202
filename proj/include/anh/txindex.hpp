#pragma once

#include "anh/ledger.hpp"

namespace anh {

struct expense_posting {
    tx_locator at;
    token_amount expense;  // value + fee reservation of the sent transaction
};

// Chain-order index over sealed blocks: which transactions touch a state
// key, what each account has sent, and where a transaction id lives. Built
// from declared intent only, so indexing is as execution-free as sealing.
class inverted_index {
public:
    void index_block(const block& b);
    static inverted_index build(const ledger& l);

    uint64_t blocks_indexed() const { return blocks_indexed_; }

    // Worst-case outflow of everything `account` sent within the bound:
    // each transaction counted at value plus full fee reservation. A pure
    // index scan.
    token_amount total_expenses(const account_id& account, const chain_bound& within) const;

    // Transactions whose effective write set contains `key`, in chain order.
    std::vector<tx_locator> txs_touching(const state_key& key, const chain_bound& within) const;

    std::vector<expense_posting> sent_by(const account_id& account,
                                         const chain_bound& within) const;

    std::optional<tx_locator> locate(const hash32& tx_id) const;

    const std::map<state_key, std::vector<tx_locator>>& key_postings() const {
        return by_key_;
    }

private:
    std::map<account_id, std::vector<expense_posting>> by_sender_;
    std::map<state_key, std::vector<tx_locator>> by_key_;
    std::map<hash32, tx_locator> by_id_;
    uint64_t blocks_indexed_ = 0;
};

}  // namespace anh
