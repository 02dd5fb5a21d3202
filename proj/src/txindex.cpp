#include "anh/txindex.hpp"

#include <algorithm>

namespace anh {

void inverted_index::index_block(const block& b) {
    if (b.height != blocks_indexed_)
        throw internal_error("index expected block " + std::to_string(blocks_indexed_) +
                             ", got " + std::to_string(b.height));
    for (uint64_t o = 0; o < b.txs.size(); o++) {
        const transaction& tx = b.txs[o];
        tx_locator at{b.height, o, tx.tx_id};
        by_sender_[tx.sender].push_back({at, tx.expense()});
        for (const state_key& k : tx.effective_writes()) by_key_[k].push_back(at);
        by_id_.emplace(tx.tx_id, at);
    }
    blocks_indexed_ += 1;
}

inverted_index inverted_index::build(const ledger& l) {
    inverted_index idx;
    for (const block& b : l.blocks()) idx.index_block(b);
    return idx;
}

token_amount inverted_index::total_expenses(const account_id& account,
                                            const chain_bound& within) const {
    token_amount total;
    auto it = by_sender_.find(account);
    if (it == by_sender_.end()) return total;
    for (const expense_posting& p : it->second) {
        if (!within.admits(p.at)) break;  // postings are in chain order
        total += p.expense;
    }
    return total;
}

std::vector<tx_locator> inverted_index::txs_touching(const state_key& key,
                                                     const chain_bound& within) const {
    std::vector<tx_locator> out;
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return out;
    for (const tx_locator& at : it->second) {
        if (!within.admits(at)) break;
        out.push_back(at);
    }
    return out;
}

std::vector<expense_posting> inverted_index::sent_by(const account_id& account,
                                                     const chain_bound& within) const {
    std::vector<expense_posting> out;
    auto it = by_sender_.find(account);
    if (it == by_sender_.end()) return out;
    for (const expense_posting& p : it->second) {
        if (!within.admits(p.at)) break;
        out.push_back(p);
    }
    return out;
}

std::optional<tx_locator> inverted_index::locate(const hash32& tx_id) const {
    auto it = by_id_.find(tx_id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

}  // namespace anh
