#pragma once

#include <filesystem>
#include <map>

#include "anh/tx.hpp"

namespace anh {

// A sealed chain entry. The hash covers height, parent link, genesis
// allocations and the ordered transaction ids only. Deliberately absent:
// any digest of post-execution state, because sealing never executes.
struct block {
    uint64_t height = 0;
    hash32 prev_hash{};
    std::map<account_id, token_amount> genesis_alloc;  // height 0 only
    std::vector<transaction> txs;
    hash32 block_hash{};

    hash32 compute_hash() const;
};

byte_vec encode_block(const block& b);
block decode_block(std::span<const uint8_t> data);

void save_block_file(const block& b, const std::filesystem::path& file);
block load_block_file(const std::filesystem::path& file);

}  // namespace anh
