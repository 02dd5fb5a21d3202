#include "anh/block.hpp"

#include <cstring>
#include <fstream>

namespace anh {

static const char block_magic[4] = {'A', 'N', 'H', 'B'};
static const uint32_t block_version = 1;

hash32 block::compute_hash() const {
    byte_writer w;
    w.u64(height);
    w.raw(prev_hash);
    w.u32(static_cast<uint32_t>(genesis_alloc.size()));
    for (auto& [account, amount] : genesis_alloc) {
        w.raw(account.id);
        w.u8(static_cast<uint8_t>(account.kind));
        w.u64(amount.units);
    }
    w.u32(static_cast<uint32_t>(txs.size()));
    for (const transaction& tx : txs) w.raw(tx.tx_id);
    return sha256(w.out);
}

byte_vec encode_block(const block& b) {
    byte_writer w;
    w.raw({reinterpret_cast<const uint8_t*>(block_magic), 4});
    w.u32(block_version);
    w.u64(b.height);
    w.raw(b.prev_hash);
    w.u32(static_cast<uint32_t>(b.genesis_alloc.size()));
    for (auto& [account, amount] : b.genesis_alloc) {
        w.raw(account.id);
        w.u8(static_cast<uint8_t>(account.kind));
        w.u64(amount.units);
    }
    w.u32(static_cast<uint32_t>(b.txs.size()));
    for (const transaction& tx : b.txs) encode_tx(w, tx);
    w.raw(b.block_hash);
    return w.out;
}

block decode_block(std::span<const uint8_t> data) {
    byte_reader r(data);
    std::array<uint8_t, 4> magic{};
    r.raw(magic);
    if (std::memcmp(magic.data(), block_magic, 4) != 0)
        throw input_error("not a block file (bad magic)");
    uint32_t version = r.u32();
    if (version != block_version)
        throw input_error("unsupported block file version " + std::to_string(version));

    block b;
    b.height = r.u64();
    r.raw(b.prev_hash);
    uint32_t nalloc = r.u32();
    for (uint32_t i = 0; i < nalloc; i++) {
        account_id account;
        r.raw(account.id);
        uint8_t kind = r.u8();
        if (kind > 2) throw input_error("bad account kind in allocation");
        account.kind = static_cast<account_kind>(kind);
        token_amount amount{r.u64()};
        if (!b.genesis_alloc.emplace(account, amount).second)
            throw input_error("duplicate account in genesis allocations");
    }
    uint32_t ntx = r.u32();
    for (uint32_t i = 0; i < ntx; i++) b.txs.push_back(decode_tx(r));
    r.raw(b.block_hash);
    if (!r.done()) throw input_error("trailing bytes in block file");
    if (b.block_hash != b.compute_hash())
        throw input_error("block hash mismatch at height " + std::to_string(b.height));
    return b;
}

void save_block_file(const block& b, const std::filesystem::path& file) {
    byte_vec data = encode_block(b);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write block file: " + file.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw input_error("short write to block file: " + file.string());
}

block load_block_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw input_error("cannot open block file: " + file.string());
    byte_vec data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_block(data);
}

}  // namespace anh
