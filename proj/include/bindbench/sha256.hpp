#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace bindbench {

// Streaming SHA-256 (FIPS 180-4). Used for cache keys; no crypto library
// dependency wanted for a 60-line primitive.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::array<std::uint8_t, 32> finish();

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t h_[8];
    std::uint8_t buffer_[64];
    std::size_t buffered_ = 0;
    std::uint64_t total_ = 0;
};

// One-shot convenience: lowercase hex digest.
std::string sha256_hex(std::string_view data);

} // namespace bindbench
