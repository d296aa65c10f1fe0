#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace vlnforge {

/// Incremental SHA-256.
class Sha256 {
public:
    Sha256();
    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::array<uint8_t, 32> digest();  // finalizes; do not update afterwards
    std::string hex();                 // finalizes and formats

    static std::string of_string(std::string_view s);
    static std::string of_file(const std::filesystem::path& path);  // throws Error on I/O failure

private:
    void process_block(const uint8_t* block);
    uint32_t state_[8];
    uint64_t bit_count_ = 0;
    uint8_t buffer_[64];
    size_t buffer_len_ = 0;
};

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace vlnforge
