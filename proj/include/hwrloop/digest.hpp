#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace hwrloop {

// FNV-1a 64-bit content digest. Not cryptographic; used to detect
// accidental divergence between datasets, checkpoints and runs.
class Digest {
public:
    void update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            hash_ ^= c;
            hash_ *= 1099511628211ULL;
        }
    }

    void update_u64(std::uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        update(std::string_view(buf, 8));
    }

    std::uint64_t value() const { return hash_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_));
        return std::string(buf);
    }

private:
    std::uint64_t hash_ = 14695981039346656037ULL;
};

inline std::string digest_hex(std::string_view bytes) {
    Digest d;
    d.update(bytes);
    return d.hex();
}

} // namespace hwrloop
