#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace gridseer {

/// 64-bit FNV-1a. Used for grid/dataset checksums in sidecars and manifests.
class Fnv1a {
public:
    void update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(const void* data, std::size_t n) noexcept {
        update(std::string_view(static_cast<const char*>(data), n));
    }
    std::uint64_t digest() const noexcept { return state_; }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string fnv1a_hex(std::string_view bytes) {
    Fnv1a h;
    h.update(bytes);
    return h.hex();
}

}  // namespace gridseer
