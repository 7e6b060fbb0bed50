#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace annocheck {

// Hex-encoded SHA-256 digest (lowercase). Backed by OpenSSL's EVP interface.
std::string sha256_hex(std::string_view data);

// SHA-256 of a file's raw bytes. Throws DataError if the file cannot be read.
std::string sha256_file_hex(const std::string& path);

constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Minimal deterministic PRNG. The standard distributions are implementation
// defined, so seeded shuffles that must reproduce bit-for-bit across
// toolchains go through this instead of <random>.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw from [0, n) by rejection.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[bounded(i)]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace annocheck
