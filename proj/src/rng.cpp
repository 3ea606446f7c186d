#include "mdlab/rng.hpp"

#include <cstdlib>
#include <string>

#include "mdlab/errors.hpp"

namespace mdlab::rng {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t worker) {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = a ^ (worker * 0xd1b54a32d192ed03ULL);
    splitmix64(t);
    return splitmix64(t);
}

std::uint64_t Stream::below(std::uint64_t n) {
    if (n == 0) throw DomainError("Stream::below: n must be positive");
    // Reject the final partial block so every residue is equally likely.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v > limit);
    return v % n;
}

int resolve_workers(std::optional<int> configured) {
    if (const char* env = std::getenv("MDLAB_WORKERS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 1024) {
            throw DomainError(std::string("MDLAB_WORKERS must be an integer in [1, 1024], got '") +
                              env + "'");
        }
        return static_cast<int>(v);
    }
    if (configured) {
        if (*configured < 1) throw DomainError("workers must be >= 1");
        return *configured;
    }
    return 1;
}

std::uint64_t share(std::uint64_t total, int workers, int w) {
    // floor(total * w / W) without overflow: total = q W + r.
    const auto W = static_cast<std::uint64_t>(workers);
    const std::uint64_t q = total / W;
    const std::uint64_t r = total % W;
    auto prefix = [&](std::uint64_t k) { return q * k + r * k / W; };
    return prefix(static_cast<std::uint64_t>(w) + 1) - prefix(static_cast<std::uint64_t>(w));
}

}  // namespace mdlab::rng
