#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace mdlab::rng {

/// One SplitMix64 step; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of worker `worker` derived from the run seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t worker);

/// Per-worker generator. The draws below are written out by hand so that a
/// seed gives the same stream on every standard library.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) from the top 53 bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on {0, ..., n - 1}, unbiased (rejection on the top of the range).
    std::uint64_t below(std::uint64_t n);

    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Worker count: MDLAB_WORKERS if set, else the configured value, else 1.
int resolve_workers(std::optional<int> configured);

/// Samples assigned to worker `w` of `workers` when `total` are requested.
std::uint64_t share(std::uint64_t total, int workers, int w);

/// Runs `body(stream, count)` on `workers` threads, each with its own seeded
/// stream, and concatenates the results in worker order.
template <class T, class Body>
std::vector<T> run_parallel(std::uint64_t seed, int workers, std::uint64_t total, Body body) {
    if (workers < 1) workers = 1;
    std::vector<std::vector<T>> parts(workers);
    auto job = [&](int w) {
        Stream s(stream_seed(seed, static_cast<std::uint64_t>(w)));
        parts[w] = body(s, share(total, workers, w));
    };
    if (workers == 1) {
        job(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (int w = 0; w < workers; ++w) threads.emplace_back(job, w);
        for (auto& t : threads) t.join();
    }
    std::vector<T> out;
    out.reserve(total);
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

}  // namespace mdlab::rng
