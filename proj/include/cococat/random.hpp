#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace cococat {

/// SplitMix64 finalizer; used only to derive well-separated engine seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// A deterministic random stream. Streams derived from the same master seed
/// with different (substream, lane) pairs are statistically independent.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

    RandomStream(std::uint64_t master_seed, std::uint64_t substream, std::uint64_t lane = 0)
        : engine_(mix64(mix64(mix64(master_seed) ^ (substream * 0xd1b54a32d192ed03ULL)) +
                        lane * 0x8cb92ba72f3d8dd7ULL)) {}

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential() { return -std::log(uniform()); }

    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Number of worker threads: COCOCAT_THREADS if set and positive, else the
/// machine's hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("COCOCAT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Splits `n_items` into `n_chunks` contiguous blocks and runs
/// `body(chunk, begin, end)` for each block across worker threads.
/// Each chunk is processed by exactly one thread; results must be written to
/// chunk-indexed storage so reduction order never depends on scheduling.
template <class Body>
void parallel_chunks(std::size_t n_items, std::size_t n_chunks, Body&& body) {
    if (n_chunks == 0) n_chunks = 1;
    if (n_chunks > n_items && n_items > 0) n_chunks = n_items;
    auto bounds = [&](std::size_t c) { return n_items * c / n_chunks; };
    unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(n_chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) body(c, bounds(c), bounds(c + 1));
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < n_chunks; c += workers) body(c, bounds(c), bounds(c + 1));
        });
    }
    for (auto& t : pool) t.join();
}

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Running mean and standard error of i.i.d. observations.
class SampleStats {
public:
    void add(double x) {
        ++n_;
        sum_.add(x);
        sum_sq_.add(x * x);
    }
    std::size_t count() const { return n_; }
    double mean() const { return n_ == 0 ? 0.0 : sum_.value() / static_cast<double>(n_); }
    double variance() const {
        if (n_ < 2) return 0.0;
        double m = mean();
        double v = (sum_sq_.value() - static_cast<double>(n_) * m * m) / static_cast<double>(n_ - 1);
        return v < 0.0 ? 0.0 : v;
    }
    double std_error() const {
        return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
    }

private:
    std::size_t n_ = 0;
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
};

/// Mean and standard error of a vector of per-path values, accumulated in
/// index order.
inline SampleStats stats_of(const std::vector<double>& values) {
    SampleStats s;
    for (double v : values) s.add(v);
    return s;
}

}  // namespace cococat
