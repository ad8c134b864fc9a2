#ifndef HYPEREMBED_RNG_HPP
#define HYPEREMBED_RNG_HPP

#include <cstdint>
#include <vector>
#include <algorithm>

namespace hyperembed {

/// Deterministic 64-bit generator (splitmix64). Hand-rolled so that seeded
/// runs produce byte-identical output on every platform; std distributions
/// are implementation-defined and would break that.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n) without modulo bias.
    uint64_t below(uint64_t n) {
        if (n <= 1) return 0;
        uint64_t limit = ~0ull - (~0ull % n) - 1;
        uint64_t v;
        do { v = next(); } while (v > limit);
        return v % n;
    }

    /// Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool coin(double p) { return unit() < p; }

    /// Independent child stream; stable under changes elsewhere in the run.
    Rng fork(uint64_t stream) {
        Rng r(state_ ^ (0x9e3779b97f4a7c15ull * (stream + 0x632be59bd9b4e019ull)));
        r.next();
        return r;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    /// k distinct values out of [0, n), in random order.
    std::vector<int> sample(int n, int k) {
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        for (int i = 0; i < k && i < n; ++i)
            std::swap(idx[i], idx[i + static_cast<int>(below(static_cast<uint64_t>(n - i)))]);
        idx.resize(std::min(n, k));
        return idx;
    }

private:
    uint64_t state_;
};

} // namespace hyperembed

#endif
