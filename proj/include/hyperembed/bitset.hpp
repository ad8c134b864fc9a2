#ifndef HYPEREMBED_BITSET_HPP
#define HYPEREMBED_BITSET_HPP

#include <cstdint>
#include <vector>
#include <cassert>

namespace hyperembed {

/// Fixed-size dense bit vector used to store tuple sets.
/// Ranks are mixed-radix encodings of tuples, so slicing a part along one
/// coordinate walks a strided pattern over these bits.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(long long n, bool fill = false) { assign(n, fill); }

    void assign(long long n, bool fill = false) {
        n_ = n;
        words_.assign(static_cast<size_t>((n + 63) / 64), fill ? ~0ull : 0ull);
        if (fill) trim();
    }

    long long size() const { return n_; }

    bool test(long long i) const {
        return (words_[static_cast<size_t>(i >> 6)] >> (i & 63)) & 1ull;
    }
    void set(long long i) { words_[static_cast<size_t>(i >> 6)] |= 1ull << (i & 63); }
    void reset(long long i) { words_[static_cast<size_t>(i >> 6)] &= ~(1ull << (i & 63)); }
    void set(long long i, bool v) { v ? set(i) : reset(i); }

    void clear() { for (auto& w : words_) w = 0; }
    void fill() { for (auto& w : words_) w = ~0ull; trim(); }

    long long count() const {
        long long c = 0;
        for (auto w : words_) c += __builtin_popcountll(w);
        return c;
    }
    bool any() const {
        for (auto w : words_) if (w) return true;
        return false;
    }
    bool none() const { return !any(); }

    /// Index of the first set bit, or -1.
    long long find_first() const { return find_from(0); }

    /// Index of the next set bit strictly after i, or -1.
    long long find_next(long long i) const { return find_from(i + 1); }

    Bitset& operator&=(const Bitset& o) {
        assert(n_ == o.n_);
        for (size_t j = 0; j < words_.size(); ++j) words_[j] &= o.words_[j];
        return *this;
    }
    Bitset& operator|=(const Bitset& o) {
        assert(n_ == o.n_);
        for (size_t j = 0; j < words_.size(); ++j) words_[j] |= o.words_[j];
        return *this;
    }
    /// this := this & ~o
    Bitset& andnot(const Bitset& o) {
        assert(n_ == o.n_);
        for (size_t j = 0; j < words_.size(); ++j) words_[j] &= ~o.words_[j];
        return *this;
    }

    bool operator==(const Bitset& o) const { return n_ == o.n_ && words_ == o.words_; }
    bool operator!=(const Bitset& o) const { return !(*this == o); }

    bool is_subset_of(const Bitset& o) const {
        assert(n_ == o.n_);
        for (size_t j = 0; j < words_.size(); ++j)
            if (words_[j] & ~o.words_[j]) return false;
        return true;
    }

    long long intersection_count(const Bitset& o) const {
        assert(n_ == o.n_);
        long long c = 0;
        for (size_t j = 0; j < words_.size(); ++j)
            c += __builtin_popcountll(words_[j] & o.words_[j]);
        return c;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (long long i = find_first(); i >= 0; i = find_next(i)) fn(i);
    }

    const std::vector<uint64_t>& words() const { return words_; }

private:
    long long find_from(long long i) const {
        if (i >= n_) return -1;
        size_t w = static_cast<size_t>(i >> 6);
        uint64_t cur = words_[w] & (~0ull << (i & 63));
        while (true) {
            if (cur) return static_cast<long long>((w << 6) + __builtin_ctzll(cur));
            if (++w >= words_.size()) return -1;
            cur = words_[w];
        }
    }
    void trim() {
        if (n_ & 63) words_.back() &= (~0ull >> (64 - (n_ & 63)));
    }

    long long n_ = 0;
    std::vector<uint64_t> words_;
};

} // namespace hyperembed

#endif
