#ifndef HYPEREMBED_INDEX_COMPLEX_HPP
#define HYPEREMBED_INDEX_COMPLEX_HPP

#include <vector>
#include <string>
#include <map>
#include <memory>
#include <stdexcept>
#include <cassert>

namespace hyperembed {

/// The indexing structure of a complex: a multiset of copies of subsets of
/// [r], partially ordered so that every copy of a set has a unique copy of
/// each of its subsets below it. The plain r-partite case has exactly one
/// copy of each subset; multicomplexes may carry several copies per subset.
///
/// Copies are identified by opaque integer ids; copy equality is id
/// equality, never base-set equality.
class IndexComplex {
public:
    struct Copy {
        std::vector<int> base; // sorted base indices in [0, r)
    };

    IndexComplex() = default;

    /// Plain r-partite index complex: one copy of every subset of [r] of
    /// size at most k. Copy ids are ordered by (size, lexicographic base),
    /// so id 0 is the empty copy and ids 1..r are the singletons.
    static IndexComplex partite(int r, int k);

    /// General constructor from explicit copies and an explicit sub-copy
    /// table: sub[c][mask] is the copy id of the unique sub-copy of c whose
    /// base selects the positions in mask. Throws if the table is not a
    /// valid partial order (see validate()).
    static IndexComplex multi(std::vector<Copy> copies,
                              std::vector<std::vector<int>> sub);

    int base_size() const { return r_; }
    int max_size() const { return k_; }
    int copy_count() const { return static_cast<int>(copies_.size()); }
    const Copy& copy(int c) const { return copies_[c]; }
    int size(int c) const { return static_cast<int>(copies_[c].base.size()); }

    /// Unique sub-copy of c selecting the base positions in mask.
    int subcopy(int c, unsigned mask) const { return sub_[c][mask]; }

    /// Singleton sub-copy at position pos of copy c.
    int singleton_at(int c, int pos) const { return sub_[c][1u << pos]; }

    /// True iff j is a sub-copy of c; when true, mask receives the selecting
    /// position mask.
    bool is_subcopy(int j, int c, unsigned* mask = nullptr) const;

    int empty_copy() const { return empty_copy_; }
    const std::vector<int>& singleton_copies() const { return singletons_; }
    const std::vector<int>& copies_of_size(int s) const { return by_size_[s]; }

    /// True when no subset of [r] has more than one copy. Plain complexes
    /// admit the unambiguous vertex-neighbourhood construction.
    bool is_plain() const { return plain_; }

    /// For plain complexes only: the copy with the given base set, or -1.
    int copy_of_base(const std::vector<int>& base) const;

    /// Copies that contain c as a sub-copy (including c itself).
    const std::vector<int>& supercopies(int c) const { return supers_[c]; }

    /// Maximum degree of the index complex: the largest number of copies
    /// lying above any single copy.
    int degree() const;

    /// Structural invariants: reflexivity, unique sub-copies, and
    /// consistency of nested sub-copy selection (which gives transitivity).
    /// Returns human-readable violations; empty means valid.
    std::vector<std::string> validate() const;

    bool operator==(const IndexComplex& o) const {
        return r_ == o.r_ && copies_same(o) && sub_ == o.sub_;
    }

private:
    void finish(); // derived tables + plain detection
    bool copies_same(const IndexComplex& o) const;

    int r_ = 0;
    int k_ = 0;
    std::vector<Copy> copies_;
    std::vector<std::vector<int>> sub_;
    std::vector<std::vector<int>> supers_;
    std::vector<std::vector<int>> by_size_;
    std::vector<int> singletons_;
    int empty_copy_ = -1;
    bool plain_ = false;
};

/// Vertex sets per singleton copy. Vertices are (singleton copy id,
/// ordinal) pairs; distinct copies carry disjoint vertex sets.
class Ground {
public:
    Ground() = default;
    Ground(const IndexComplex& R, std::vector<int> sizes_by_singleton);

    static Ground uniform(const IndexComplex& R, int n);

    /// sizes given in the order of R.singleton_copies()
    static Ground of_sizes(const IndexComplex& R, const std::vector<int>& sizes);

    int size(int singleton_copy) const { return size_[singleton_copy]; }
    const std::vector<int>& sizes_by_copy() const { return size_; }

    /// Checks n <= |V_i| <= C*n for all parts.
    bool sizes_within(int n, double C) const;

    bool operator==(const Ground& o) const { return size_ == o.size_; }
    bool operator!=(const Ground& o) const { return !(*this == o); }

private:
    std::vector<int> size_; // indexed by copy id; -1 for non-singletons
};

} // namespace hyperembed

#endif
