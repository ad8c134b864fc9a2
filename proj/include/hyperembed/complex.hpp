#ifndef HYPEREMBED_COMPLEX_HPP
#define HYPEREMBED_COMPLEX_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hyperembed/bitset.hpp"
#include "hyperembed/index_complex.hpp"

namespace hyperembed {

/// Mixed-radix layout of one part: tuples over the part's singleton grounds
/// are ranked by sum(coord[p] * stride[p]).
struct PartShape {
    std::vector<int> dims;
    std::vector<long long> stride;
    long long total = 1;

    long long rank(const std::vector<int>& coords) const {
        long long r = 0;
        for (size_t p = 0; p < dims.size(); ++p) r += coords[p] * stride[p];
        return r;
    }
    void decode(long long r, std::vector<int>& coords) const {
        coords.resize(dims.size());
        for (size_t p = 0; p < dims.size(); ++p) {
            coords[p] = static_cast<int>(r / stride[p]);
            r %= stride[p];
        }
    }
    int coord(long long r, int p) const {
        return static_cast<int>((r / stride[p]) % dims[p]);
    }
};

/// A complex over a fixed index complex and ground: every copy's part is
/// either Defined (a tuple set) or Undefined. Undefined is a distinct state,
/// never an empty set; the restriction/composition algebra depends on the
/// distinction. Instances are immutable values after construction.
class Complex {
public:
    Complex() = default;
    Complex(std::shared_ptr<const IndexComplex> R, std::shared_ptr<const Ground> ground);

    const IndexComplex& R() const { return *R_; }
    const Ground& ground() const { return *ground_; }
    const std::shared_ptr<const IndexComplex>& R_ptr() const { return R_; }
    const std::shared_ptr<const Ground>& ground_ptr() const { return ground_; }

    bool defined(int c) const { return parts_[c].has_value(); }
    const Bitset& part(int c) const { return *parts_[c]; }
    Bitset& mutable_part(int c) { return *parts_[c]; }
    void define(int c) {
        if (!parts_[c]) parts_[c].emplace(shape(c).total, false);
    }
    void define_full(int c) { parts_[c].emplace(shape(c).total, true); }
    void undefine(int c) { parts_[c].reset(); }

    const PartShape& shape(int c) const { return shapes_[c]; }

    /// Tuple membership by copy and coordinates.
    bool has(int c, const std::vector<int>& coords) const {
        return defined(c) && part(c).test(shape(c).rank(coords));
    }

    long long count(int c) const { return defined(c) ? part(c).count() : 0; }

    bool same_ground(const Complex& o) const {
        return R() == o.R() && ground() == o.ground();
    }

    bool operator==(const Complex& o) const;

private:
    std::shared_ptr<const IndexComplex> R_;
    std::shared_ptr<const Ground> ground_;
    std::vector<std::optional<Bitset>> parts_;
    std::vector<PartShape> shapes_;
};

/// A complex with a forbidden subset of its top-level (size-k) edges.
struct MarkedComplex {
    Complex complex;
    /// marks[c] defined only for copies of size k; always a subset of the
    /// corresponding part.
    std::vector<std::optional<Bitset>> marks;

    explicit MarkedComplex(Complex g);
    MarkedComplex() = default;

    bool marked_defined(int c) const {
        return c < static_cast<int>(marks.size()) && marks[c].has_value();
    }
    long long mark_count(int c) const {
        return marked_defined(c) ? marks[c]->count() : 0;
    }
    std::vector<std::string> validate() const;
};

struct Violation {
    std::string what;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// ---- construction ----

/// Complete complex: every part defined and holding all partite tuples.
Complex make_complete(std::shared_ptr<const IndexComplex> R,
                      std::shared_ptr<const Ground> ground);

/// The empty complex ({emptyset}): only the empty part defined, holding the
/// empty tuple. Restricting by it is the identity.
Complex make_trivial(std::shared_ptr<const IndexComplex> R,
                     std::shared_ptr<const Ground> ground);

// ---- validation ----

/// Checks undefined-closure (defined part => all sub-parts defined),
/// downward closure among defined parts, and presence of the empty tuple
/// under any non-empty part. Partiteness is structural: the mixed-radix
/// representation cannot encode a non-partite tuple.
ValidationReport validate(const Complex& H);

/// G is a subcomplex of H: same ground and G_I subseteq H_I where both are
/// defined.
bool is_subcomplex(const Complex& G, const Complex& H, std::string* why = nullptr);

// ---- algebra ----

/// Restriction H[G]: parts defined as in H; a tuple survives iff each
/// sub-tuple lies in the corresponding G part whenever that part is defined.
/// Pre: G is a subcomplex of H (checked; throws std::invalid_argument).
Complex restrict_complex(const Complex& H, const Complex& G);

/// Composition G*G2 (mutual restriction): part defined when either operand's
/// is; a tuple survives iff every sub-tuple is in-or-undefined on both sides.
Complex compose(const Complex& G, const Complex& G2);

/// Union: parts defined when either side is; pointwise set union.
Complex complex_union(const Complex& H, const Complex& H2);

/// Intersection: parts defined when both sides are; pointwise intersection.
Complex complex_intersection(const Complex& H, const Complex& H2);

// ---- neighbourhoods ----

/// Slice of part c_T fixing the coordinate at position pos to ordinal ord.
/// Returns the tuple set over the sub-copy dropping pos. The tuple being
/// sliced around must exist at the caller's discretion (no membership
/// check here).
Bitset slice_part(const Complex& H, int c_T, int pos, int ord);

/// Count of the slice without materializing it.
long long slice_count(const Bitset& bits, const PartShape& sh, int pos, int ord);

/// Vertex neighbourhood complex H(v) for plain index complexes: part J is
/// defined iff the copy of J+i(v) is defined, and holds all tuples A with
/// A+v in H. Throws for ambiguous (multi-copy) index complexes.
Complex vertex_neighborhood(const Complex& H, int part_copy, int ord);

/// Neighbourhood part with an explicit super-copy resolving the ambiguity
/// of indexed complexes: result lives at the sub-copy of c_T dropping v's
/// position. Pre: v's singleton copy occurs in c_T.
std::pair<int, Bitset> neighborhood_part(const Complex& H, int c_T,
                                         int part_copy, int ord);

/// H^S-style superset slice: tuples of part c_T through the given vertex.
Bitset superstar_part(const Complex& H, int c_T, int part_copy, int ord);

// ---- star sets and densities ----

/// H_I^*: partite tuples of index-copy c all of whose strict sub-tuples lie
/// in the corresponding part when that part is defined.
Bitset star_set(const Complex& H, int c);

struct Density {
    long long num = 0; ///< |H_I|
    long long den = 0; ///< |H_I^*| (relative) or product of part sizes (absolute)
    bool defined = false;
    double value() const { return defined && den > 0 ? double(num) / double(den) : 0.0; }
};

/// d_I(H) = |H_I| / |H_I^*| as an exact ratio. Undefined when the part is
/// undefined or the star set is empty (never divides by zero).
Density relative_density(const Complex& H, int c);

/// d(H_I) = |H_I| / prod |V_i|.
Density absolute_density(const Complex& H, int c);

// ---- preplus ----

/// G^{I_v}: restriction of G to the union of the v-neighbourhood parts
/// indexed by I. Each element of I is a copy id; copies containing v's
/// singleton are sliced at v directly, copies not containing it are lifted
/// through the unique super-copy when the index complex is plain (ambiguous
/// otherwise: throws). I = {} or {empty copy} yields G unchanged.
Complex preplus(const Complex& G, int part_copy, int ord, const std::vector<int>& I);

// ---- helpers used across modules ----

/// Sub-complex keeping only the parts that are sub-copies of c (defined as
/// in H); all other parts undefined.
Complex down_set(const Complex& H, int c);

/// All downward-closed families of sub-copies of c excluding c itself
/// (families of strict sub-copies), each returned as a sorted list of copy
/// ids. Includes the empty family. Intended for small |c|.
std::vector<std::vector<int>> downward_closed_subfamilies(const IndexComplex& R, int c);

/// Enumerate set bits with decoded coordinates.
template <typename Fn>
void for_each_tuple(const Bitset& bits, const PartShape& sh, Fn&& fn) {
    std::vector<int> coords;
    for (long long r = bits.find_first(); r >= 0; r = bits.find_next(r)) {
        sh.decode(r, coords);
        fn(r, coords);
    }
}

/// Iterate over all ranks of sh with the coordinate at position pos fixed.
template <typename Fn>
void for_each_rank_fixed(const PartShape& sh, int pos, int ord, Fn&& fn) {
    int m = static_cast<int>(sh.dims.size());
    std::vector<int> coords(m, 0);
    coords[pos] = ord;
    while (true) {
        fn(sh.rank(coords));
        int p = m - 1;
        while (p >= 0) {
            if (p == pos) { --p; continue; }
            if (++coords[p] < sh.dims[p]) break;
            coords[p] = 0;
            --p;
        }
        if (p < 0) break;
    }
}

} // namespace hyperembed

#endif
