#include "hyperembed/complex.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hyperembed {

// ---------------------------------------------------------------------------
// IndexComplex
// ---------------------------------------------------------------------------

IndexComplex IndexComplex::partite(int r, int k) {
    IndexComplex R;
    R.r_ = r;
    // subsets of [r] of size <= k, ordered by (size, lex)
    std::vector<std::vector<int>> bases;
    std::vector<int> cur;
    for (int s = 0; s <= k; ++s) {
        std::function<void(int)> rec = [&](int from) {
            if (static_cast<int>(cur.size()) == s) {
                bases.push_back(cur);
                return;
            }
            for (int i = from; i < r; ++i) {
                cur.push_back(i);
                rec(i + 1);
                cur.pop_back();
            }
        };
        rec(0);
    }
    std::map<std::vector<int>, int> id;
    for (auto& b : bases) {
        id[b] = static_cast<int>(R.copies_.size());
        R.copies_.push_back({b});
    }
    R.sub_.resize(R.copies_.size());
    for (size_t c = 0; c < R.copies_.size(); ++c) {
        const auto& b = R.copies_[c].base;
        int m = static_cast<int>(b.size());
        R.sub_[c].resize(1u << m);
        for (unsigned mask = 0; mask < (1u << m); ++mask) {
            std::vector<int> sb;
            for (int p = 0; p < m; ++p)
                if (mask & (1u << p)) sb.push_back(b[p]);
            R.sub_[c][mask] = id.at(sb);
        }
    }
    R.finish();
    return R;
}

IndexComplex IndexComplex::multi(std::vector<Copy> copies,
                                 std::vector<std::vector<int>> sub) {
    IndexComplex R;
    int r = 0;
    for (auto& c : copies)
        for (int b : c.base) r = std::max(r, b + 1);
    R.r_ = r;
    R.copies_ = std::move(copies);
    R.sub_ = std::move(sub);
    R.finish();
    auto errs = R.validate();
    if (!errs.empty()) throw std::invalid_argument("bad index complex: " + errs.front());
    return R;
}

void IndexComplex::finish() {
    k_ = 0;
    for (auto& c : copies_) k_ = std::max<int>(k_, static_cast<int>(c.base.size()));
    by_size_.assign(k_ + 1, {});
    singletons_.clear();
    empty_copy_ = -1;
    for (int c = 0; c < copy_count(); ++c) {
        by_size_[size(c)].push_back(c);
        if (size(c) == 1) singletons_.push_back(c);
        if (size(c) == 0) empty_copy_ = c;
    }
    supers_.assign(copy_count(), {});
    for (int c = 0; c < copy_count(); ++c)
        for (unsigned mask = 0; mask < sub_[c].size(); ++mask) {
            int j = sub_[c][mask];
            if (j >= 0 && j < copy_count()) supers_[j].push_back(c);
        }
    for (auto& s : supers_) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    std::map<std::vector<int>, int> seen;
    plain_ = true;
    for (int c = 0; c < copy_count(); ++c) {
        if (seen.count(copies_[c].base)) plain_ = false;
        else seen[copies_[c].base] = c;
    }
}

bool IndexComplex::is_subcopy(int j, int c, unsigned* mask) const {
    for (unsigned m = 0; m < sub_[c].size(); ++m)
        if (sub_[c][m] == j) {
            if (mask) *mask = m;
            return true;
        }
    return false;
}

int IndexComplex::copy_of_base(const std::vector<int>& base) const {
    for (int c = 0; c < copy_count(); ++c)
        if (copies_[c].base == base) return c;
    return -1;
}

int IndexComplex::degree() const {
    int d = 0;
    for (auto& s : supers_) d = std::max<int>(d, static_cast<int>(s.size()));
    return d;
}

std::vector<std::string> IndexComplex::validate() const {
    std::vector<std::string> errs;
    auto err = [&](const std::string& s) { errs.push_back(s); };
    int empties = 0;
    for (int c = 0; c < copy_count(); ++c) {
        const auto& b = copies_[c].base;
        if (!std::is_sorted(b.begin(), b.end()) ||
            std::adjacent_find(b.begin(), b.end()) != b.end())
            err("copy " + std::to_string(c) + ": base not sorted/unique");
        for (int i : b)
            if (i < 0 || i >= r_) err("copy " + std::to_string(c) + ": base index out of range");
        if (b.empty()) ++empties;
        int m = static_cast<int>(b.size());
        if (static_cast<int>(sub_[c].size()) != (1 << m)) {
            err("copy " + std::to_string(c) + ": sub table has wrong size");
            continue;
        }
        if (sub_[c][(1u << m) - 1] != c)
            err("copy " + std::to_string(c) + ": not reflexive");
        for (unsigned mask = 0; mask < sub_[c].size(); ++mask) {
            int j = sub_[c][mask];
            if (j < 0 || j >= copy_count()) {
                err("copy " + std::to_string(c) + ": missing sub-copy");
                continue;
            }
            std::vector<int> want;
            for (int p = 0; p < m; ++p)
                if (mask & (1u << p)) want.push_back(b[p]);
            if (copies_[j].base != want)
                err("copy " + std::to_string(c) + ": sub-copy base mismatch at mask " +
                    std::to_string(mask));
            // nested selection must agree (transitivity of the order)
            int mj = static_cast<int>(copies_[j].base.size());
            if (static_cast<int>(sub_[j].size()) == (1 << mj)) {
                std::vector<int> posInC;
                for (int p = 0; p < m; ++p)
                    if (mask & (1u << p)) posInC.push_back(p);
                for (unsigned mask2 = 0; mask2 < sub_[j].size(); ++mask2) {
                    unsigned lifted = 0;
                    for (int q = 0; q < mj; ++q)
                        if (mask2 & (1u << q)) lifted |= 1u << posInC[q];
                    if (sub_[j][mask2] != sub_[c][lifted])
                        err("copies " + std::to_string(c) + "/" + std::to_string(j) +
                            ": inconsistent nested sub-copies");
                }
            }
        }
    }
    if (copy_count() > 0 && empties != 1)
        err("expected exactly one empty copy, found " + std::to_string(empties));
    return errs;
}

bool IndexComplex::copies_same(const IndexComplex& o) const {
    if (copies_.size() != o.copies_.size()) return false;
    for (size_t i = 0; i < copies_.size(); ++i)
        if (copies_[i].base != o.copies_[i].base) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Ground
// ---------------------------------------------------------------------------

Ground::Ground(const IndexComplex& R, std::vector<int> sizes_by_singleton)
    : size_(std::move(sizes_by_singleton)) {
    if (static_cast<int>(size_.size()) != R.copy_count())
        throw std::invalid_argument("ground sizes not aligned with copies");
}

Ground Ground::uniform(const IndexComplex& R, int n) {
    std::vector<int> s(R.copy_count(), -1);
    for (int c : R.singleton_copies()) s[c] = n;
    return Ground(R, std::move(s));
}

Ground Ground::of_sizes(const IndexComplex& R, const std::vector<int>& sizes) {
    if (sizes.size() != R.singleton_copies().size())
        throw std::invalid_argument("one size per singleton copy required");
    std::vector<int> s(R.copy_count(), -1);
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1) throw std::invalid_argument("part sizes must be >= 1");
        s[R.singleton_copies()[i]] = sizes[i];
    }
    return Ground(R, std::move(s));
}

bool Ground::sizes_within(int n, double C) const {
    for (int s : size_)
        if (s >= 0 && (s < n || s > C * n)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Complex basics
// ---------------------------------------------------------------------------

Complex::Complex(std::shared_ptr<const IndexComplex> R,
                 std::shared_ptr<const Ground> ground)
    : R_(std::move(R)), ground_(std::move(ground)) {
    parts_.resize(R_->copy_count());
    shapes_.resize(R_->copy_count());
    for (int c = 0; c < R_->copy_count(); ++c) {
        PartShape sh;
        int m = R_->size(c);
        sh.dims.resize(m);
        for (int p = 0; p < m; ++p) sh.dims[p] = ground_->size(R_->singleton_at(c, p));
        sh.stride.assign(m, 1);
        for (int p = m - 2; p >= 0; --p) sh.stride[p] = sh.stride[p + 1] * sh.dims[p + 1];
        sh.total = 1;
        for (int d : sh.dims) sh.total *= d;
        shapes_[c] = std::move(sh);
    }
}

bool Complex::operator==(const Complex& o) const {
    if (!(R() == o.R()) || ground() != o.ground()) return false;
    for (int c = 0; c < R().copy_count(); ++c) {
        if (defined(c) != o.defined(c)) return false;
        if (defined(c) && part(c) != o.part(c)) return false;
    }
    return true;
}

MarkedComplex::MarkedComplex(Complex g) : complex(std::move(g)) {
    marks.resize(complex.R().copy_count());
}

std::vector<std::string> MarkedComplex::validate() const {
    std::vector<std::string> errs;
    const auto& R = complex.R();
    for (int c = 0; c < R.copy_count(); ++c) {
        if (!marked_defined(c)) continue;
        if (R.size(c) != R.max_size())
            errs.push_back("marks on non-top-level copy " + std::to_string(c));
        else if (!complex.defined(c))
            errs.push_back("marks on undefined part " + std::to_string(c));
        else if (!marks[c]->is_subset_of(complex.part(c)))
            errs.push_back("marks not a subset of edges at copy " + std::to_string(c));
    }
    return errs;
}

// ---------------------------------------------------------------------------
// sub-tuple ranking
// ---------------------------------------------------------------------------

namespace {

struct SubRanker {
    int subcopy;
    // (position in the full tuple, stride in the sub part)
    std::vector<std::pair<int, long long>> pos_stride;

    long long rank(const std::vector<int>& coords) const {
        long long r = 0;
        for (auto& [p, s] : pos_stride) r += coords[p] * s;
        return r;
    }
};

/// One SubRanker per position mask of copy c.
std::vector<SubRanker> sub_rankers(const Complex& H, int c) {
    const auto& R = H.R();
    int m = R.size(c);
    std::vector<SubRanker> out(1u << m);
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        SubRanker sr;
        sr.subcopy = R.subcopy(c, mask);
        const auto& ssh = H.shape(sr.subcopy);
        int q = 0;
        for (int p = 0; p < m; ++p)
            if (mask & (1u << p)) sr.pos_stride.push_back({p, ssh.stride[q++]});
        out[mask] = std::move(sr);
    }
    return out;
}

void require_same_ground(const Complex& a, const Complex& b, const char* op) {
    if (!a.same_ground(b))
        throw std::invalid_argument(std::string(op) + ": ground mismatch");
}

} // namespace

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

Complex make_complete(std::shared_ptr<const IndexComplex> R,
                      std::shared_ptr<const Ground> ground) {
    Complex H(R, ground);
    for (int c = 0; c < H.R().copy_count(); ++c) H.define_full(c);
    return H;
}

Complex make_trivial(std::shared_ptr<const IndexComplex> R,
                     std::shared_ptr<const Ground> ground) {
    Complex H(R, ground);
    int e = H.R().empty_copy();
    H.define(e);
    H.mutable_part(e).set(0);
    return H;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

ValidationReport validate(const Complex& H) {
    ValidationReport rep;
    const auto& R = H.R();
    for (int c = 0; c < R.copy_count(); ++c) {
        if (!H.defined(c)) continue;
        int m = R.size(c);
        bool subs_ok = true;
        for (unsigned mask = 0; mask + 1 < (1u << m); ++mask)
            if (!H.defined(R.subcopy(c, mask))) {
                std::ostringstream os;
                os << "undefined-closure: part " << c << " defined but sub-part "
                   << R.subcopy(c, mask) << " undefined";
                rep.violations.push_back({os.str()});
                subs_ok = false;
            }
        if (!subs_ok || m == 0) continue;
        auto srs = sub_rankers(H, c);
        for_each_tuple(H.part(c), H.shape(c), [&](long long r, const std::vector<int>& coords) {
            for (unsigned mask = 0; mask + 1 < (1u << m); ++mask) {
                const auto& sr = srs[mask];
                if (!H.part(sr.subcopy).test(sr.rank(coords))) {
                    std::ostringstream os;
                    os << "downward closure: tuple " << r << " of part " << c
                       << " misses sub-tuple in part " << sr.subcopy;
                    rep.violations.push_back({os.str()});
                }
            }
        });
    }
    return rep;
}

bool is_subcomplex(const Complex& G, const Complex& H, std::string* why) {
    if (!G.same_ground(H)) {
        if (why) *why = "ground mismatch";
        return false;
    }
    for (int c = 0; c < G.R().copy_count(); ++c)
        if (G.defined(c) && H.defined(c) && !G.part(c).is_subset_of(H.part(c))) {
            if (why) *why = "part " + std::to_string(c) + " not contained";
            return false;
        }
    return true;
}

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

Complex restrict_complex(const Complex& H, const Complex& G) {
    std::string why;
    if (!is_subcomplex(G, H, &why))
        throw std::invalid_argument("restrict: G is not a subcomplex of H (" + why + ")");
    Complex out(H.R_ptr(), H.ground_ptr());
    const auto& R = H.R();
    for (int c = 0; c < R.copy_count(); ++c) {
        if (!H.defined(c)) continue;
        out.define(c);
        auto srs = sub_rankers(H, c);
        // constraints: all masks whose G part is defined
        std::vector<const SubRanker*> active;
        for (auto& sr : srs)
            if (G.defined(sr.subcopy)) active.push_back(&sr);
        auto& bits = out.mutable_part(c);
        for_each_tuple(H.part(c), H.shape(c), [&](long long r, const std::vector<int>& coords) {
            for (auto* sr : active)
                if (!G.part(sr->subcopy).test(sr->rank(coords))) return;
            bits.set(r);
        });
    }
    return out;
}

Complex compose(const Complex& G, const Complex& G2) {
    require_same_ground(G, G2, "compose");
    Complex out(G.R_ptr(), G.ground_ptr());
    const auto& R = G.R();
    for (int c = 0; c < R.copy_count(); ++c) {
        if (!G.defined(c) && !G2.defined(c)) continue;
        out.define(c);
        auto srs = sub_rankers(G, c);
        std::vector<std::pair<const SubRanker*, const Bitset*>> active;
        for (auto& sr : srs) {
            if (G.defined(sr.subcopy)) active.push_back({&sr, &G.part(sr.subcopy)});
            if (G2.defined(sr.subcopy)) active.push_back({&sr, &G2.part(sr.subcopy)});
        }
        auto& bits = out.mutable_part(c);
        const auto& sh = G.shape(c);
        std::vector<int> coords;
        for (long long r = 0; r < sh.total; ++r) {
            sh.decode(r, coords);
            bool ok = true;
            for (auto& [sr, pb] : active)
                if (!pb->test(sr->rank(coords))) { ok = false; break; }
            if (ok) bits.set(r);
        }
    }
    return out;
}

Complex complex_union(const Complex& H, const Complex& H2) {
    require_same_ground(H, H2, "union");
    Complex out(H.R_ptr(), H.ground_ptr());
    for (int c = 0; c < H.R().copy_count(); ++c) {
        if (!H.defined(c) && !H2.defined(c)) continue;
        out.define(c);
        if (H.defined(c)) out.mutable_part(c) |= H.part(c);
        if (H2.defined(c)) out.mutable_part(c) |= H2.part(c);
    }
    return out;
}

Complex complex_intersection(const Complex& H, const Complex& H2) {
    require_same_ground(H, H2, "intersection");
    Complex out(H.R_ptr(), H.ground_ptr());
    for (int c = 0; c < H.R().copy_count(); ++c) {
        if (!H.defined(c) || !H2.defined(c)) continue;
        out.define(c);
        out.mutable_part(c) |= H.part(c);
        out.mutable_part(c) &= H2.part(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// neighbourhoods
// ---------------------------------------------------------------------------

Bitset slice_part(const Complex& H, int c_T, int pos, int ord) {
    const auto& sh = H.shape(c_T);
    int m = static_cast<int>(sh.dims.size());
    unsigned mask = ((1u << m) - 1u) & ~(1u << pos);
    const auto& ssh = H.shape(H.R().subcopy(c_T, mask));
    Bitset out(ssh.total);
    const Bitset& in = H.part(c_T);
    // odometer over the remaining positions, tracking both ranks
    std::vector<int> coords(m, 0);
    coords[pos] = ord;
    long long rf = sh.stride[pos] * ord;
    long long rs = 0;
    while (true) {
        if (in.test(rf)) out.set(rs);
        int p = m - 1, q = static_cast<int>(ssh.dims.size()) - 1;
        bool done = false;
        while (true) {
            if (p == pos) { --p; continue; }
            if (p < 0) { done = true; break; }
            ++coords[p];
            rf += sh.stride[p];
            rs += ssh.stride[q];
            if (coords[p] < sh.dims[p]) break;
            rf -= sh.stride[p] * coords[p];
            rs -= ssh.stride[q] * coords[p];
            coords[p] = 0;
            --p;
            --q;
        }
        if (done) break;
    }
    return out;
}

long long slice_count(const Bitset& bits, const PartShape& sh, int pos, int ord) {
    long long c = 0;
    for_each_rank_fixed(sh, pos, ord, [&](long long r) { c += bits.test(r); });
    return c;
}

Complex vertex_neighborhood(const Complex& H, int part_copy, int ord) {
    const auto& R = H.R();
    if (!R.is_plain())
        throw std::invalid_argument(
            "vertex_neighborhood: ambiguous for multi-copy index complexes; "
            "use neighborhood_part with an explicit super-copy");
    if (!H.defined(part_copy) || !H.part(part_copy).test(ord))
        throw std::invalid_argument("vertex_neighborhood: vertex not in complex");
    int i = R.copy(part_copy).base[0];
    Complex out(H.R_ptr(), H.ground_ptr());
    for (int cj = 0; cj < R.copy_count(); ++cj) {
        const auto& base = R.copy(cj).base;
        if (std::binary_search(base.begin(), base.end(), i)) continue;
        std::vector<int> lifted(base);
        lifted.insert(std::lower_bound(lifted.begin(), lifted.end(), i), i);
        int ct = R.copy_of_base(lifted);
        if (ct < 0 || !H.defined(ct)) continue;
        int pos = static_cast<int>(std::lower_bound(lifted.begin(), lifted.end(), i) -
                                   lifted.begin());
        out.define(cj);
        out.mutable_part(cj) |= slice_part(H, ct, pos, ord);
    }
    return out;
}

std::pair<int, Bitset> neighborhood_part(const Complex& H, int c_T, int part_copy, int ord) {
    const auto& R = H.R();
    int m = R.size(c_T), pos = -1;
    for (int p = 0; p < m; ++p)
        if (R.singleton_at(c_T, p) == part_copy) pos = p;
    if (pos < 0)
        throw std::invalid_argument("neighborhood_part: vertex part not in super-copy");
    if (!H.defined(c_T))
        throw std::invalid_argument("neighborhood_part: super-copy part undefined");
    unsigned mask = ((1u << m) - 1u) & ~(1u << pos);
    return {R.subcopy(c_T, mask), slice_part(H, c_T, pos, ord)};
}

Bitset superstar_part(const Complex& H, int c_T, int part_copy, int ord) {
    const auto& R = H.R();
    const auto& sh = H.shape(c_T);
    int pos = -1;
    for (int p = 0; p < R.size(c_T); ++p)
        if (R.singleton_at(c_T, p) == part_copy) pos = p;
    if (pos < 0) return Bitset(sh.total);
    Bitset out(sh.total);
    for_each_rank_fixed(sh, pos, ord, [&](long long r) {
        if (H.part(c_T).test(r)) out.set(r);
    });
    return out;
}

// ---------------------------------------------------------------------------
// star sets and densities
// ---------------------------------------------------------------------------

Bitset star_set(const Complex& H, int c) {
    const auto& sh = H.shape(c);
    int m = static_cast<int>(sh.dims.size());
    Bitset out(sh.total);
    auto srs = sub_rankers(H, c);
    std::vector<const SubRanker*> active;
    for (unsigned mask = 0; mask + 1 < (1u << m); ++mask)
        if (H.defined(srs[mask].subcopy)) active.push_back(&srs[mask]);
    std::vector<int> coords;
    for (long long r = 0; r < sh.total; ++r) {
        sh.decode(r, coords);
        bool ok = true;
        for (auto* sr : active)
            if (!H.part(sr->subcopy).test(sr->rank(coords))) { ok = false; break; }
        if (ok) out.set(r);
    }
    return out;
}

Density relative_density(const Complex& H, int c) {
    Density d;
    if (!H.defined(c)) return d;
    d.num = H.count(c);
    d.den = star_set(H, c).count();
    d.defined = d.den > 0;
    return d;
}

Density absolute_density(const Complex& H, int c) {
    Density d;
    if (!H.defined(c)) return d;
    d.num = H.count(c);
    d.den = H.shape(c).total;
    d.defined = true;
    return d;
}

// ---------------------------------------------------------------------------
// preplus
// ---------------------------------------------------------------------------

Complex preplus(const Complex& G, int part_copy, int ord, const std::vector<int>& I) {
    const auto& R = G.R();
    if (R.size(part_copy) != 1 || ord < 0 || ord >= G.ground().size(part_copy))
        throw std::invalid_argument("preplus: vertex not in ground");
    // I must be downward closed as a family of copies
    for (int c : I) {
        for (unsigned mask = 0; mask + 1 < (1u << R.size(c)); ++mask) {
            int s = R.subcopy(c, mask);
            if (std::find(I.begin(), I.end(), s) == I.end())
                throw std::invalid_argument("preplus: I is not a valid subcomplex");
        }
    }
    int i = R.copy(part_copy).base[0];
    Complex U(G.R_ptr(), G.ground_ptr());
    for (int c : I) {
        int ct = -1, pos = -1;
        for (int p = 0; p < R.size(c); ++p)
            if (R.singleton_at(c, p) == part_copy) { ct = c; pos = p; }
        if (ct < 0) {
            // lift through the unique super-copy in the plain case
            const auto& base = R.copy(c).base;
            if (std::binary_search(base.begin(), base.end(), i)) continue; // other copy of i
            if (!R.is_plain())
                throw std::invalid_argument("preplus: ambiguous copy context for indexed case");
            std::vector<int> lifted(base);
            lifted.insert(std::lower_bound(lifted.begin(), lifted.end(), i), i);
            ct = R.copy_of_base(lifted);
            if (ct < 0) continue;
            for (int p = 0; p < R.size(ct); ++p)
                if (R.singleton_at(ct, p) == part_copy) pos = p;
        }
        if (!G.defined(ct)) continue;
        unsigned mask = ((1u << R.size(ct)) - 1u) & ~(1u << pos);
        int target = R.subcopy(ct, mask);
        Bitset sl = slice_part(G, ct, pos, ord);
        if (!U.defined(target)) U.define(target);
        U.mutable_part(target) |= sl;
    }
    return restrict_complex(G, U);
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

Complex down_set(const Complex& H, int c) {
    Complex out(H.R_ptr(), H.ground_ptr());
    const auto& R = H.R();
    for (unsigned mask = 0; mask < (1u << R.size(c)); ++mask) {
        int s = R.subcopy(c, mask);
        if (H.defined(s)) {
            out.define(s);
            out.mutable_part(s) |= H.part(s);
        }
    }
    return out;
}

std::vector<std::vector<int>> downward_closed_subfamilies(const IndexComplex& R, int c) {
    int m = R.size(c);
    std::vector<int> subs;
    for (unsigned mask = 0; mask + 1 < (1u << m); ++mask) subs.push_back(R.subcopy(c, mask));
    std::sort(subs.begin(), subs.end());
    subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
    int ns = static_cast<int>(subs.size());
    auto idx = [&](int copy) {
        return static_cast<int>(std::lower_bound(subs.begin(), subs.end(), copy) - subs.begin());
    };
    std::vector<std::vector<int>> out;
    for (unsigned fam = 0; fam < (1u << ns); ++fam) {
        bool closed = true;
        for (int s = 0; s < ns && closed; ++s) {
            if (!(fam & (1u << s))) continue;
            int sc = subs[s];
            for (unsigned mk = 0; mk < (1u << R.size(sc)); ++mk)
                if (!(fam & (1u << idx(R.subcopy(sc, mk))))) { closed = false; break; }
        }
        if (!closed) continue;
        std::vector<int> f;
        for (int s = 0; s < ns; ++s)
            if (fam & (1u << s)) f.push_back(subs[s]);
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace hyperembed
