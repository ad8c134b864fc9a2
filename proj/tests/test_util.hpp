#ifndef HYPEREMBED_TEST_UTIL_HPP
#define HYPEREMBED_TEST_UTIL_HPP

#include <memory>
#include <vector>

#include "hyperembed/complex.hpp"
#include "hyperembed/gen.hpp"

namespace hyperembed::testutil {

struct Scaffold {
    std::shared_ptr<const IndexComplex> R;
    std::shared_ptr<const Ground> g;
};

inline Scaffold plain(int r, int k, int n) {
    Scaffold s;
    s.R = std::make_shared<IndexComplex>(IndexComplex::partite(r, k));
    s.g = std::make_shared<Ground>(Ground::uniform(*s.R, n));
    return s;
}

inline Scaffold plain_sizes(int r, int k, const std::vector<int>& sizes) {
    Scaffold s;
    s.R = std::make_shared<IndexComplex>(IndexComplex::partite(r, k));
    s.g = std::make_shared<Ground>(Ground::of_sizes(*s.R, sizes));
    return s;
}

/// Iterate every coordinate vector of a part shape.
template <typename Fn>
void for_all_coords(const PartShape& sh, Fn&& fn) {
    std::vector<int> coords(sh.dims.size(), 0);
    while (true) {
        fn(coords);
        int p = static_cast<int>(sh.dims.size()) - 1;
        while (p >= 0 && ++coords[p] == sh.dims[p]) coords[p--] = 0;
        if (p < 0) break;
    }
}

/// Independent set-comprehension restriction oracle: iterates coordinates
/// and tests each sub-tuple explicitly against G via Complex::has.
inline Complex oracle_restrict(const Complex& H, const Complex& G) {
    Complex out(H.R_ptr(), H.ground_ptr());
    const auto& R = H.R();
    for (int c = 0; c < R.copy_count(); ++c) {
        if (!H.defined(c)) continue;
        out.define(c);
        int m = R.size(c);
        for_all_coords(H.shape(c), [&](const std::vector<int>& coords) {
            if (!H.has(c, coords)) return;
            for (unsigned mask = 0; mask < (1u << m); ++mask) {
                int sc = R.subcopy(c, mask);
                if (!G.defined(sc)) continue;
                std::vector<int> sub;
                for (int p = 0; p < m; ++p)
                    if (mask & (1u << p)) sub.push_back(coords[p]);
                if (!G.has(sc, sub)) return;
            }
            out.mutable_part(c).set(H.shape(c).rank(coords));
        });
    }
    return out;
}

/// The tetrahedron-plus-two-edges target used throughout: 4 parts, rows 0
/// and 1 carry the structure, all other vertices isolated. Row 0 spans a
/// full tetrahedron closure; the extra edges are {x'1,x'2,x3} and
/// {x'1,x'3,x'4} with x_i = (part i, ord 0) and x'_i = (part i, ord 1).
inline Complex eg1_target(const Scaffold& s) {
    Complex H = make_trivial(s.R, s.g);
    for (int c : s.R->singleton_copies()) H.define_full(c);
    auto pc = [&](int i) { return s.R->copy_of_base({i}); };
    // tetrahedron: all four triples of row 0
    for (int skip = 0; skip < 4; ++skip) {
        std::vector<std::pair<int, int>> vs;
        for (int i = 0; i < 4; ++i)
            if (i != skip) vs.push_back({pc(i), 0});
        add_edge_closure(H, vs);
    }
    add_edge_closure(H, {{pc(0), 1}, {pc(1), 1}, {pc(2), 0}});
    add_edge_closure(H, {{pc(0), 1}, {pc(2), 1}, {pc(3), 1}});
    return H;
}

} // namespace hyperembed::testutil

#endif
