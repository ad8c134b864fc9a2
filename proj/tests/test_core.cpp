#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hyperembed/complex.hpp"
#include "hyperembed/gen.hpp"
#include "hyperembed/rng.hpp"
#include "hyperembed/serialize.hpp"
#include "test_util.hpp"

using namespace hyperembed;
using namespace hyperembed::testutil;

TEST_CASE("make_complete counts") {
    auto s = plain(2, 2, 2);
    Complex H = make_complete(s.R, s.g);
    int pair = s.R->copy_of_base({0, 1});
    CHECK(H.count(pair) == 4);
    CHECK(H.count(s.R->copy_of_base({0})) == 2);
    CHECK(H.count(s.R->empty_copy()) == 1);

    auto s3 = plain(3, 3, 5);
    Complex H3 = make_complete(s3.R, s3.g);
    CHECK(H3.count(s3.R->copy_of_base({0, 1, 2})) == 125);
    CHECK(validate(H3).ok());
}

TEST_CASE("multicomplex with two copies of a pair") {
    std::vector<IndexComplex::Copy> copies = {{{}}, {{0}}, {{1}}, {{0, 1}}, {{0, 1}}};
    std::vector<std::vector<int>> sub = {
        {0}, {0, 1}, {0, 2}, {0, 1, 2, 3}, {0, 1, 2, 4}};
    auto R = std::make_shared<IndexComplex>(IndexComplex::multi(copies, sub));
    CHECK_FALSE(R->is_plain());
    auto g = std::make_shared<Ground>(Ground::uniform(*R, 2));
    Complex H = make_complete(R, g);
    CHECK(H.count(3) == 4);
    CHECK(H.count(4) == 4);
    CHECK(H.part(3) == H.part(4)); // same tuples, stored per copy
    CHECK(validate(H).ok());
}

TEST_CASE("validate flags closure violations") {
    auto s = plain(3, 3, 3);
    // pair {v0,v1} present with v0 missing from its singleton part
    Complex H = make_trivial(s.R, s.g);
    for (int c : s.R->singleton_copies()) H.define(c);
    int c01 = s.R->copy_of_base({0, 1});
    H.define(c01);
    H.mutable_part(c01).set(H.shape(c01).rank({0, 1}));
    H.mutable_part(s.R->copy_of_base({1})).set(1);
    auto rep = validate(H);
    CHECK_FALSE(rep.ok());

    // triple part defined while a pair part is undefined
    Complex H2 = make_trivial(s.R, s.g);
    for (int c : s.R->singleton_copies()) H2.define_full(c);
    int c012 = s.R->copy_of_base({0, 1, 2});
    H2.define(c012);
    auto rep2 = validate(H2);
    CHECK_FALSE(rep2.ok());
    bool undef_closure = false;
    for (auto& v : rep2.violations)
        if (v.what.find("undefined-closure") != std::string::npos) undef_closure = true;
    CHECK(undef_closure);
}

TEST_CASE("eg1 target complex is valid") {
    auto s = plain(4, 3, 3);
    Complex H = eg1_target(s);
    CHECK(validate(H).ok());
    int c012 = s.R->copy_of_base({0, 1, 2});
    CHECK(H.part(c012).test(H.shape(c012).rank({0, 0, 0})));
    CHECK(H.part(c012).test(H.shape(c012).rank({1, 1, 0})));
    CHECK_FALSE(H.part(c012).test(H.shape(c012).rank({1, 1, 1})));
}

TEST_CASE("restriction by the empty complex is the identity") {
    Rng rng(11);
    auto s = plain(3, 3, 4);
    Complex H = random_complex(s.R, s.g, rng);
    Complex E = make_trivial(s.R, s.g);
    CHECK(restrict_complex(H, E) == H);
}

TEST_CASE("restriction with undefined singleton behaves like the full part") {
    // 3-partite 2-complex H; G a 1-complex with G_1 undefined, G_2 defined
    auto s = plain(3, 2, 4);
    Rng rng(5);
    Complex H = gen_regular_complex(s.R, s.g, {{2, 0.6}}, 7);
    Complex G(s.R, s.g);
    G.define(s.R->empty_copy());
    G.mutable_part(s.R->empty_copy()).set(0);
    int c1 = s.R->copy_of_base({1});
    G.define(c1);
    for (int o = 0; o < 2; ++o) G.mutable_part(c1).set(o); // half of part 1
    Complex res = restrict_complex(H, G);
    int c0 = s.R->copy_of_base({0});
    CHECK(res.part(c0) == H.part(c0)); // untouched part
    int c01 = s.R->copy_of_base({0, 1});
    long long expect = 0;
    for_all_coords(H.shape(c01), [&](const std::vector<int>& coords) {
        if (H.has(c01, coords) && coords[1] < 2) ++expect;
    });
    CHECK(res.count(c01) == expect);
}

TEST_CASE("restrict equals comprehension oracle on random instances") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        auto s = plain(4, 3, 4);
        Complex H = random_complex(s.R, s.g, rng);
        Complex G = random_subcomplex(H, rng);
        Complex got = restrict_complex(H, G);
        CHECK(got == oracle_restrict(H, G));
        CHECK(validate(got).ok());
    }
}

TEST_CASE("compose: subcomplex case and separate case") {
    Rng rng(3);
    auto s = plain(4, 3, 4);
    for (int it = 0; it < 20; ++it) {
        Complex G = random_complex(s.R, s.g, rng);
        Complex G2 = random_subcomplex(G, rng);
        CHECK(compose(G, G2) == restrict_complex(G, G2));
    }
    // separate complexes: disjoint defined non-empty indices
    Complex A(s.R, s.g), B(s.R, s.g);
    int e = s.R->empty_copy();
    for (Complex* c : {&A, &B}) {
        c->define(e);
        c->mutable_part(e).set(0);
    }
    Rng r2(9);
    A.define_full(s.R->copy_of_base({0}));
    A.define(s.R->copy_of_base({1}));
    A.mutable_part(s.R->copy_of_base({1})).set(0);
    B.define_full(s.R->copy_of_base({2}));
    B.define_full(s.R->copy_of_base({3}));
    Complex comp = compose(A, B);
    CHECK(comp == complex_union(A, B));
}

TEST_CASE("compose is associative on random triples") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed * 7 + 1);
        auto s = plain(4, 3, 4);
        Complex H = random_complex(s.R, s.g, rng);
        Complex G = random_subcomplex(H, rng);
        Complex G2 = random_subcomplex(H, rng);
        Complex G3 = random_subcomplex(H, rng);
        CHECK(compose(compose(G, G2), G3) == compose(G, compose(G2, G3)));
        CHECK(compose(G, G2) == compose(G2, G));
    }
}

TEST_CASE("union and intersection definedness rules") {
    Rng rng(17);
    auto s = plain(3, 2, 4);
    Complex H = random_complex(s.R, s.g, rng);
    CHECK(complex_union(H, H) == H);
    CHECK(complex_intersection(H, H) == H);

    Complex A(s.R, s.g), B(s.R, s.g);
    int e = s.R->empty_copy();
    A.define(e);
    A.mutable_part(e).set(0);
    B.define(e);
    B.mutable_part(e).set(0);
    int c01 = s.R->copy_of_base({0, 1});
    for (int c : s.R->singleton_copies()) {
        A.define_full(c);
        B.define_full(c);
    }
    A.define(c01);
    A.mutable_part(c01).set(0);
    Complex u = complex_union(A, B);
    Complex i = complex_intersection(A, B);
    CHECK(u.defined(c01));
    CHECK(u.part(c01) == A.part(c01));
    CHECK_FALSE(i.defined(c01));

    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng r(seed + 100);
        Complex X = random_complex(s.R, s.g, r);
        Complex Y = random_subcomplex(X, r);
        CHECK(validate(complex_union(X, Y)).ok());
        CHECK(validate(complex_intersection(X, Y)).ok());
    }
}

TEST_CASE("vertex neighborhood of a complete complex is complete") {
    auto s = plain(3, 3, 3);
    Complex H = make_complete(s.R, s.g);
    Complex N = vertex_neighborhood(H, s.R->copy_of_base({0}), 1);
    int c12 = s.R->copy_of_base({1, 2});
    CHECK(N.defined(c12));
    CHECK(N.count(c12) == 9);
    CHECK_FALSE(N.defined(s.R->copy_of_base({0})));
}

TEST_CASE("neighborhood equals comprehension oracle") {
    for (uint64_t seed = 0; seed < 15; ++seed) {
        auto s = plain(3, 3, 4);
        Complex G = gen_regular_complex(s.R, s.g, {{2, 0.7}, {3, 0.6}}, seed);
        int pc = s.R->copy_of_base({0});
        Complex N = vertex_neighborhood(G, pc, 2);
        int c12 = s.R->copy_of_base({1, 2});
        int c012 = s.R->copy_of_base({0, 1, 2});
        for_all_coords(G.shape(c12), [&](const std::vector<int>& coords) {
            bool want = G.has(c012, {2, coords[0], coords[1]});
            CHECK(N.has(c12, coords) == want);
        });
    }
}

TEST_CASE("star sets: triangles, singletons, undefined pair") {
    auto s = plain(3, 3, 4);
    Complex G = gen_regular_complex(s.R, s.g, {{2, 0.6}, {3, 0.5}}, 23);
    int c012 = s.R->copy_of_base({0, 1, 2});
    Bitset star = star_set(G, c012);
    // triangle comprehension
    long long triangles = 0;
    for_all_coords(G.shape(c012), [&](const std::vector<int>& coords) {
        bool t = G.has(s.R->copy_of_base({0, 1}), {coords[0], coords[1]}) &&
                 G.has(s.R->copy_of_base({0, 2}), {coords[0], coords[2]}) &&
                 G.has(s.R->copy_of_base({1, 2}), {coords[1], coords[2]});
        if (t) ++triangles;
        CHECK(star.test(G.shape(c012).rank(coords)) == t);
    });
    CHECK(star.count() == triangles);
    // singleton star = full part
    CHECK(star_set(G, s.R->copy_of_base({0})).count() == 4);
    // undefined pair behaves as complete
    Complex G2(s.R, s.g);
    G2.define(s.R->empty_copy());
    G2.mutable_part(s.R->empty_copy()).set(0);
    for (int c : s.R->singleton_copies()) G2.define_full(c);
    int c02 = s.R->copy_of_base({0, 2}), c12b = s.R->copy_of_base({1, 2});
    G2.define(c02);
    G2.define(c12b);
    G2.mutable_part(c02) |= G.part(c02);
    G2.mutable_part(c12b) |= G.part(c12b);
    Bitset star2 = star_set(G2, c012);
    for_all_coords(G2.shape(c012), [&](const std::vector<int>& coords) {
        bool t = G2.has(c02, {coords[0], coords[2]}) && G2.has(c12b, {coords[1], coords[2]});
        CHECK(star2.test(G2.shape(c012).rank(coords)) == t);
    });
}

TEST_CASE("densities") {
    auto s = plain(3, 2, 5);
    Complex K = make_complete(s.R, s.g);
    for (int c = 0; c < s.R->copy_count(); ++c) {
        auto d = relative_density(K, c);
        CHECK(d.defined);
        CHECK(d.num == d.den);
    }
    // d(H_ij) == d_ij(H) when the singleton parts are full
    Complex G = gen_regular_complex(s.R, s.g, {{2, 0.4}}, 2);
    int c01 = s.R->copy_of_base({0, 1});
    auto rel = relative_density(G, c01);
    auto abs = absolute_density(G, c01);
    CHECK(rel.num == abs.num);
    CHECK(rel.den == abs.den);
    // star set empty => density undefined, never a division
    Complex Z(s.R, s.g);
    Z.define(s.R->empty_copy());
    Z.mutable_part(s.R->empty_copy()).set(0);
    for (int c : s.R->singleton_copies()) Z.define(c); // empty singleton parts
    Z.define(c01);
    CHECK_FALSE(relative_density(Z, c01).defined);
}

TEST_CASE("preplus identities and oracle") {
    auto s = plain(4, 3, 4);
    Complex G = gen_regular_complex(s.R, s.g, {{2, 0.8}, {3, 0.7}}, 31);
    int p0 = s.R->copy_of_base({0});

    // I = ({empty}) leaves G unchanged
    CHECK(preplus(G, p0, 1, {s.R->empty_copy()}) == G);
    CHECK(preplus(G, p0, 1, {}) == G);

    // eg1-style: I = 23<= u 24<= u 34<= makes the 234 part the triangles of
    // the neighbourhood of v
    std::vector<int> I = {s.R->empty_copy()};
    for (std::vector<int> b :
         std::vector<std::vector<int>>{{1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}})
        I.push_back(s.R->copy_of_base(b));
    Complex P = preplus(G, p0, 1, I);
    Complex N = vertex_neighborhood(G, p0, 1);
    int c123 = s.R->copy_of_base({1, 2, 3});
    for_all_coords(G.shape(c123), [&](const std::vector<int>& coords) {
        bool want = G.has(c123, coords) &&
                    N.has(s.R->copy_of_base({1, 2}), {coords[0], coords[1]}) &&
                    N.has(s.R->copy_of_base({1, 3}), {coords[0], coords[2]}) &&
                    N.has(s.R->copy_of_base({2, 3}), {coords[1], coords[2]}) &&
                    N.has(s.R->copy_of_base({1}), {coords[0]}) &&
                    N.has(s.R->copy_of_base({2}), {coords[1]}) &&
                    N.has(s.R->copy_of_base({3}), {coords[2]});
        CHECK(P.has(c123, coords) == want);
    });
    CHECK(validate(P).ok());

    CHECK_THROWS(preplus(G, p0, 99, {}));            // not in ground
    CHECK_THROWS(preplus(G, p0, 1, {c123}));         // not downward closed
}

TEST_CASE("serialization round-trips are bit-exact") {
    for (uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(seed + 50);
        auto s = plain(3, 3, 4);
        Complex H = random_complex(s.R, s.g, rng);
        std::string t = to_text(H);
        Complex back = complex_from_text(t);
        CHECK(back == H);
        CHECK(to_text(back) == t);
        std::string j = to_json(H);
        CHECK(complex_from_json(j) == H);
        CHECK(to_json(complex_from_json(j)) == j);

        MarkedComplex gm = gen_marks(H, 0.3, seed);
        std::string mt = to_text(gm);
        MarkedComplex gback = marked_from_text(mt);
        CHECK(gback.complex == gm.complex);
        CHECK(to_text(gback) == mt);
        MarkedComplex gj = marked_from_json(to_json(gm));
        CHECK(gj.complex == gm.complex);
        CHECK(to_json(gj) == to_json(gm));
    }
}

TEST_CASE("restriction is monotone") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed + 200);
        auto s = plain(4, 3, 4);
        Complex H = random_complex(s.R, s.g, rng);
        Complex G = random_subcomplex(H, rng);
        Complex res = restrict_complex(H, G);
        // enlarge one defined part of G back toward H and re-restrict
        Complex G2 = G;
        for (int c = 0; c < s.R->copy_count(); ++c) {
            if (!G2.defined(c) || !H.defined(c)) continue;
            Bitset grow = star_set(G2, c);
            grow &= H.part(c);
            G2.mutable_part(c) |= grow;
        }
        Complex res2 = restrict_complex(H, G2);
        for (int c = 0; c < s.R->copy_count(); ++c) {
            if (!res.defined(c)) continue;
            CHECK(res.part(c).is_subset_of(res2.part(c)));
        }
    }
}
