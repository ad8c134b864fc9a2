#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hyperembed/gen.hpp"
#include "hyperembed/regularity.hpp"
#include "test_util.hpp"

using namespace hyperembed;
using namespace hyperembed::testutil;

TEST_CASE("hom density: complete hosts and triangle counting") {
    auto s = plain(3, 2, 7);
    Complex G = make_complete(s.R, s.g);
    auto sj = plain(3, 2, 1);
    Complex J = make_complete(sj.R, sj.g); // a triangle with one vertex per part
    CHECK(hom_density(J, G) == doctest::Approx(1.0));

    Complex G2 = gen_regular_complex(s.R, s.g, {{2, 0.5}}, 5);
    double d = hom_density(J, G2);
    auto tri = triangle_check(G2, 0, 1, 2);
    CHECK(d * 7.0 * 7.0 * 7.0 == doctest::Approx(static_cast<double>(tri.count)));
}

TEST_CASE("hom density factorizes over disconnected pieces") {
    auto s = plain(4, 2, 6);
    Complex G = gen_regular_complex(s.R, s.g, {{2, 0.6}}, 9);
    // J = edge {0,1} plus edge {2,3}: density is the product of the two
    auto sj = plain(4, 2, 1);
    Complex J = make_trivial(sj.R, sj.g);
    for (int c : sj.R->singleton_copies()) J.define_full(c);
    add_edge_closure(J, {{sj.R->copy_of_base({0}), 0}, {sj.R->copy_of_base({1}), 0}});
    add_edge_closure(J, {{sj.R->copy_of_base({2}), 0}, {sj.R->copy_of_base({3}), 0}});
    Complex J01 = make_trivial(sj.R, sj.g);
    for (int c : sj.R->singleton_copies()) J01.define_full(c);
    add_edge_closure(J01, {{sj.R->copy_of_base({0}), 0}, {sj.R->copy_of_base({1}), 0}});
    Complex J23 = make_trivial(sj.R, sj.g);
    for (int c : sj.R->singleton_copies()) J23.define_full(c);
    add_edge_closure(J23, {{sj.R->copy_of_base({2}), 0}, {sj.R->copy_of_base({3}), 0}});
    CHECK(hom_density(J, G) ==
          doctest::Approx(hom_density(J01, G) * hom_density(J23, G)));
}

TEST_CASE("triangle check basics") {
    auto s = plain(3, 2, 10);
    Complex K = make_complete(s.R, s.g);
    auto t = triangle_check(K, 0, 1, 2);
    CHECK(t.count == 1000);
    CHECK(t.deviation == doctest::Approx(0.0));

    Complex Z = make_trivial(s.R, s.g);
    for (int c : s.R->singleton_copies()) Z.define_full(c);
    for (int c : s.R->copies_of_size(2)) Z.define(c);
    Z.mutable_part(s.R->copy_of_base({0, 2})).fill();
    Z.mutable_part(s.R->copy_of_base({1, 2})).fill();
    auto t0 = triangle_check(Z, 0, 1, 2); // G_{01} empty
    CHECK(t0.count == 0);
    CHECK(t0.predicted == doctest::Approx(0.0));
}

TEST_CASE("triangle deviation is small on random instances") {
    int pass = 0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        auto s = plain(3, 2, 60);
        Complex G = gen_regular_complex(s.R, s.g, {{2, 0.5}}, seed);
        if (triangle_check(G, 0, 1, 2).deviation <= 0.05) ++pass;
    }
    CHECK(pass >= 9);
}

TEST_CASE("exact regularity deviation equals a brute-force search") {
    auto s = plain(2, 2, 6);
    Complex G = gen_regular_complex(s.R, s.g, {{2, 0.5}}, 3);
    int c01 = s.R->copy_of_base({0, 1});
    DeviationOptions opt;
    opt.exact = true;
    opt.min_frac = 0.2;
    auto rep = regularity_deviation(G, c01, opt);
    // independent triple-loop maximization
    double dbase = absolute_density(G, c01).value();
    double best = 0.0;
    for (unsigned mi = 1; mi < 64; ++mi)
        for (unsigned mj = 1; mj < 64; ++mj) {
            int pi = __builtin_popcount(mi), pj = __builtin_popcount(mj);
            if (pi * pj < 0.2 * 36) continue;
            int edges = 0;
            for (int a = 0; a < 6; ++a)
                for (int b = 0; b < 6; ++b)
                    if ((mi >> a & 1) && (mj >> b & 1) && G.has(c01, {a, b})) ++edges;
            best = std::max(best, std::abs(double(edges) / (pi * pj) - dbase));
        }
    CHECK(rep.deviation == doctest::Approx(best));
    CHECK(rep.method == RegularityReport::Method::Exact);

    // monotone non-increasing in min_frac
    DeviationOptions o2 = opt;
    o2.min_frac = 0.5;
    CHECK(regularity_deviation(G, c01, o2).deviation <= rep.deviation + 1e-12);
}

TEST_CASE("block-diagonal bipartite graph is exposed as irregular") {
    auto s = plain(2, 2, 8);
    Complex G = make_trivial(s.R, s.g);
    for (int c : s.R->singleton_copies()) G.define_full(c);
    int c01 = s.R->copy_of_base({0, 1});
    G.define(c01);
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
            if ((a < 4) == (b < 4)) G.mutable_part(c01).set(G.shape(c01).rank({a, b}));
    DeviationOptions opt;
    opt.exact = true;
    opt.min_frac = 0.1;
    auto rep = regularity_deviation(G, c01, opt);
    CHECK(rep.deviation >= 0.5 - 1e-12);
    // the sampled estimator also finds a large deviation (lower bound)
    DeviationOptions so;
    so.samples = 400;
    so.seed = 5;
    auto srep = regularity_deviation(G, c01, so);
    CHECK(srep.lower_bound_only);
    CHECK(srep.deviation >= 0.2);
    CHECK(srep.deviation <= rep.deviation + 1e-12);
}

TEST_CASE("complete parts have zero deviation in any mode") {
    auto s = plain(3, 3, 6);
    Complex K = make_complete(s.R, s.g);
    DeviationOptions opt;
    opt.samples = 60;
    for (int c : s.R->copies_of_size(3))
        CHECK(regularity_deviation(K, c, opt).deviation == doctest::Approx(0.0));
    DeviationOptions ex;
    ex.exact = true;
    CHECK(regularity_deviation(K, s.R->copy_of_base({0, 1}), ex).deviation ==
          doctest::Approx(0.0));
}

TEST_CASE("typical degrees: complete clean, isolated vertex flagged") {
    auto s = plain(2, 2, 30);
    Complex K = make_complete(s.R, s.g);
    auto rep = typical_degree_report(K, s.R->copy_of_base({0}), s.R->copy_of_base({0, 1}),
                                     0.01);
    CHECK(rep.atypical.empty());

    auto s2 = plain(2, 2, 400);
    Complex G = gen_regular_complex(s2.R, s2.g, {{2, 0.5}}, 8);
    int c01 = s2.R->copy_of_base({0, 1});
    // isolate vertex 0 of part 0
    for (int b = 0; b < 400; ++b) {
        long long r = G.shape(c01).rank({0, b});
        if (G.part(c01).test(r)) G.mutable_part(c01).reset(r);
    }
    auto rep2 =
        typical_degree_report(G, s2.R->copy_of_base({0}), c01, 0.1);
    REQUIRE(rep2.atypical.size() == 1);
    CHECK(rep2.atypical[0] == 0);
}

TEST_CASE("neighbourhood extension counts") {
    auto s = plain(4, 3, 20);
    Complex K = make_complete(s.R, s.g);
    int cA = s.R->copy_of_base({0, 1, 2});
    int t = s.R->copy_of_base({3});
    // I = empty family: every extension count is exactly |V_4|
    auto chk = neighborhood_count_check(K, cA, {}, t, 0.001, 50, 1);
    CHECK(chk.bad_fraction == doctest::Approx(0.0));
    CHECK(chk.predicted == doctest::Approx(20.0));

    // deviation bands below integer granularity are meaningless, so the
    // statistical check runs at a scale where the predicted count is large
    auto s2 = plain(3, 2, 200);
    Complex G = gen_regular_complex(s2.R, s2.g, {{2, 0.7}}, 21);
    std::vector<int> I = {s2.R->copy_of_base({0}), s2.R->copy_of_base({1})};
    auto chk2 = neighborhood_count_check(G, s2.R->copy_of_base({0, 1}), I,
                                         s2.R->copy_of_base({2}), 0.2, 120, 3);
    CHECK(chk2.predicted > 80.0);
    CHECK(chk2.bad_fraction <= 0.05);
}
