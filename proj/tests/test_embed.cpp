#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hyperembed/engine.hpp"
#include "hyperembed/gen.hpp"
#include "hyperembed/oracle.hpp"
#include "test_util.hpp"

using namespace hyperembed;
using namespace hyperembed::testutil;

namespace {

/// Drive the engine step by step, checking FreeState == oracle after every
/// embedding (including marked subsets). Returns steps compared.
int drive_and_compare(const Complex& H, const MarkedComplex& GM, const ColouredSets* gamma,
                      uint64_t seed, int max_steps = 1 << 30) {
    ParamConfig cfg = ParamConfig::defaults(H.R().max_size(), 3, 0.1);
    cfg.c = 0.2;         // the restricted-position runs use a generous fraction
    cfg.count_slack = 5; // keep tiny instances running deep into the embedding
    Engine eng(H, GM, gamma, cfg, seed);
    REQUIRE(eng.select_buffer() == FailStage::None);
    std::string w;
    REQUIRE(eng.init_state(&w) == FailStage::None);
    const HSets& hs = eng.hsets();
    std::vector<char> is_buf(hs.vertex_count(), 0);
    for (int b : eng.buffer()) is_buf[b] = 1;
    Rng pick(seed ^ 0xabcdef);
    int steps = 0;
    while (steps < max_steps) {
        bool any = false;
        for (int v = 0; v < hs.vertex_count(); ++v)
            if (eng.phi()[v] < 0 && !is_buf[v]) any = true;
        if (!any) break;
        int x = eng.select_next();
        REQUIRE(x >= 0);
        auto ok = eng.good_set(x);
        if (ok.empty()) break; // a run failure, not an equivalence failure
        int y = ok[pick.below(ok.size())];
        eng.apply_embedding(x, y);
        ++steps;
        OracleState oracle = oracle_free_sets(hs, GM, gamma, eng.phi());
        for (int s = 0; s < hs.set_count(); ++s) {
            if (eng.materialized_free(s) != oracle.free_sets[s]) {
                CAPTURE(s);
                CAPTURE(steps);
                REQUIRE(eng.materialized_free(s) == oracle.free_sets[s]);
            }
        }
        for (size_t e = 0; e < hs.top_sets().size(); ++e) {
            REQUIRE(eng.unembedded_mask(static_cast<int>(e)) == oracle.unemb_mask[e]);
            if (eng.materialized_mark(static_cast<int>(e)) != oracle.marked[e]) {
                CAPTURE(e);
                CAPTURE(steps);
                REQUIRE(eng.materialized_mark(static_cast<int>(e)) == oracle.marked[e]);
            }
        }
    }
    return steps;
}

} // namespace

TEST_CASE("paper fixture: all free sets after the first embedding") {
    auto s = plain(4, 3, 4);
    Complex H = eg1_target(s);
    Complex G = gen_regular_complex(s.R, s.g, {{2, 0.7}, {3, 0.6}}, 99);
    MarkedComplex GM = gen_marks(G, 0.3, 7);
    ParamConfig cfg = ParamConfig::defaults(3, 3, 0.3);
    cfg.buffer_fraction = 0.01; // no buffer at this size
    Engine eng(H, GM, nullptr, cfg, 5);
    REQUIRE(eng.select_buffer() == FailStage::None);
    REQUIRE(eng.init_state() == FailStage::None);
    const HSets& hs = eng.hsets();
    auto pc = [&](int i) { return s.R->copy_of_base({i}); };
    int x1 = hs.vid(pc(0), 0);
    // v1: any free image of x1
    int v1 = 1;
    REQUIRE(eng.materialized_free(hs.singleton_set(x1)).test(v1));
    eng.apply_embedding(x1, v1);

    Complex N = vertex_neighborhood(G, pc(0), v1);
    auto set_of = [&](std::vector<std::pair<int, int>> verts) {
        std::vector<int> base;
        for (auto& [p, o] : verts) base.push_back(s.R->copy(p).base[0]);
        int c = s.R->copy_of_base(base);
        std::vector<int> coords;
        for (auto& [p, o] : verts) coords.push_back(o);
        int id = hs.find(c, H.shape(c).rank(coords));
        REQUIRE(id >= 0);
        return id;
    };

    // F_{x_i}(1) = G(v1)_i and F_{x_i x_j}(1) = G(v1)_{ij}
    for (int i = 1; i < 4; ++i)
        CHECK(eng.materialized_free(set_of({{pc(i), 0}})) == N.part(pc(i)));
    for (int i = 1; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            int cij = s.R->copy_of_base({i, j});
            CHECK(eng.materialized_free(set_of({{pc(i), 0}, {pc(j), 0}})) == N.part(cij));
        }

    // F_{x2x3x4}(1): triples of G_{234} completing v1 to a full clique
    {
        int c234 = s.R->copy_of_base({1, 2, 3});
        Bitset want(G.shape(c234).total);
        for_all_coords(G.shape(c234), [&](const std::vector<int>& co) {
            if (!G.has(c234, co)) return;
            bool tri = N.has(s.R->copy_of_base({1, 2}), {co[0], co[1]}) &&
                       N.has(s.R->copy_of_base({1, 3}), {co[0], co[2]}) &&
                       N.has(s.R->copy_of_base({2, 3}), {co[1], co[2]}) &&
                       N.has(pc(1), {co[0]}) && N.has(pc(2), {co[1]}) && N.has(pc(3), {co[2]});
            if (tri) want.set(G.shape(c234).rank(co));
        });
        CHECK(eng.materialized_free(set_of({{pc(1), 0}, {pc(2), 0}, {pc(3), 0}})) == want);
    }

    // F_{x'2 x3}(1): pairs of G_{23} whose part-3 vertex neighbours v1
    {
        int c12 = s.R->copy_of_base({1, 2});
        Bitset want(G.shape(c12).total);
        for_all_coords(G.shape(c12), [&](const std::vector<int>& co) {
            if (G.has(c12, co) && N.has(pc(2), {co[1]})) want.set(G.shape(c12).rank(co));
        });
        CHECK(eng.materialized_free(set_of({{pc(1), 1}, {pc(2), 0}})) == want);
    }

    // F_{x'2}(1) = G_2 unaffected
    CHECK(eng.materialized_free(set_of({{pc(1), 1}})) == G.part(pc(1)));

    // F_{x'1 x'2 x3}(1): triples of G_{123} avoiding v1 whose part-3 vertex
    // neighbours v1
    {
        int c012 = s.R->copy_of_base({0, 1, 2});
        Bitset want(G.shape(c012).total);
        for_all_coords(G.shape(c012), [&](const std::vector<int>& co) {
            if (G.has(c012, co) && co[0] != v1 && N.has(pc(2), {co[2]}))
                want.set(G.shape(c012).rank(co));
        });
        CHECK(eng.materialized_free(set_of({{pc(0), 1}, {pc(1), 1}, {pc(2), 0}})) == want);
    }

    // F_{x'1 x'3}(1): pairs of G_{02} avoiding v1
    {
        int c02 = s.R->copy_of_base({0, 2});
        Bitset want(G.shape(c02).total);
        for_all_coords(G.shape(c02), [&](const std::vector<int>& co) {
            if (G.has(c02, co) && co[0] != v1) want.set(G.shape(c02).rank(co));
        });
        CHECK(eng.materialized_free(set_of({{pc(0), 1}, {pc(2), 1}})) == want);
    }

    // marked subsets: M_{x2x3, x1x2x3}(1) = M(v1)_{23}
    {
        int top = set_of({{pc(0), 0}, {pc(1), 0}, {pc(2), 0}});
        int e = -1;
        for (size_t q = 0; q < hs.top_sets().size(); ++q)
            if (hs.top_sets()[q] == top) e = static_cast<int>(q);
        REQUIRE(e >= 0);
        int c012 = s.R->copy_of_base({0, 1, 2});
        int c12 = s.R->copy_of_base({1, 2});
        Bitset want(G.shape(c12).total);
        for_all_coords(G.shape(c12), [&](const std::vector<int>& co) {
            if (GM.marks[c012]->test(G.shape(c012).rank({v1, co[0], co[1]})))
                want.set(G.shape(c12).rank(co));
        });
        CHECK(eng.materialized_mark(e) == want);
        // M_{x2x3x4, x2x3x4}(1) = M n F_{x2x3x4}(1)
        int top234 = set_of({{pc(1), 0}, {pc(2), 0}, {pc(3), 0}});
        int e2 = -1;
        for (size_t q = 0; q < hs.top_sets().size(); ++q)
            if (hs.top_sets()[q] == top234) e2 = static_cast<int>(q);
        Bitset want2 = eng.materialized_free(top234);
        int c123 = s.R->copy_of_base({1, 2, 3});
        want2 &= *GM.marks[c123];
        CHECK(eng.materialized_mark(e2) == want2);
    }
}

TEST_CASE("oracle equivalence over random partial runs") {
    int compared = 0;
    for (uint64_t seed = 0; seed < 4; ++seed) {
        // k = 3 tetrahedron factor with marks
        auto s = plain(4, 3, 7);
        Complex G = gen_regular_complex(s.R, s.g, {{2, 0.85}, {3, 0.7}}, seed * 3 + 1);
        MarkedComplex GM = gen_marks(G, 0.1, seed + 11);
        InstanceSpec spec;
        spec.r = 4;
        spec.k = 3;
        Complex H = gen_target("clique-factor", s.R, s.g, spec, seed);
        compared += drive_and_compare(H, GM, nullptr, seed);
    }
    for (uint64_t seed = 0; seed < 4; ++seed) {
        // k = 2 matching + triangle factor, with restricted positions
        auto s = plain(3, 2, 8);
        Complex G = gen_regular_complex(s.R, s.g, {{2, 0.7}}, seed * 5 + 2);
        MarkedComplex GM = gen_marks(G, 0.0, 0);
        InstanceSpec spec;
        spec.r = 3;
        spec.k = 2;
        Complex H = complex_union(gen_target("matching", s.R, s.g, spec, seed),
                                  gen_target("clique-factor", s.R, s.g, spec, seed + 50));
        auto restr = gen_restrictions(H, G, 0.15, 0.5, seed + 7);
        HSets hs(H);
        ColouredSets gamma = ColouredSets::from_vertex_restrictions(hs, restr);
        compared += drive_and_compare(H, GM, &gamma, seed);
    }
    CHECK(compared > 50);
}

TEST_CASE("embedding a matching into a complete host always succeeds") {
    auto s = plain(2, 2, 6);
    Complex G = make_complete(s.R, s.g);
    MarkedComplex GM(G);
    InstanceSpec spec;
    spec.r = 2;
    spec.k = 2;
    Complex H = gen_target("matching", s.R, s.g, spec, 3);
    ParamConfig cfg = ParamConfig::defaults(2, 1, 0.0);
    auto out = embed(H, GM, nullptr, cfg, 42);
    REQUIRE(out.success);
    CHECK(validate_embedding(H, GM, nullptr, out.phi).ok);
}

TEST_CASE("edgeless target embeds trivially") {
    auto s = plain(3, 2, 5);
    Complex G = make_complete(s.R, s.g);
    MarkedComplex GM(G);
    Complex H = make_trivial(s.R, s.g);
    for (int c : s.R->singleton_copies()) {
        Complex* h = &H;
        h->define_full(c);
    }
    ParamConfig cfg = ParamConfig::defaults(2, 1, 0.0);
    auto out = embed(H, GM, nullptr, cfg, 1);
    REQUIRE(out.success);
    CHECK(out.telemetry.queue_admissions == 0);
}

TEST_CASE("a part of isolated host vertices forces an empty good set") {
    auto s = plain(2, 2, 5);
    Complex G = make_trivial(s.R, s.g);
    for (int c : s.R->singleton_copies()) G.define_full(c);
    G.define(s.R->copy_of_base({0, 1})); // empty pair part
    MarkedComplex GM(G);
    InstanceSpec spec;
    spec.r = 2;
    spec.k = 2;
    Complex H = gen_target("matching", s.R, s.g, spec, 3);
    ParamConfig cfg = ParamConfig::defaults(2, 1, 0.0);
    auto out = embed(H, GM, nullptr, cfg, 9);
    CHECK_FALSE(out.success);
    CHECK(out.stage == FailStage::EmptyGoodSet);
}

TEST_CASE("buffer: distances hold and oversized fractions fail") {
    auto s = plain(3, 2, 30);
    Complex G = make_complete(s.R, s.g);
    MarkedComplex GM(G);
    InstanceSpec spec;
    spec.r = 3;
    spec.k = 2;
    Complex H = complex_union(gen_target("matching", s.R, s.g, spec, 1),
                              gen_target("clique-factor", s.R, s.g, spec, 2));
    ParamConfig cfg = ParamConfig::defaults(2, 3, 0.0);
    cfg.buffer_fraction = 0.05;
    Engine eng(H, GM, nullptr, cfg, 17);
    REQUIRE(eng.select_buffer() == FailStage::None);
    const auto& B = eng.buffer();
    CHECK(B.size() >= 3);
    const HSets& hs = eng.hsets();
    for (size_t a = 0; a < B.size(); ++a)
        for (size_t b = a + 1; b < B.size(); ++b)
            CHECK(hs.distance_capped(B[a], B[b], cfg.buffer_distance) >= cfg.buffer_distance);

    ParamConfig cfg2 = cfg;
    cfg2.buffer_fraction = 0.5;
    Engine eng2(H, GM, nullptr, cfg2, 17);
    std::string w;
    CHECK(eng2.select_buffer(&w) == FailStage::BufferInfeasible);
    CHECK(!w.empty());
}

TEST_CASE("restricted positions: initial free sets obey the floor") {
    auto s = plain(3, 2, 40);
    Complex G = gen_regular_complex(s.R, s.g, {{2, 0.5}}, 23);
    MarkedComplex GM(G);
    InstanceSpec spec;
    spec.r = 3;
    spec.k = 2;
    Complex H = complex_union(gen_target("matching", s.R, s.g, spec, 1),
                              gen_target("clique-factor", s.R, s.g, spec, 2));
    auto restr = gen_restrictions(H, G, 0.05, 0.5, 3);
    REQUIRE(!restr.empty());
    HSets hs(H);
    ColouredSets gamma = ColouredSets::from_vertex_restrictions(hs, restr);
    ParamConfig cfg = ParamConfig::defaults(2, 3, 0.0);
    cfg.c = 0.05;
    Engine eng(H, GM, &gamma, cfg, 5);
    REQUIRE(eng.select_buffer() == FailStage::None);
    std::string w;
    REQUIRE(eng.init_state(&w) == FailStage::None);
    double cp = cfg.c_prime;
    for (int sid = 0; sid < hs.set_count(); ++sid) {
        const auto& hset = hs.set(sid);
        double floor = std::pow(cp, std::pow(2.0, hset.size)) *
                       static_cast<double>(G.count(hset.copy));
        CHECK(static_cast<double>(eng.free_size(sid)) > floor);
    }
    // an embedding run lands every restricted vertex inside its set
    auto out = embed(H, GM, &gamma, cfg, 77);
    if (out.success) {
        for (const auto& vr : restr) {
            int v = hs.vid(vr.part_copy, vr.ord);
            CHECK(vr.allowed.test(out.phi[v]));
        }
    }
}

TEST_CASE("determinism: identical seeds give identical transcripts") {
    auto s = plain(3, 2, 20);
    Complex G = gen_regular_complex(s.R, s.g, {{2, 0.6}}, 4);
    MarkedComplex GM(G);
    InstanceSpec spec;
    spec.r = 3;
    spec.k = 2;
    Complex H = complex_union(gen_target("matching", s.R, s.g, spec, 1),
                              gen_target("clique-factor", s.R, s.g, spec, 2));
    ParamConfig cfg = ParamConfig::defaults(2, 3, 0.0);
    auto o1 = embed(H, GM, nullptr, cfg, 123, true);
    auto o2 = embed(H, GM, nullptr, cfg, 123, true);
    CHECK(o1.success == o2.success);
    CHECK(o1.phi == o2.phi);
    CHECK(transcript_json(o1, cfg, 123) == transcript_json(o2, cfg, 123));
    auto o3 = embed(H, GM, nullptr, cfg, 124, true);
    CHECK(transcript_json(o1, cfg, 123) != transcript_json(o3, cfg, 124));
}
