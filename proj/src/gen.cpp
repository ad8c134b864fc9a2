#include "hyperembed/gen.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "hyperembed/hsets.hpp"

namespace hyperembed {

std::vector<int> InstanceSpec::sizes() const {
    if (part_sizes.empty()) throw std::invalid_argument("spec: part sizes missing");
    if (static_cast<int>(part_sizes.size()) == r) return part_sizes;
    if (part_sizes.size() == 1) return std::vector<int>(r, part_sizes[0]);
    throw std::invalid_argument("spec: one size or one per part");
}

Complex gen_regular_complex(std::shared_ptr<const IndexComplex> Rp,
                            std::shared_ptr<const Ground> ground,
                            const std::map<int, double>& level_density, uint64_t seed) {
    const IndexComplex& R = *Rp;
    Complex H(Rp, ground);
    Rng rng(seed);
    int e = R.empty_copy();
    H.define(e);
    H.mutable_part(e).set(0);
    for (int c : R.singleton_copies()) H.define_full(c);
    for (int level = 2; level <= R.max_size(); ++level) {
        double d = 1.0;
        if (auto it = level_density.find(level); it != level_density.end()) d = it->second;
        for (int c : R.copies_of_size(level)) {
            Bitset candidates = star_set(H, c);
            H.define(c);
            auto& bits = H.mutable_part(c);
            candidates.for_each([&](long long r) {
                if (d >= 1.0 || rng.coin(d)) bits.set(r);
            });
        }
    }
    return H;
}

Complex gen_regular_complex(const InstanceSpec& spec) {
    auto R = std::make_shared<IndexComplex>(IndexComplex::partite(spec.r, spec.k));
    auto g = std::make_shared<Ground>(Ground::of_sizes(*R, spec.sizes()));
    return gen_regular_complex(R, g, spec.level_density, spec.seed);
}

MarkedComplex gen_marks(Complex G, double theta, uint64_t seed) {
    MarkedComplex gm(std::move(G));
    Rng rng(seed);
    const auto& R = gm.complex.R();
    for (int c : R.copies_of_size(R.max_size())) {
        if (!gm.complex.defined(c)) continue;
        gm.marks[c].emplace(gm.complex.shape(c).total);
        if (theta <= 0.0) continue;
        gm.complex.part(c).for_each([&](long long r) {
            if (theta >= 1.0 || rng.coin(theta)) gm.marks[c]->set(r);
        });
    }
    return gm;
}

/// Insert a k-set (as part-copy/ordinal pairs) and its full down-set.
void add_edge_closure(Complex& H, const std::vector<std::pair<int, int>>& verts) {
    const auto& R = H.R();
    std::vector<int> base;
    for (auto& [pc, o] : verts) base.push_back(R.copy(pc).base[0]);
    // positions sorted by base index already (caller keeps parts ordered)
    int c = R.copy_of_base(base);
    if (c < 0) throw std::invalid_argument("gen: no copy for edge base");
    int m = static_cast<int>(verts.size());
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        std::vector<int> coords;
        for (int p = 0; p < m; ++p)
            if (mask & (1u << p)) coords.push_back(verts[p].second);
        int sc = R.subcopy(c, mask);
        H.define(sc);
        H.mutable_part(sc).set(H.shape(sc).rank(coords));
    }
}

namespace {

Complex blank_target(std::shared_ptr<const IndexComplex> R,
                     std::shared_ptr<const Ground> ground) {
    Complex H = make_trivial(R, ground);
    for (int c : R->singleton_copies()) H.define_full(c); // spanning
    return H;
}

} // namespace

Complex gen_target(const std::string& family, std::shared_ptr<const IndexComplex> Rp,
                   std::shared_ptr<const Ground> ground, const InstanceSpec& spec,
                   uint64_t seed, int* leftover) {
    const IndexComplex& R = *Rp;
    if (!R.is_plain()) throw std::invalid_argument("gen_target: plain index complex required");
    int r = R.base_size(), k = R.max_size();
    std::vector<int> n(r);
    for (int i = 0; i < r; ++i)
        n[i] = ground->size(R.copy_of_base({i}));
    Complex H = blank_target(Rp, ground);
    Rng rng(seed);
    int left = 0;
    auto part_copy = [&](int i) { return R.copy_of_base({i}); };

    if (family == "matching") {
        // seeded shuffle per part so the matching is generic, not row-aligned
        std::vector<std::vector<int>> perm(r);
        for (int i = 0; i < r; ++i) {
            perm[i].resize(n[i]);
            for (int o = 0; o < n[i]; ++o) perm[i][o] = o;
            rng.shuffle(perm[i]);
        }
        if (k == r) {
            int rows = *std::min_element(n.begin(), n.end());
            for (int t = 0; t < rows; ++t) {
                std::vector<std::pair<int, int>> vs;
                for (int i = 0; i < r; ++i) vs.push_back({part_copy(i), perm[i][t]});
                add_edge_closure(H, vs);
            }
            for (int i = 0; i < r; ++i) left += n[i] - rows;
        } else if (k == 2) {
            // balanced pairing across part pairs: cycle through pairs
            std::vector<int> next(r, 0);
            int a = 0;
            while (true) {
                int b = (a + 1) % r;
                if (next[a] >= n[a] || next[b] >= n[b]) {
                    bool any = false;
                    for (int i = 0; i < r && !any; ++i)
                        for (int j = i + 1; j < r && !any; ++j)
                            if (next[i] < n[i] && next[j] < n[j]) { a = i; any = true; }
                    if (!any) break;
                    b = -1;
                    for (int j = 0; j < r; ++j)
                        if (j != a && next[j] < n[j]) { b = j; break; }
                    if (b < 0) break;
                }
                int i = std::min(a, b), j = std::max(a, b);
                add_edge_closure(H, {{part_copy(i), perm[i][next[i]]},
                                     {part_copy(j), perm[j][next[j]]}});
                ++next[i];
                ++next[j];
                a = (a + 1) % r;
            }
            for (int i = 0; i < r; ++i) left += n[i] - next[i];
        } else {
            throw std::invalid_argument("matching family needs k=2 or k=r");
        }
    } else if (family == "clique-factor") {
        if (r < k) throw std::invalid_argument("clique-factor needs r >= k");
        int rows = *std::min_element(n.begin(), n.end());
        for (int t = 0; t < rows; ++t) {
            // all k-subsets of the transversal row, with closure
            std::vector<int> idx(r);
            for (int i = 0; i < r; ++i) idx[i] = i;
            std::vector<int> pick(k);
            std::function<void(int, int)> rec = [&](int from, int got) {
                if (got == k) {
                    std::vector<std::pair<int, int>> vs;
                    for (int q = 0; q < k; ++q) vs.push_back({part_copy(pick[q]), t});
                    add_edge_closure(H, vs);
                    return;
                }
                for (int i = from; i < r; ++i) {
                    pick[got] = i;
                    rec(i + 1, got + 1);
                }
            };
            rec(0, 0);
        }
        for (int i = 0; i < r; ++i) left += n[i] - rows;
    } else if (family == "loose-cycle") {
        if (k != 3 || r != 3) throw std::invalid_argument("loose-cycle needs k=r=3");
        // positions 0..2m-1 around a cycle, edges {2t, 2t+1, 2t+2 mod 2m};
        // position p lives in part p mod 3. Needs 2m divisible by 3 and by 2.
        int total = 0;
        for (int i = 0; i < r; ++i) total += n[i];
        int m2 = total - total % 6; // usable positions
        std::vector<int> used(r, 0);
        std::vector<std::pair<int, int>> pos(m2);
        for (int p = 0; p < m2; ++p) {
            int part = p % 3;
            pos[p] = {part_copy(part), used[part]++};
        }
        for (int t = 0; t + 1 < m2; t += 2) {
            std::vector<std::pair<int, int>> vs = {pos[t], pos[t + 1], pos[(t + 2) % m2]};
            std::sort(vs.begin(), vs.end());
            add_edge_closure(H, vs);
        }
        for (int i = 0; i < r; ++i) left += n[i] - used[i];
    } else if (family == "partite-factor") {
        // vertex-disjoint complete-partite copies; family_sizes gives how
        // many vertices of consecutive parts each copy uses
        std::vector<int> fs = spec.family_sizes;
        if (fs.empty()) fs.assign(k, 1);
        if (static_cast<int>(fs.size()) != r)
            throw std::invalid_argument("partite-factor: family_sizes must have r entries");
        std::vector<int> next(r, 0);
        while (true) {
            bool fits = true;
            for (int i = 0; i < r; ++i)
                if (next[i] + fs[i] > n[i]) fits = false;
            if (!fits) break;
            // all transversal k-sets touching k distinct parts
            std::vector<int> pick(k);
            std::function<void(int, int, std::vector<std::pair<int, int>>&)> rec =
                [&](int from, int got, std::vector<std::pair<int, int>>& acc) {
                    if (got == k) {
                        add_edge_closure(H, acc);
                        return;
                    }
                    for (int i = from; i < r; ++i) {
                        for (int q = 0; q < fs[i]; ++q) {
                            acc.push_back({part_copy(i), next[i] + q});
                            rec(i + 1, got + 1, acc);
                            acc.pop_back();
                        }
                    }
                };
            std::vector<std::pair<int, int>> acc;
            rec(0, 0, acc);
            for (int i = 0; i < r; ++i) next[i] += fs[i];
        }
        for (int i = 0; i < r; ++i) left += n[i] - next[i];
    } else if (family == "random-greedy") {
        std::vector<int> deg(HSets(H).vertex_count(), 0);
        std::vector<int> vbase(r, 0);
        for (int i = 1; i < r; ++i) vbase[i] = vbase[i - 1] + n[i - 1];
        long long attempts = 40LL * (vbase[r - 1] + n[r - 1]);
        for (long long a = 0; a < attempts; ++a) {
            // random k distinct parts, one random vertex each
            auto parts = rng.sample(r, k);
            std::sort(parts.begin(), parts.end());
            std::vector<std::pair<int, int>> vs;
            bool ok = true;
            for (int i : parts) {
                int o = static_cast<int>(rng.below(static_cast<uint64_t>(n[i])));
                if (deg[vbase[i] + o] >= spec.degree_bound) { ok = false; break; }
                vs.push_back({part_copy(i), o});
            }
            if (!ok) continue;
            int c = R.copy_of_base(parts);
            if (c < 0) continue;
            std::vector<int> coords;
            for (auto& [pc, o] : vs) coords.push_back(o);
            long long rank = H.shape(c).rank(coords);
            if (H.defined(c) && H.part(c).test(rank)) continue;
            add_edge_closure(H, vs);
            for (size_t q = 0; q < parts.size(); ++q) ++deg[vbase[parts[q]] + vs[q].second];
        }
    } else {
        throw std::invalid_argument("unknown target family: " + family);
    }

    if (leftover) *leftover = left;
    return H;
}

std::vector<VertexRestriction> gen_restrictions(const Complex& H, const Complex& G,
                                                double c, double c_prime, uint64_t seed) {
    std::vector<VertexRestriction> out;
    if (c <= 0.0) return out;
    Rng rng(seed);
    const auto& R = H.R();
    for (int pc : R.singleton_copies()) {
        int nx = H.ground().size(pc);
        int count = static_cast<int>(c * nx);
        if (count == 0) continue;
        auto chosen = rng.sample(nx, count);
        for (int x : chosen) {
            // admissible images: subset of G's part of density > c_prime
            std::vector<int> avail;
            G.part(pc).for_each([&](long long rr) { avail.push_back(static_cast<int>(rr)); });
            int want = static_cast<int>(c_prime * static_cast<double>(avail.size())) + 1;
            want = std::min<int>(want, static_cast<int>(avail.size()));
            rng.shuffle(avail);
            VertexRestriction vr;
            vr.part_copy = pc;
            vr.ord = x;
            vr.allowed.assign(G.shape(pc).total);
            for (int q = 0; q < want; ++q) vr.allowed.set(avail[q]);
            out.push_back(std::move(vr));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// planted packing instances
// ---------------------------------------------------------------------------

long long CellSystem::pair_index(int a, int b, long long rank) const {
    (void)a;
    (void)b;
    return rank;
}

PlantedInstance plant_packing_instance(const PlantSpec& spec) {
    const int parts = 3;
    int a1 = spec.clusters_per_part, n1 = spec.cluster_size;
    int n = a1 * n1;
    Rng rng(spec.seed);

    auto R = std::make_shared<IndexComplex>(IndexComplex::partite(parts, 3));
    auto ground = std::make_shared<Ground>(Ground::uniform(*R, n));

    CellSystem cells;
    cells.parts = parts;
    cells.clusters_per_part = a1;
    cells.cluster_size = n1;
    cells.cells_per_pair = spec.cells_per_pair;
    cells.cluster_of.assign(parts, std::vector<int>(n));
    for (int i = 0; i < parts; ++i)
        for (int o = 0; o < n; ++o) cells.cluster_of[i][o] = o / n1;
    // cell id for every pair tuple, uniform over cells_per_pair
    cells.pair_cell.assign(3, std::vector<int>(static_cast<size_t>(n) * n));
    for (int pi = 0; pi < 3; ++pi)
        for (long long t = 0; t < static_cast<long long>(n) * n; ++t)
            cells.pair_cell[pi][t] =
                spec.cells_per_pair <= 1
                    ? 0
                    : static_cast<int>(rng.below(static_cast<uint64_t>(spec.cells_per_pair)));

    // disjoint triads: cluster j of part 0 with cluster j of parts 1, 2
    // (identity matching is general enough for a planted ground truth),
    // each with a chosen cell per pair
    for (int j = 0; j < a1; ++j) {
        CellSystem::Triad tr;
        for (int i = 0; i < 3; ++i) tr.cl[i] = j;
        for (int pi = 0; pi < 3; ++pi)
            tr.cell[pi] = spec.cells_per_pair <= 1
                              ? 0
                              : static_cast<int>(rng.below(static_cast<uint64_t>(spec.cells_per_pair)));
        cells.planted.push_back(tr);
    }

    // planted complex: full singletons, full pair parts, triples planted on
    // triad-consistent triangles at the cell density
    Complex planted = make_trivial(R, ground);
    for (int c : R->singleton_copies()) planted.define_full(c);
    for (int c : R->copies_of_size(2)) planted.define_full(c);
    int ctop = R->copy_of_base({0, 1, 2});
    planted.define(ctop);
    {
        auto& bits = planted.mutable_part(ctop);
        const auto& sh = planted.shape(ctop);
        for (const auto& tr : cells.planted) {
            for (int o0 = tr.cl[0] * n1; o0 < (tr.cl[0] + 1) * n1; ++o0)
                for (int o1 = tr.cl[1] * n1; o1 < (tr.cl[1] + 1) * n1; ++o1) {
                    if (cells.pair_cell[0][static_cast<long long>(o0) * n + o1] != tr.cell[0])
                        continue;
                    for (int o2 = tr.cl[2] * n1; o2 < (tr.cl[2] + 1) * n1; ++o2) {
                        if (cells.pair_cell[1][static_cast<long long>(o0) * n + o2] != tr.cell[1])
                            continue;
                        if (cells.pair_cell[2][static_cast<long long>(o1) * n + o2] != tr.cell[2])
                            continue;
                        if (spec.cell_density >= 1.0 || rng.coin(spec.cell_density))
                            bits.set(sh.rank({o0, o1, o2}));
                    }
                }
        }
    }

    // noisy 3-graph: flip each planted triple off with prob noise and each
    // non-planted triple on with prob noise
    Complex g0 = planted;
    MarkedComplex gm(planted);
    gm.marks[ctop].emplace(planted.shape(ctop).total);
    if (spec.noise > 0.0) {
        auto& bits = g0.mutable_part(ctop);
        const auto& sh = g0.shape(ctop);
        for (long long t = 0; t < sh.total; ++t) {
            if (!rng.coin(spec.noise)) continue;
            if (bits.test(t)) {
                bits.reset(t);
                gm.marks[ctop]->set(t); // in planted but not in g0: forbidden
            } else {
                bits.set(t);
            }
        }
    }

    PlantedInstance inst;
    inst.g0 = std::move(g0);
    inst.planted = std::move(planted);
    inst.gm = std::move(gm);
    inst.cells = std::move(cells);
    return inst;
}

// ---------------------------------------------------------------------------
// random complexes for property tests
// ---------------------------------------------------------------------------

Complex random_complex(std::shared_ptr<const IndexComplex> Rp,
                       std::shared_ptr<const Ground> ground, Rng& rng, double define_prob) {
    const IndexComplex& R = *Rp;
    Complex H(Rp, ground);
    int e = R.empty_copy();
    H.define(e);
    H.mutable_part(e).set(0);
    // choose which copies are defined, downward closed
    std::vector<char> def(R.copy_count(), 0);
    def[e] = 1;
    for (int level = 1; level <= R.max_size(); ++level)
        for (int c : R.copies_of_size(level)) {
            bool subs_ok = true;
            for (unsigned mask = 0; mask + 1 < (1u << level); ++mask)
                if (!def[R.subcopy(c, mask)]) subs_ok = false;
            def[c] = subs_ok && rng.coin(define_prob);
        }
    for (int level = 1; level <= R.max_size(); ++level)
        for (int c : R.copies_of_size(level)) {
            if (!def[c]) continue;
            double density = 0.3 + 0.7 * rng.unit();
            Bitset candidates = star_set(H, c);
            H.define(c);
            auto& bits = H.mutable_part(c);
            candidates.for_each([&](long long r) {
                if (rng.coin(density)) bits.set(r);
            });
        }
    return H;
}

Complex random_subcomplex(const Complex& H, Rng& rng, double keep_prob,
                          double define_prob) {
    const auto& R = H.R();
    Complex G(H.R_ptr(), H.ground_ptr());
    int e = R.empty_copy();
    G.define(e);
    G.mutable_part(e).set(0);
    std::vector<char> def(R.copy_count(), 0);
    def[e] = 1;
    for (int level = 1; level <= R.max_size(); ++level)
        for (int c : R.copies_of_size(level)) {
            if (!H.defined(c)) continue;
            bool subs_ok = true;
            for (unsigned mask = 0; mask + 1 < (1u << level); ++mask) {
                int s = R.subcopy(c, mask);
                if (H.defined(s) && !def[s]) subs_ok = false;
            }
            def[c] = subs_ok && rng.coin(define_prob);
        }
    for (int level = 1; level <= R.max_size(); ++level)
        for (int c : R.copies_of_size(level)) {
            if (!def[c]) continue;
            G.define(c);
            auto& bits = G.mutable_part(c);
            // keep a sample of H's part, then enforce closure against G
            Bitset star = star_set(G, c);
            H.part(c).for_each([&](long long r) {
                if (rng.coin(keep_prob) && star.test(r)) bits.set(r);
            });
        }
    return G;
}

} // namespace hyperembed
