#include "hyperembed/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace hyperembed {

namespace {

/// G[Gamma] membership bits for every H-set.
std::vector<Bitset> restricted_host(const HSets& hs, const Complex& G,
                                    const ColouredSets* gamma) {
    std::vector<Bitset> out(hs.set_count());
    for (int s = 0; s < hs.set_count(); ++s) {
        const auto& hset = hs.set(s);
        Bitset bits = G.part(hset.copy);
        if (gamma) {
            const auto& sh = G.shape(hset.copy);
            std::vector<int> coords;
            for (unsigned mask = 1; mask < (1u << hset.size); ++mask) {
                int sub = hs.subset(s, mask);
                if (sub < 0 || sub >= static_cast<int>(gamma->by_set.size()) ||
                    !gamma->by_set[sub])
                    continue;
                const auto& ssh = G.shape(hs.set(sub).copy);
                std::vector<int> pos;
                for (int p = 0; p < hset.size; ++p)
                    if (mask & (1u << p)) pos.push_back(p);
                std::vector<long long> drop;
                bits.for_each([&](long long r) {
                    sh.decode(r, coords);
                    long long rr = 0;
                    for (size_t q = 0; q < pos.size(); ++q)
                        rr += coords[pos[q]] * ssh.stride[q];
                    if (!gamma->by_set[sub]->test(rr)) drop.push_back(r);
                });
                for (long long r : drop) bits.reset(r);
            }
        }
        out[s] = std::move(bits);
    }
    return out;
}

} // namespace

OracleState oracle_free_sets(const HSets& hs, const MarkedComplex& GM,
                             const ColouredSets* gamma, const std::vector<int>& phi) {
    const Complex& G = GM.complex;
    const Complex& H = hs.H();
    const auto& R = H.R();
    if (static_cast<int>(phi.size()) != hs.vertex_count())
        throw std::invalid_argument("oracle: phi arity mismatch");

    // validity of the partial embedding
    std::vector<std::vector<char>> used(R.copy_count());
    for (int pc : R.singleton_copies()) used[pc].assign(G.ground().size(pc), 0);
    for (int v = 0; v < hs.vertex_count(); ++v) {
        if (phi[v] < 0) continue;
        int pc = hs.part_of(v);
        if (phi[v] >= G.ground().size(pc) || used[pc][phi[v]])
            throw std::invalid_argument("oracle: phi not a partite injection");
        used[pc][phi[v]] = 1;
    }
    std::vector<Bitset> host = restricted_host(hs, G, gamma);
    std::vector<int> coords;
    for (int s = 0; s < hs.set_count(); ++s) {
        const auto& hset = hs.set(s);
        bool all = true;
        for (int v : hset.verts) all = all && phi[v] >= 0;
        if (!all) continue;
        coords.clear();
        for (int v : hset.verts) coords.push_back(phi[v]);
        if (!host[s].test(G.shape(hset.copy).rank(coords)))
            throw std::invalid_argument("oracle: phi maps a target set outside the host");
    }

    // per H-set constraint lists: edges E over a sub-tuple with everything
    // else embedded pin additional coordinates
    struct Constraint {
        int e_id;
        int e_copy;
        std::vector<int> fill;      ///< full coords template for E, -1 where free
        std::vector<int> from_pos;  ///< position in the queried sub-tuple per free slot
    };
    // indexed by H-set id of the sub-tuple
    std::vector<std::vector<Constraint>> constraints(hs.set_count());
    for (int sp = 0; sp < hs.set_count(); ++sp) {
        const auto& sub = hs.set(sp);
        auto consider = [&](int e) {
            const auto& eset = hs.set(e);
            std::vector<char> in_sub(eset.size, 0);
            for (int p = 0; p < eset.size; ++p) {
                int w = eset.verts[p];
                for (int q = 0; q < sub.size; ++q)
                    if (sub.verts[q] == w) in_sub[p] = 1;
            }
            Constraint con;
            con.e_id = e;
            con.e_copy = eset.copy;
            con.fill.assign(eset.size, -1);
            con.from_pos.assign(eset.size, -1);
            for (int p = 0; p < eset.size; ++p) {
                if (in_sub[p]) {
                    for (int q = 0; q < sub.size; ++q)
                        if (sub.verts[q] == eset.verts[p]) con.from_pos[p] = q;
                } else {
                    if (phi[eset.verts[p]] < 0) return; // remainder not embedded
                    con.fill[p] = phi[eset.verts[p]];
                }
            }
            bool proper = false;
            for (int p = 0; p < eset.size; ++p)
                if (con.fill[p] >= 0) proper = true;
            if (proper) constraints[sp].push_back(std::move(con));
        };
        for (int e : hs.supersets(sp)) consider(e);
    }

    OracleState out;
    out.free_sets.resize(hs.set_count());
    std::vector<int> sc;
    for (int s = 0; s < hs.set_count(); ++s) {
        const auto& hset = hs.set(s);
        const auto& sh = G.shape(hset.copy);
        Bitset bits(sh.total);
        host[s].for_each([&](long long r) {
            sh.decode(r, coords);
            // coordinate rules
            for (int p = 0; p < hset.size; ++p) {
                int w = hset.verts[p];
                if (phi[w] >= 0) {
                    if (coords[p] != phi[w]) return;
                } else if (used[R.singleton_at(hset.copy, p)][coords[p]]) {
                    return;
                }
            }
            // pinned-edge rules over every sub-tuple
            for (unsigned mask = 1; mask < (1u << hset.size); ++mask) {
                int sp = hs.subset(s, mask);
                sc.clear();
                for (int p = 0; p < hset.size; ++p)
                    if (mask & (1u << p)) sc.push_back(coords[p]);
                for (const auto& con : constraints[sp]) {
                    const auto& esh = G.shape(con.e_copy);
                    long long rr = 0;
                    for (size_t p = 0; p < con.fill.size(); ++p)
                        rr += (con.fill[p] >= 0 ? con.fill[p] : sc[con.from_pos[p]]) *
                              esh.stride[p];
                    if (!host[con.e_id].test(rr)) return;
                }
            }
            bits.set(r);
        });
        out.free_sets[s] = std::move(bits);
    }

    // marked subsets from the definition
    out.marked.resize(hs.top_sets().size());
    out.unemb_mask.resize(hs.top_sets().size());
    for (size_t e = 0; e < hs.top_sets().size(); ++e) {
        int s = hs.top_sets()[e];
        const auto& eset = hs.set(s);
        unsigned um = 0;
        for (int p = 0; p < eset.size; ++p)
            if (phi[eset.verts[p]] < 0) um |= 1u << p;
        out.unemb_mask[e] = um;
        int etc = R.subcopy(eset.copy, um);
        const auto& shn = G.shape(etc);
        Bitset m(shn.total);
        if (GM.marked_defined(eset.copy)) {
            const Bitset& marks = *GM.marks[eset.copy];
            const auto& esh = G.shape(eset.copy);
            std::vector<int> ec(eset.size);
            if (um == 0) {
                // fully embedded: a single potential point
                for (int p = 0; p < eset.size; ++p) ec[p] = phi[eset.verts[p]];
                if (marks.test(esh.rank(ec))) m.set(0);
            } else {
                int et_set = hs.subset(s, um);
                std::vector<int> free_pos;
                for (int p = 0; p < eset.size; ++p) {
                    if (phi[eset.verts[p]] >= 0) ec[p] = phi[eset.verts[p]];
                    else free_pos.push_back(p);
                }
                out.free_sets[et_set].for_each([&](long long r) {
                    long long rest = r;
                    for (size_t q = 0; q < free_pos.size(); ++q) {
                        ec[free_pos[q]] = static_cast<int>(rest / shn.stride[q]);
                        rest %= shn.stride[q];
                    }
                    if (marks.test(esh.rank(ec))) m.set(r);
                });
            }
        }
        out.marked[e] = std::move(m);
    }
    return out;
}

} // namespace hyperembed
