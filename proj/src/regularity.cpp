#include "hyperembed/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hyperembed/hsets.hpp"
#include "hyperembed/rng.hpp"

namespace hyperembed {

// ---------------------------------------------------------------------------
// homomorphism density
// ---------------------------------------------------------------------------

double hom_density(const Complex& J, const Complex& G, double budget) {
    if (!(J.R() == G.R()))
        throw std::invalid_argument("hom_density: index complexes differ");
    HSets js(J);
    // constrained vertices: those carrying a singleton set of J
    std::vector<int> verts;
    double space = 1.0;
    for (int v = 0; v < js.vertex_count(); ++v) {
        if (js.singleton_set(v) < 0) continue;
        verts.push_back(v);
        space *= static_cast<double>(G.ground().size(js.part_of(v)));
    }
    if (space > budget) throw std::invalid_argument("hom_density: map space over budget");

    // sets become checkable once their last vertex (in `verts` order) is set
    std::vector<int> order_of(js.vertex_count(), -1);
    for (size_t q = 0; q < verts.size(); ++q) order_of[verts[q]] = static_cast<int>(q);
    std::vector<std::vector<int>> check_at(verts.size());
    for (int s = 0; s < js.set_count(); ++s) {
        int last = -1;
        for (int v : js.set(s).verts) last = std::max(last, order_of[v]);
        if (last >= 0) check_at[last].push_back(s);
    }

    std::vector<int> img(js.vertex_count(), -1);
    long long homs = 0;
    std::vector<int> coords;
    std::function<void(size_t)> rec = [&](size_t q) {
        if (q == verts.size()) {
            ++homs;
            return;
        }
        int v = verts[q];
        int part = js.part_of(v);
        int n = G.ground().size(part);
        for (int o = 0; o < n; ++o) {
            img[v] = o;
            bool ok = true;
            for (int s : check_at[q]) {
                const auto& hs = js.set(s);
                if (!G.defined(hs.copy)) { ok = false; break; }
                coords.clear();
                for (int w : hs.verts) coords.push_back(img[w]);
                if (!G.part(hs.copy).test(G.shape(hs.copy).rank(coords))) { ok = false; break; }
            }
            if (ok) rec(q + 1);
        }
        img[v] = -1;
    };
    rec(0);
    return static_cast<double>(homs) / space;
}

// ---------------------------------------------------------------------------
// triangle check
// ---------------------------------------------------------------------------

namespace {

/// Rows of a pair part as bitsets over the second coordinate.
std::vector<Bitset> pair_rows(const Complex& G, int c) {
    const auto& sh = G.shape(c);
    std::vector<Bitset> rows(sh.dims[0], Bitset(sh.dims[1]));
    G.part(c).for_each([&](long long r) {
        rows[static_cast<size_t>(r / sh.stride[0])].set(r % sh.stride[0]);
    });
    return rows;
}

} // namespace

TriangleCheck triangle_check(const Complex& G, int i, int j, int k) {
    const auto& R = G.R();
    std::vector<int> ord{i, j, k};
    std::sort(ord.begin(), ord.end());
    int a = ord[0], b = ord[1], c = ord[2];
    int cab = R.copy_of_base({a, b}), cac = R.copy_of_base({a, c}), cbc = R.copy_of_base({b, c});
    if (cab < 0 || cac < 0 || cbc < 0 || !G.defined(cab) || !G.defined(cac) || !G.defined(cbc))
        throw std::invalid_argument("triangle_check: pair parts undefined");
    auto rows_ac = pair_rows(G, cac);
    auto rows_bc = pair_rows(G, cbc);
    long long count = 0;
    const auto& shab = G.shape(cab);
    G.part(cab).for_each([&](long long r) {
        int va = static_cast<int>(r / shab.stride[0]);
        int vb = static_cast<int>(r % shab.stride[0]);
        count += rows_ac[va].intersection_count(rows_bc[vb]);
    });
    double na = shab.dims[0], nb = shab.dims[1], nc = G.shape(cac).dims[1];
    double space = na * nb * nc;
    double dij = absolute_density(G, cab).value();
    double dik = absolute_density(G, cac).value();
    double djk = absolute_density(G, cbc).value();
    TriangleCheck out;
    out.count = count;
    out.predicted = space * dij * dik * djk;
    out.deviation = std::abs(static_cast<double>(count) - out.predicted) / space;
    return out;
}

// ---------------------------------------------------------------------------
// regularity deviation
// ---------------------------------------------------------------------------

namespace {

RegularityReport exact_pair_deviation(const Complex& G, int c, const DeviationOptions& opt) {
    const auto& sh = G.shape(c);
    int ci = G.R().singleton_at(c, 0), cj = G.R().singleton_at(c, 1);
    std::vector<int> mi, mj;
    G.part(ci).for_each([&](long long r) { mi.push_back(static_cast<int>(r)); });
    G.part(cj).for_each([&](long long r) { mj.push_back(static_cast<int>(r)); });
    if (std::pow(2.0, static_cast<double>(mi.size())) *
            std::pow(2.0, static_cast<double>(mj.size())) >
        opt.budget)
        throw std::invalid_argument("regularity_deviation: exact mode over budget");
    if (mi.size() > 24 || mj.size() > 24 || mi.empty() || mj.empty())
        throw std::invalid_argument("regularity_deviation: exact mode needs tiny parts");
    std::vector<uint64_t> row(mi.size(), 0);
    for (size_t a = 0; a < mi.size(); ++a)
        for (size_t b = 0; b < mj.size(); ++b)
            if (G.part(c).test(mi[a] * sh.stride[0] + mj[b])) row[a] |= 1ull << b;
    double dbase =
        static_cast<double>(G.count(c)) / (static_cast<double>(mi.size()) * mj.size());
    double star_all = static_cast<double>(mi.size()) * static_cast<double>(mj.size());
    RegularityReport rep;
    rep.copy = c;
    rep.method = RegularityReport::Method::Exact;
    rep.lower_bound_only = false;
    uint64_t best_i = 0, best_j = 0;
    for (uint64_t maski = 1; maski < (1ull << mi.size()); ++maski) {
        int pi = __builtin_popcountll(maski);
        for (uint64_t maskj = 1; maskj < (1ull << mj.size()); ++maskj) {
            int pj = __builtin_popcountll(maskj);
            if (static_cast<double>(pi) * pj < opt.min_frac * star_all) continue;
            long long edges = 0;
            uint64_t m = maski;
            while (m) {
                int a = __builtin_ctzll(m);
                m &= m - 1;
                edges += __builtin_popcountll(row[a] & maskj);
            }
            double dev = std::abs(static_cast<double>(edges) / (static_cast<double>(pi) * pj) -
                                  dbase);
            if (dev > rep.deviation) {
                rep.deviation = dev;
                best_i = maski;
                best_j = maskj;
            }
            ++rep.samples;
        }
    }
    std::ostringstream os;
    os << "subset-pair masks " << best_i << "/" << best_j;
    rep.witness = os.str();
    return rep;
}

} // namespace

RegularityReport regularity_deviation(const Complex& G, int c, const DeviationOptions& opt) {
    if (!G.defined(c)) throw std::invalid_argument("regularity_deviation: part undefined");
    Bitset star = star_set(G, c);
    long long star_n = star.count();
    if (star_n == 0) throw std::invalid_argument("regularity_deviation: star set empty");
    if (opt.exact) {
        if (G.R().size(c) != 2)
            throw std::invalid_argument("regularity_deviation: exact mode is pair-only");
        return exact_pair_deviation(G, c, opt);
    }

    double dbase = static_cast<double>(G.count(c)) / static_cast<double>(star_n);
    RegularityReport rep;
    rep.copy = c;
    rep.method = RegularityReport::Method::Sampled;
    rep.seed = opt.seed;
    rep.lower_bound_only = true;
    Rng rng(opt.seed);
    const auto& R = G.R();
    int m = R.size(c);
    for (int it = 0; it < opt.samples; ++it) {
        Complex J(G.R_ptr(), G.ground_ptr());
        int e = R.empty_copy();
        J.define(e);
        J.mutable_part(e).set(0);
        bool edge_mode = (it % 2 == 1) && m >= 3;
        double keep = 0.4 + 0.6 * rng.unit();
        for (int level = 1; level < m; ++level)
            for (unsigned mask = 1; mask + 1 < (1u << m); ++mask) {
                if (__builtin_popcount(mask) != level) continue;
                int sc = R.subcopy(c, mask);
                if (J.defined(sc) || !G.defined(sc)) continue;
                J.define(sc);
                auto& bits = J.mutable_part(sc);
                double p = level == 1 ? keep : (edge_mode ? 0.5 + 0.5 * rng.unit() : 1.0);
                Bitset st = star_set(J, sc);
                G.part(sc).for_each([&](long long rr) {
                    if ((p >= 1.0 || rng.coin(p)) && st.test(rr)) bits.set(rr);
                });
            }
        Complex res = restrict_complex(G, J);
        Bitset rstar = star_set(res, c);
        long long rn = rstar.count();
        ++rep.samples;
        if (static_cast<double>(rn) < opt.min_frac * static_cast<double>(star_n)) continue;
        long long edges = res.count(c);
        double dev = std::abs(static_cast<double>(edges) / static_cast<double>(rn) - dbase);
        if (dev > rep.deviation) {
            rep.deviation = dev;
            std::ostringstream os;
            os << "sample " << it << (edge_mode ? " (edge-subsampled)" : " (vertex subsets)");
            rep.witness = os.str();
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// typical degrees
// ---------------------------------------------------------------------------

TypicalDegreeReport typical_degree_report(const Complex& G, int part_copy, int target_copy,
                                          double tol, int reg_samples, uint64_t seed) {
    const auto& R = G.R();
    int pos = -1;
    for (int p = 0; p < R.size(target_copy); ++p)
        if (R.singleton_at(target_copy, p) == part_copy) pos = p;
    if (pos < 0 || !G.defined(target_copy) || !G.defined(part_copy))
        throw std::invalid_argument("typical_degree_report: parts not usable");
    long long part_n = G.count(part_copy);
    if (part_n == 0) return {};
    double avg = static_cast<double>(G.count(target_copy)) / static_cast<double>(part_n);
    double star_row =
        static_cast<double>(star_set(G, target_copy).count()) / static_cast<double>(part_n);
    TypicalDegreeReport out;
    Rng rng(seed);
    const auto& sh = G.shape(target_copy);
    G.part(part_copy).for_each([&](long long v) {
        long long deg = slice_count(G.part(target_copy), sh, pos, static_cast<int>(v));
        double dev = std::abs(static_cast<double>(deg) - avg);
        bool bad = dev > tol * std::max(star_row, 1.0);
        if (!bad && reg_samples > 0 && R.size(target_copy) >= 3) {
            // sampled regularity of the opposite part of the vertex's
            // neighbourhood complex
            Complex N = vertex_neighborhood(G, part_copy, static_cast<int>(v));
            unsigned full = (1u << R.size(target_copy)) - 1u;
            int opp = R.subcopy(target_copy, full & ~(1u << pos));
            if (N.defined(opp) && star_set(N, opp).count() > 0) {
                DeviationOptions o;
                o.samples = reg_samples;
                o.seed = rng.next();
                auto repn = regularity_deviation(N, opp, o);
                if (repn.deviation > tol) bad = true;
            }
        }
        if (bad) out.atypical.push_back(static_cast<int>(v));
        if (avg > 0) out.max_rel_dev = std::max(out.max_rel_dev, dev / avg);
    });
    out.fraction = static_cast<double>(out.atypical.size()) / static_cast<double>(part_n);
    return out;
}

// ---------------------------------------------------------------------------
// neighbourhood extension counts
// ---------------------------------------------------------------------------

NeighborhoodCountCheck neighborhood_count_check(const Complex& G, int cA,
                                                const std::vector<int>& I, int target_part,
                                                double tol, int samples, uint64_t seed) {
    const auto& R = G.R();
    if (!G.defined(cA) || G.count(cA) == 0)
        throw std::invalid_argument("neighborhood_count_check: empty base part");
    if (!R.is_plain())
        throw std::invalid_argument("neighborhood_count_check: plain index complex required");
    int tbase = R.copy(target_part).base[0];
    struct Lift {
        int lifted;
        std::vector<int> pos; // positions of S inside cA
        int vpos;             // position of the target inside the lifted copy
    };
    std::vector<Lift> lifts;
    double predicted = static_cast<double>(G.count(target_part));
    for (int cS : I) {
        if (R.size(cS) == 0) continue;
        std::vector<int> base = R.copy(cS).base;
        std::vector<int> lb(base);
        lb.insert(std::lower_bound(lb.begin(), lb.end(), tbase), tbase);
        int lifted = R.copy_of_base(lb);
        if (lifted < 0 || !G.defined(lifted))
            throw std::invalid_argument("neighborhood_count_check: lifted part undefined");
        Lift l;
        l.lifted = lifted;
        const auto& abase = R.copy(cA).base;
        for (int bi : base) {
            int p = static_cast<int>(std::lower_bound(abase.begin(), abase.end(), bi) -
                                     abase.begin());
            if (p >= R.size(cA) || abase[p] != bi)
                throw std::invalid_argument("neighborhood_count_check: I not under base copy");
            l.pos.push_back(p);
        }
        l.vpos = static_cast<int>(std::lower_bound(lb.begin(), lb.end(), tbase) - lb.begin());
        predicted *= relative_density(G, lifted).value();
        lifts.push_back(std::move(l));
    }

    std::vector<long long> members;
    G.part(cA).for_each([&](long long r) { members.push_back(r); });
    Rng rng(seed);
    NeighborhoodCountCheck out;
    out.predicted = predicted;
    const auto& shA = G.shape(cA);
    std::vector<int> coords;
    long long bad = 0;
    long long n_samples = std::min<long long>(samples, static_cast<long long>(members.size()));
    for (long long it = 0; it < n_samples; ++it) {
        long long r = members[rng.below(members.size())];
        shA.decode(r, coords);
        long long cnt = 0;
        int nt = G.ground().size(target_part);
        std::vector<int> lc;
        for (int o = 0; o < nt; ++o) {
            if (!G.part(target_part).test(o)) continue;
            bool ok = true;
            for (const auto& l : lifts) {
                lc.clear();
                int q = 0;
                for (int p = 0; p < R.size(l.lifted); ++p) {
                    if (p == l.vpos) lc.push_back(o);
                    else lc.push_back(coords[l.pos[q++]]);
                }
                if (!G.part(l.lifted).test(G.shape(l.lifted).rank(lc))) { ok = false; break; }
            }
            cnt += ok;
        }
        if (std::abs(static_cast<double>(cnt) - predicted) > tol * predicted) ++bad;
    }
    out.samples = n_samples;
    out.bad_fraction =
        n_samples == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(n_samples);
    return out;
}

std::string report_to_json(const RegularityReport& rep) {
    nlohmann::ordered_json j;
    j["copy"] = rep.copy;
    j["deviation"] = rep.deviation;
    j["method"] = rep.method == RegularityReport::Method::Exact ? "exact" : "sampled";
    j["samples"] = rep.samples;
    j["seed"] = rep.seed;
    j["lower_bound_only"] = rep.lower_bound_only;
    j["witness"] = rep.witness;
    return j.dump(2);
}

} // namespace hyperembed
