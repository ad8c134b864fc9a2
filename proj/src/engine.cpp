#include "hyperembed/engine.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hyperembed {

// ---------------------------------------------------------------------------
// small pieces
// ---------------------------------------------------------------------------

const char* fail_stage_name(FailStage s) {
    switch (s) {
        case FailStage::None: return "none";
        case FailStage::Hypothesis: return "hypothesis";
        case FailStage::BufferInfeasible: return "buffer-infeasible";
        case FailStage::EmptyGoodSet: return "empty-good-set";
        case FailStage::QueueOverflow: return "queue-overflow";
        case FailStage::SdrHallFailure: return "sdr-hall-failure";
        case FailStage::ConclusionInfeasible: return "conclusion-infeasible";
        case FailStage::ConclusionBudget: return "conclusion-budget";
        case FailStage::ValidationFailure: return "validation-failure";
    }
    return "?";
}

ColouredSets ColouredSets::from_vertex_restrictions(
    const HSets& hs, const std::vector<VertexRestriction>& items) {
    ColouredSets out;
    out.by_set.resize(hs.set_count());
    for (const auto& it : items) {
        int s = hs.singleton_set(hs.vid(it.part_copy, it.ord));
        if (s < 0) throw std::invalid_argument("restriction on vertex not in target");
        out.by_set[s] = it.allowed;
    }
    return out;
}

bool ColouredSets::empty() const {
    for (const auto& b : by_set)
        if (b) return false;
    return true;
}

// ---------------------------------------------------------------------------
// construction / initialisation
// ---------------------------------------------------------------------------

Engine::Engine(const Complex& H, const MarkedComplex& GM, const ColouredSets* gamma,
               const ParamConfig& cfg, uint64_t seed)
    : H_(&H), G_(&GM.complex), GM_(&GM), gamma_(gamma), cfg_(cfg), rng_(seed), hs_(H) {
    cfg_.validate();
    phi_.assign(hs_.vertex_count(), -1);
}

FailStage Engine::select_buffer(std::string* witness) {
    const auto& R = H_->R();
    // restricted vertices and their neighbourhoods are off limits
    restricted_ball_.assign(hs_.vertex_count(), 0);
    if (gamma_) {
        for (int s = 0; s < hs_.set_count(); ++s) {
            if (s >= static_cast<int>(gamma_->by_set.size()) || !gamma_->by_set[s]) continue;
            for (int v : hs_.set(s).verts)
                for (int w : hs_.ball(v, 1)) restricted_ball_[w] = 1;
        }
    }
    buffer_.clear();
    is_buffer_.assign(hs_.vertex_count(), 0);
    std::vector<char> excluded(hs_.vertex_count(), 0);
    struct PartPlan {
        int copy;
        int target;
        size_t cursor = 0;
        std::vector<int> order;
        int got = 0;
    };
    std::vector<PartPlan> plans;
    for (int pc : R.singleton_copies()) {
        PartPlan pl;
        pl.copy = pc;
        int n = H_->ground().size(pc);
        pl.target = static_cast<int>(cfg_.buffer_fraction * n);
        pl.order.resize(n);
        for (int o = 0; o < n; ++o) pl.order[o] = o;
        rng_.shuffle(pl.order);
        plans.push_back(std::move(pl));
    }
    bool progress = true;
    auto unmet = [&] {
        for (auto& pl : plans)
            if (pl.got < pl.target) return true;
        return false;
    };
    while (unmet() && progress) {
        progress = false;
        for (auto& pl : plans) {
            if (pl.got >= pl.target) continue;
            while (pl.cursor < pl.order.size()) {
                int v = hs_.vid(pl.copy, pl.order[pl.cursor++]);
                if (excluded[v] || restricted_ball_[v]) continue;
                buffer_.push_back(v);
                is_buffer_[v] = 1;
                ++pl.got;
                for (int w : hs_.ball(v, cfg_.buffer_distance - 1)) excluded[w] = 1;
                progress = true;
                break;
            }
        }
    }
    if (unmet()) {
        for (auto& pl : plans)
            if (pl.got < pl.target && witness) {
                std::ostringstream os;
                os << "buffer infeasible: part copy " << pl.copy << " filled " << pl.got
                   << "/" << pl.target;
                *witness = os.str();
                break;
            }
        return FailStage::BufferInfeasible;
    }
    std::sort(buffer_.begin(), buffer_.end());
    return FailStage::None;
}

FailStage Engine::init_state(std::string* witness) {
    auto fail = [&](const std::string& w) {
        if (witness) *witness = w;
        return FailStage::Hypothesis;
    };
    const auto& R = H_->R();
    if (!(R == G_->R())) return fail("index complexes differ");
    for (int pc : R.singleton_copies())
        if (H_->ground().size(pc) != G_->ground().size(pc))
            return fail("part size mismatch at copy " + std::to_string(pc));
    int nmin = 1 << 30, nmax = 0;
    for (int pc : R.singleton_copies()) {
        nmin = std::min(nmin, H_->ground().size(pc));
        nmax = std::max(nmax, H_->ground().size(pc));
    }
    if (nmax > cfg_.size_ratio * nmin) return fail("part-size ratio exceeds C");
    for (int c = 0; c < R.copy_count(); ++c)
        if (H_->defined(c) && !G_->defined(c))
            return fail("host part undefined at copy " + std::to_string(c) +
                        " needed by target");
    for (int pc : R.singleton_copies()) {
        if (!H_->defined(pc) || H_->count(pc) != H_->ground().size(pc))
            return fail("target singleton part not spanning at copy " + std::to_string(pc));
        if (!G_->defined(pc) || G_->count(pc) != G_->ground().size(pc))
            return fail("host singleton part not spanning at copy " + std::to_string(pc));
    }
    {
        auto merrs = GM_->validate();
        if (!merrs.empty()) return fail("marks invalid: " + merrs.front());
    }
    // every H-set must have a unique vertex set (disjoint parts)
    // guaranteed when R is plain; multicomplex targets must respect it
    if (!R.is_plain()) {
        std::map<std::vector<int>, int> seen;
        for (int s = 0; s < hs_.set_count(); ++s) {
            auto vs = hs_.set(s).verts;
            std::sort(vs.begin(), vs.end());
            if (seen.count(vs)) return fail("target parts not disjoint");
            seen[vs] = s;
        }
    }
    if (gamma_) {
        // restricted-position hypotheses: fraction per part, density floor
        std::vector<int> restricted(R.copy_count(), 0);
        for (int s = 0; s < hs_.set_count(); ++s) {
            if (s >= static_cast<int>(gamma_->by_set.size()) || !gamma_->by_set[s]) continue;
            const auto& hset = hs_.set(s);
            const Bitset& allowed = *gamma_->by_set[s];
            if (allowed.size() != G_->shape(hset.copy).total)
                return fail("restriction shape mismatch");
            if (!allowed.is_subset_of(G_->part(hset.copy)))
                return fail("restriction not inside host part");
            double cnt = static_cast<double>(allowed.count());
            if (cnt <= cfg_.c_prime * static_cast<double>(G_->count(hset.copy)))
                return fail("restriction below the c' density floor");
            if (hset.size == 1) ++restricted[hset.copy];
        }
        for (int pc : R.singleton_copies())
            if (restricted[pc] >
                cfg_.c * static_cast<double>(H_->ground().size(pc)) + 1e-9)
                return fail("too many restricted vertices in part " + std::to_string(pc));
    }

    // F_S(0) = G[Gamma]_S
    F_.assign(hs_.set_count(), Bitset());
    fsize_.assign(hs_.set_count(), 0);
    fsync_.assign(hs_.set_count(), 0);
    for (int s = 0; s < hs_.set_count(); ++s) {
        const auto& hset = hs_.set(s);
        Bitset bits = G_->part(hset.copy);
        if (gamma_) {
            for (unsigned mask = 1; mask < (1u << hset.size); ++mask) {
                int sub = hs_.subset(s, mask);
                if (sub < 0 || sub >= static_cast<int>(gamma_->by_set.size()) ||
                    !gamma_->by_set[sub])
                    continue;
                const Bitset& g = *gamma_->by_set[sub];
                // keep only tuples whose sub-tuple is allowed
                std::vector<int> pos;
                for (int p = 0; p < hset.size; ++p)
                    if (mask & (1u << p)) pos.push_back(p);
                const auto& sh = G_->shape(hset.copy);
                const auto& ssh = G_->shape(hs_.set(sub).copy);
                std::vector<int> coords;
                std::vector<long long> drop;
                bits.for_each([&](long long r) {
                    sh.decode(r, coords);
                    long long rr = 0;
                    for (size_t q = 0; q < pos.size(); ++q) rr += coords[pos[q]] * ssh.stride[q];
                    if (!g.test(rr)) drop.push_back(r);
                });
                for (long long r : drop) bits.reset(r);
            }
        }
        fsize_[s] = bits.count();
        F_[s] = std::move(bits);
    }
    // marked subsets M_{E,E}(0) = M_E n F_E(0)
    marks_.assign(hs_.top_sets().size(), MarkTrack());
    for (size_t e = 0; e < hs_.top_sets().size(); ++e) {
        int s = hs_.top_sets()[e];
        const auto& hset = hs_.set(s);
        MarkTrack mt;
        mt.unemb_mask = (1u << hset.size) - 1u;
        mt.cur_copy = hset.copy;
        if (GM_->marked_defined(hset.copy)) {
            mt.m = *GM_->marks[hset.copy];
            mt.m &= F_[s];
        } else {
            mt.m.assign(G_->shape(hset.copy).total);
        }
        mt.msize = mt.m.count();
        marks_[e] = std::move(mt);
    }

    // bookkeeping
    used_.assign(hs_.vertex_count(), 0);
    avail_.assign(R.copy_count(), 0);
    unembedded_nonbuffer_.assign(R.copy_count(), 0);
    unembedded_nonbuffer_total_ = 0;
    for (int pc : R.singleton_copies()) avail_[pc] = G_->ground().size(pc);
    if (is_buffer_.empty()) is_buffer_.assign(hs_.vertex_count(), 0);
    for (int v = 0; v < hs_.vertex_count(); ++v)
        if (!is_buffer_[v]) {
            ++unembedded_nonbuffer_[hs_.part_of(v)];
            ++unembedded_nonbuffer_total_;
        }

    // list: buffer neighbourhoods (consecutive per buffer vertex), then the
    // rest interleaved across parts so every part drains evenly, then the
    // buffer
    list_.clear();
    list_head_ = 0;
    std::vector<char> placed(hs_.vertex_count(), 0);
    vn_unembedded_.assign(hs_.vertex_count(), 0);
    for (int b : buffer_) {
        for (int z : hs_.neighbors(b)) {
            ++vn_unembedded_[b];
            if (!placed[z] && !is_buffer_[z]) {
                placed[z] = 1;
                list_.push_back(z);
            }
        }
    }
    {
        std::vector<std::vector<int>> middle(R.copy_count());
        for (int v = 0; v < hs_.vertex_count(); ++v)
            if (!placed[v] && !is_buffer_[v]) middle[hs_.part_of(v)].push_back(v);
        bool more = true;
        for (size_t q = 0; more; ++q) {
            more = false;
            for (auto& m : middle)
                if (q < m.size()) {
                    list_.push_back(m[q]);
                    more = true;
                }
        }
    }
    for (int b : buffer_) list_.push_back(b);

    in_queue_.assign(hs_.vertex_count(), 0);
    ever_queued_.assign(hs_.vertex_count(), 0);
    in_jumpers_.assign(hs_.vertex_count(), 0);
    qcount_.assign(R.copy_count(), 0);
    queue_.clear();
    jumpers_.clear();

    nu_v_.assign(hs_.vertex_count(), 0);
    nu_set_.assign(hs_.set_count(), 0);
    K_set_.assign(hs_.set_count(), 0);
    t_z_.assign(hs_.vertex_count(), 0);
    regime_size_.assign(hs_.vertex_count(), 0);
    for (int v = 0; v < hs_.vertex_count(); ++v) {
        int s = hs_.singleton_set(v);
        regime_size_[v] = s >= 0 ? fsize_[s] : 0;
    }

    // unique buffer vertex within jumping distance
    int jump_radius = cfg_.k == 2 ? 2 : 4;
    buffer_near_.assign(hs_.vertex_count(), -1);
    for (int b : buffer_) // ascending ids: lowest wins ties
        for (int w : hs_.ball(b, jump_radius))
            if (buffer_near_[w] < 0) buffer_near_[w] = b;

    t_ = 0;
    initialized_ = true;
    return FailStage::None;
}

// ---------------------------------------------------------------------------
// lazy deletion
// ---------------------------------------------------------------------------

namespace {

/// Apply used-vertex deletions to a free-set bitset. Positions whose target
/// vertex is already embedded are pinned to its image and skipped.
void apply_used(Bitset& bits, long long& size, const PartShape& sh,
                const std::vector<int>& part_at_pos, const std::vector<int>& verts,
                const std::vector<int>& phi,
                const std::vector<std::pair<int, int>>& log, size_t from, size_t to) {
    for (size_t i = from; i < to; ++i) {
        auto [pc, ord] = log[i];
        for (size_t p = 0; p < part_at_pos.size(); ++p) {
            if (part_at_pos[p] != pc) continue;
            if (phi[verts[p]] >= 0) break; // pinned coordinate
            for_each_rank_fixed(sh, static_cast<int>(p), ord, [&](long long r) {
                if (bits.test(r)) {
                    bits.reset(r);
                    --size;
                }
            });
            break;
        }
    }
}

} // namespace

void Engine::admit_force(int z) {
    if (phi_[z] >= 0 || in_queue_[z]) return;
    int s = hs_.singleton_set(z);
    if (s < 0) return;
    queue_.push_back(z);
    in_queue_[z] = 1;
    ++tele_.rescue_admissions;
}

void Engine::touch(int s) {
    if (fsync_[s] >= used_log_.size()) return;
    const auto& hset = hs_.set(s);
    const auto& sh = G_->shape(hset.copy);
    std::vector<int> parts(hset.size);
    for (int p = 0; p < hset.size; ++p) parts[p] = H_->R().singleton_at(hset.copy, p);
    apply_used(F_[s], fsize_[s], sh, parts, hset.verts, phi_, used_log_, fsync_[s],
               used_log_.size());
    fsync_[s] = used_log_.size();
}

void Engine::touch_mark(int e) {
    MarkTrack& mt = marks_[e];
    if (mt.sync >= used_log_.size()) return;
    const auto& R = H_->R();
    const auto& sh = G_->shape(mt.cur_copy);
    int m = R.size(mt.cur_copy);
    // every position of the mark's copy corresponds to an unembedded vertex
    for (size_t i = mt.sync; i < used_log_.size(); ++i) {
        auto [pc, ord] = used_log_[i];
        for (int p = 0; p < m; ++p) {
            if (R.singleton_at(mt.cur_copy, p) != pc) continue;
            for_each_rank_fixed(sh, p, ord, [&](long long r) {
                if (mt.m.test(r)) {
                    mt.m.reset(r);
                    --mt.msize;
                }
            });
            break;
        }
    }
    mt.sync = used_log_.size();
}

Bitset Engine::materialized_free(int s) const {
    Bitset bits = F_[s];
    long long size = fsize_[s];
    const auto& hset = hs_.set(s);
    std::vector<int> parts(hset.size);
    for (int p = 0; p < hset.size; ++p) parts[p] = H_->R().singleton_at(hset.copy, p);
    apply_used(bits, size, G_->shape(hset.copy), parts, hset.verts, phi_, used_log_,
               fsync_[s], used_log_.size());
    return bits;
}

Bitset Engine::materialized_mark(int e) const {
    const MarkTrack& mt = marks_[e];
    Bitset bits = mt.m;
    const auto& R = H_->R();
    const auto& sh = G_->shape(mt.cur_copy);
    int m = R.size(mt.cur_copy);
    for (size_t i = mt.sync; i < used_log_.size(); ++i) {
        auto [pc, ord] = used_log_[i];
        for (int p = 0; p < m; ++p) {
            if (R.singleton_at(mt.cur_copy, p) != pc) continue;
            for_each_rank_fixed(sh, p, ord, [&](long long r) { bits.reset(r); });
            break;
        }
    }
    return bits;
}

unsigned Engine::unembedded_mask(int e) const { return marks_[e].unemb_mask; }
long long Engine::free_size(int s) const { return materialized_free(s).count(); }

// ---------------------------------------------------------------------------
// nu ledger
// ---------------------------------------------------------------------------

int Engine::nu_prime_now(int s) const {
    const auto& hset = hs_.set(s);
    int v = nu_set_[s];
    if (hset.size < cfg_.k) v += K_set_[s];
    return v;
}

int Engine::nu_prime_after(int s, int x) const {
    const auto& hset = hs_.set(s);
    int overlap = 0;
    for (int w : hset.verts)
        if (w != x && hs_.adjacent(w, x)) ++overlap;
    int nu_t = nu_set_[s] + overlap;
    if (hset.size == cfg_.k) return nu_t;
    int K = K_set_[s];
    // the embedding of x may raise K via the lifted set s+x
    std::vector<int> want(hset.verts);
    want.push_back(x);
    std::sort(want.begin(), want.end());
    for (int t : hs_.supersets(s)) {
        if (hs_.set(t).size != hset.size + 1) continue;
        auto vs = hs_.set(t).verts;
        std::sort(vs.begin(), vs.end());
        if (vs != want) continue;
        int nusx = nu_set_[t];
        for (int w : hs_.set(t).verts)
            if (w != x && hs_.adjacent(w, x)) ++nusx;
        int Ksx = hs_.set(t).size < cfg_.k ? K_set_[t] : 0;
        K = std::max(K, nusx + Ksx);
        break;
    }
    return nu_t + K;
}

// ---------------------------------------------------------------------------
// star sets of the current coloured complex
// ---------------------------------------------------------------------------

long long Engine::star_now(int s) const {
    const auto& hset = hs_.set(s);
    const auto& sh = G_->shape(hset.copy);
    if (hset.size == 1) return sh.dims[0];
    if (hset.size == 2)
        return fsize_[hs_.subset(s, 1u)] * fsize_[hs_.subset(s, 2u)];
    if (hset.size == 3) {
        // triangles of the three pair parts
        int s01 = hs_.subset(s, 3u), s02 = hs_.subset(s, 5u), s12 = hs_.subset(s, 6u);
        const auto& sh01 = G_->shape(hs_.set(s01).copy);
        const auto& sh02 = G_->shape(hs_.set(s02).copy);
        const auto& sh12 = G_->shape(hs_.set(s12).copy);
        std::vector<Bitset> rows02(sh02.dims[0], Bitset(sh02.dims[1]));
        F_[s02].for_each([&](long long r) {
            rows02[static_cast<size_t>(r / sh02.stride[0])].set(r % sh02.stride[0]);
        });
        std::vector<Bitset> rows12(sh12.dims[0], Bitset(sh12.dims[1]));
        F_[s12].for_each([&](long long r) {
            rows12[static_cast<size_t>(r / sh12.stride[0])].set(r % sh12.stride[0]);
        });
        long long total = 0;
        F_[s01].for_each([&](long long r) {
            int a = static_cast<int>(r / sh01.stride[0]);
            int b = static_cast<int>(r % sh01.stride[0]);
            total += rows02[a].intersection_count(rows12[b]);
        });
        return total;
    }
    // generic: iterate the product space
    long long total = 0;
    std::vector<int> coords(hset.size, 0);
    while (true) {
        bool ok = true;
        for (unsigned mask = 1; ok && mask + 1 < (1u << hset.size); ++mask) {
            int sub = hs_.subset(s, mask);
            const auto& ssh = G_->shape(hs_.set(sub).copy);
            long long rr = 0;
            int q = 0;
            for (int p = 0; p < hset.size; ++p)
                if (mask & (1u << p)) rr += coords[p] * ssh.stride[q++];
            ok = F_[sub].test(rr);
        }
        total += ok;
        int p = hset.size - 1;
        while (p >= 0 && ++coords[p] == sh.dims[p]) coords[p--] = 0;
        if (p < 0) break;
    }
    return total;
}

// ---------------------------------------------------------------------------
// step context: lifted sets, local family
// ---------------------------------------------------------------------------

void Engine::compute_sx(int x, std::vector<int>& sx_of, std::vector<int>& sxpos_of) const {
    sx_of.assign(hs_.set_count(), -1);
    sxpos_of.assign(hs_.set_count(), -1);
    // any set s with s+x in H is a subset of some set containing x
    for (int t : hs_.sets_of_vertex(x)) {
        const auto& tset = hs_.set(t);
        int posx = hs_.position_in(t, x);
        unsigned full = (1u << tset.size) - 1u;
        unsigned m = full & ~(1u << posx);
        int s = hs_.subset(t, m);
        if (s >= 0) {
            sx_of[s] = t;
            sxpos_of[s] = posx;
        }
    }
}

void Engine::local_family(int x, std::vector<int>& local, std::vector<int>& consult,
                          std::vector<int>& utops) const {
    std::vector<char> mark_set(hs_.set_count(), 0), mark_top(hs_.top_sets().size(), 0);
    local.clear();
    consult.clear();
    utops.clear();
    auto add_local = [&](int s) {
        if (!mark_set[s]) {
            mark_set[s] = 1;
            local.push_back(s);
        }
    };
    for (int s : hs_.sets_of_vertex(x)) add_local(s);
    for (int z : hs_.neighbors(x))
        for (int s : hs_.sets_of_vertex(z)) add_local(s);
    // consult closure: local sets plus all their subsets
    std::vector<char> inc(hs_.set_count(), 0);
    for (int s : local) {
        if (!inc[s]) {
            inc[s] = 1;
            consult.push_back(s);
        }
        const auto& hset = hs_.set(s);
        for (unsigned m = 1; m + 1 < (1u << hset.size); ++m) {
            int sub = hs_.subset(s, m);
            if (sub >= 0 && !inc[sub]) {
                inc[sub] = 1;
                consult.push_back(sub);
            }
        }
    }
    // singletons of x's part (eager queue accounting)
    int pc = hs_.part_of(x);
    for (int o = 0; o < H_->ground().size(pc); ++o) {
        int s = hs_.singleton_set(hs_.vid(pc, o));
        if (s >= 0 && !inc[s]) {
            inc[s] = 1;
            consult.push_back(s);
        }
    }
    // tracked tops: E with unembedded part meeting VN(x) u {x}
    std::map<int, int> top_index;
    for (size_t e = 0; e < hs_.top_sets().size(); ++e) top_index[hs_.top_sets()[e]] = (int)e;
    auto add_top = [&](int z) {
        if (phi_[z] >= 0) return;
        for (int t : hs_.tops_of_vertex(z)) {
            int e = top_index[t];
            if (!mark_top[e]) {
                mark_top[e] = 1;
                utops.push_back(e);
            }
        }
    };
    add_top(x);
    for (int z : hs_.neighbors(x)) add_top(z);
    // the unembedded subsets of tracked tops join the consult closure
    for (int e : utops) {
        int t = hs_.top_sets()[e];
        const auto& tset = hs_.set(t);
        unsigned um = 0;
        for (int p = 0; p < tset.size; ++p)
            if (phi_[tset.verts[p]] < 0) um |= 1u << p;
        for (unsigned m = um;; m = (m - 1) & um) {
            if (m) {
                int sub = hs_.subset(t, m);
                if (sub >= 0 && !inc[sub]) {
                    inc[sub] = 1;
                    consult.push_back(sub);
                }
            }
            if (m == 0) break;
        }
    }
    std::sort(local.begin(), local.end(), [&](int a, int b) {
        return hs_.set(a).size != hs_.set(b).size ? hs_.set(a).size < hs_.set(b).size : a < b;
    });
}

// membership of a tuple in F_S(t) under the hypothetical phi(x)=y, reading
// only time-(t-1) free sets
bool Engine::hyp_member(int s, const std::vector<int>& coords, int x, int y,
                        const std::vector<int>& sx_of,
                        const std::vector<int>& sxpos_of) const {
    const auto& hset = hs_.set(s);
    int sx = sx_of[s];
    if (sx >= 0) {
        const auto& sh = G_->shape(hs_.set(sx).copy);
        long long r = 0;
        int q = 0;
        for (int p = 0; p < hs_.set(sx).size; ++p)
            r += (p == sxpos_of[s] ? y : coords[q++]) * sh.stride[p];
        return F_[sx].test(r);
    }
    bool meets = false;
    for (int w : hset.verts)
        if (hs_.adjacent(w, x)) meets = true;
    const auto& sh = G_->shape(hset.copy);
    long long r = sh.rank(coords);
    if (!F_[s].test(r)) return false;
    if (!meets) {
        int pcx = hs_.part_of(x);
        for (int p = 0; p < hset.size; ++p)
            if (H_->R().singleton_at(hset.copy, p) == pcx && phi_[hset.verts[p]] < 0 &&
                coords[p] == y)
                return false;
        return true;
    }
    for (unsigned m = 1; m + 1 < (1u << hset.size); ++m) {
        int sub = hs_.subset(s, m);
        std::vector<int> sc;
        for (int p = 0; p < hset.size; ++p)
            if (m & (1u << p)) sc.push_back(coords[p]);
        if (!hyp_member(sub, sc, x, y, sx_of, sxpos_of)) return false;
    }
    return true;
}

long long Engine::slice_size(int super_set, int pos, int y) const {
    const auto& sh = G_->shape(hs_.set(super_set).copy);
    long long c = 0;
    for_each_rank_fixed(sh, pos, y, [&](long long r) { c += F_[super_set].test(r); });
    return c;
}

// ---------------------------------------------------------------------------
// selection rule
// ---------------------------------------------------------------------------

int Engine::select_next() {
    if (!jumpers_.empty()) return *jumpers_.begin();
    while (!queue_.empty() && phi_[queue_.front()] >= 0) queue_.pop_front();
    if (!queue_.empty()) {
        // serve the scarcest member first (lowest free count, then oldest):
        // a one-image vertex must move before anything can drain its slot
        int xq = queue_.front();
        long long best = fsize_[hs_.singleton_set(xq)];
        for (int z : queue_) {
            if (phi_[z] >= 0) continue;
            long long f = fsize_[hs_.singleton_set(z)];
            if (f < best) {
                best = f;
                xq = z;
            }
        }
        int b = buffer_near_[xq];
        if (b >= 0 && vn_unembedded_[b] > 0) {
            // top priority: embed the whole buffer neighbourhood now; the
            // queued vertex itself goes first when it belongs to it, and
            // the remaining members jump the queue
            int pick = -1;
            bool xq_in = false;
            for (int z : hs_.neighbors(b))
                if (phi_[z] < 0) {
                    if (z == xq) xq_in = true;
                    if (pick < 0 || z < pick) pick = z;
                }
            if (pick >= 0) {
                int x = xq_in ? xq : pick;
                for (int z : hs_.neighbors(b))
                    if (phi_[z] < 0 && z != x && !in_jumpers_[z]) {
                        jumpers_.insert(z);
                        in_jumpers_[z] = 1;
                        ++tele_.jumper_count;
                    }
                return x;
            }
        }
        return xq;
    }
    while (list_head_ < list_.size() && phi_[list_[list_head_]] >= 0) ++list_head_;
    return list_head_ < list_.size() ? list_[list_head_] : -1;
}

// ---------------------------------------------------------------------------
// good set
// ---------------------------------------------------------------------------

std::vector<int> Engine::good_set(int x) {
    assert(initialized_ && phi_[x] < 0);
    std::vector<int> local, consult, utops;
    local_family(x, local, consult, utops);
    for (int s : consult) touch(s);
    for (int e : utops) touch_mark(e);
    std::vector<int> sx_of, sxpos_of;
    compute_sx(x, sx_of, sxpos_of);

    // neighbourhood sets: unembedded S in H(x)
    struct Nbr {
        int s, sx, posx;
        double d_s, d_sx, eps;
    };
    std::vector<Nbr> nbrs;
    for (int s = 0; s < hs_.set_count(); ++s) {
        if (sx_of[s] < 0) continue;
        bool unemb = true;
        for (int w : hs_.set(s).verts)
            if (phi_[w] >= 0) unemb = false;
        if (!unemb) continue;
        Nbr nb;
        nb.s = s;
        nb.sx = sx_of[s];
        nb.posx = sxpos_of[s];
        long long st = star_now(s);
        long long stx = star_now(sx_of[s]);
        nb.d_s = st > 0 ? double(fsize_[s]) / double(st) : 0.0;
        nb.d_sx = stx > 0 ? double(fsize_[nb.sx]) / double(stx) : 0.0;
        nb.eps = cfg_.eps(nu_prime_after(s, x), 0);
        nbrs.push_back(nb);
    }
    // joint-survival watch: any affected, fully-unembedded set of size >= 2
    // whose joint free set could plausibly hit zero this step; a candidate
    // emptying one of them can never be completed past it
    std::vector<int> watch;
    if (cfg_.eager_watch) {
        std::vector<char> seen(hs_.set_count(), 0);
        int pcx = hs_.part_of(x);
        for (int s = 0; s < hs_.set_count(); ++s) {
            const auto& hset = hs_.set(s);
            if (hset.size < 2 || fsize_[s] > 25) continue;
            bool unemb = true;
            for (int w : hset.verts)
                if (phi_[w] >= 0 || w == x) unemb = false;
            if (!unemb) continue;
            bool affected = false;
            for (int p = 0; p < hset.size && !affected; ++p)
                if (H_->R().singleton_at(hset.copy, p) == pcx) affected = true;
            for (int w : hset.verts)
                if (hs_.adjacent(w, x)) affected = true;
            if (!affected || seen[s]) continue;
            seen[s] = 1;
            watch.push_back(s);
        }
    }

    // tracked tops: dangerous-image data
    struct Danger {
        int e;           // top index
        int et_old;      // set id of the currently unembedded part
        bool x_in;       // x in E^{t-1}
        int posx_mark;   // x's position within the mark's current copy
        int posx_et;     // x's position within et_old
        double theta;
    };
    std::vector<Danger> dangers;
    for (int e : utops) {
        if (marks_[e].msize == 0) continue;
        int t = hs_.top_sets()[e];
        const auto& tset = hs_.set(t);
        unsigned um = 0;
        for (int p = 0; p < tset.size; ++p)
            if (phi_[tset.verts[p]] < 0) um |= 1u << p;
        if (um == 0) continue;
        Danger d;
        d.e = e;
        d.et_old = hs_.subset(t, um);
        d.x_in = hs_.position_in(t, x) >= 0 && (um & (1u << hs_.position_in(t, x)));
        unsigned um_new = um;
        if (d.x_in) um_new &= ~(1u << hs_.position_in(t, x));
        int et_new = um_new ? hs_.subset(t, um_new) : -1;
        int nu = 0;
        if (et_new >= 0) nu = nu_prime_after(et_new, x);
        d.theta = cfg_.theta_at(nu);
        if (d.x_in) {
            // position of x among the unembedded positions (the mark copy)
            int posm = 0;
            int posx = hs_.position_in(t, x);
            for (int p = 0; p < posx; ++p)
                if (um & (1u << p)) ++posm;
            d.posx_mark = posm;
            d.posx_et = hs_.position_in(d.et_old, x);
        } else {
            d.posx_mark = d.posx_et = -1;
        }
        dangers.push_back(d);
    }

    int sx_singleton = hs_.singleton_set(x);
    std::vector<int> ok;
    std::vector<int> coords;
    last_diag_ = {0, 0, 0, 0};
    F_[sx_singleton].for_each([&](long long ybits) {
        int y = static_cast<int>(ybits);
        ++last_diag_.candidates;
        // density-evolution clause over unembedded neighbour sets
        for (const auto& nb : nbrs) {
            long long newsize = slice_size(nb.sx, nb.posx, y);
            // universal floor: an image that empties the free set of an
            // unembedded neighbour set dooms the run and is never good
            if (newsize < 1) {
                ++last_diag_.floor_failures;
                return;
            }
            const auto& hset = hs_.set(nb.s);
            long long newstar = 0;
            if (hset.size == 1) {
                newstar = G_->shape(hset.copy).dims[0];
            } else if (hset.size == 2) {
                long long a = slice_size(sx_of[hs_.subset(nb.s, 1u)],
                                         sxpos_of[hs_.subset(nb.s, 1u)], y);
                long long b = slice_size(sx_of[hs_.subset(nb.s, 2u)],
                                         sxpos_of[hs_.subset(nb.s, 2u)], y);
                newstar = a * b;
            } else {
                // generic product-space star under the hypothetical
                const auto& sh = G_->shape(hset.copy);
                coords.assign(hset.size, 0);
                while (true) {
                    bool okc = true;
                    for (unsigned m = 1; okc && m + 1 < (1u << hset.size); ++m) {
                        std::vector<int> sc;
                        for (int p = 0; p < hset.size; ++p)
                            if (m & (1u << p)) sc.push_back(coords[p]);
                        okc = hyp_member(hs_.subset(nb.s, m), sc, x, y, sx_of, sxpos_of);
                    }
                    newstar += okc;
                    int p = hset.size - 1;
                    while (p >= 0 && ++coords[p] == sh.dims[p]) coords[p--] = 0;
                    if (p < 0) break;
                }
            }
            double mu = nb.d_s * nb.d_sx * static_cast<double>(newstar);
            // enforced one-sidedly: images leaving a neighbour set larger
            // than expected never hurt at this scale, so only the shortfall
            // side gates the choice (upper deviations go to telemetry)
            if (mu - static_cast<double>(newsize) > nb.eps * mu + cfg_.count_slack) {
                ++last_diag_.density_failures;
                return;
            }
            if (static_cast<double>(newsize) - mu > nb.eps * mu + cfg_.count_slack)
                ++tele_.density_upper_outliers;
        }
        // joint-survival clause: some image in every watched set must survive
        for (int s : watch) {
            const auto& hset = hs_.set(s);
            const auto& sh = G_->shape(hset.copy);
            bool alive = false;
            std::vector<int> cc;
            for (long long r = F_[s].find_first(); r >= 0 && !alive;
                 r = F_[s].find_next(r)) {
                sh.decode(r, cc);
                alive = hyp_member(s, cc, x, y, sx_of, sxpos_of);
            }
            if (!alive) {
                ++last_diag_.floor_failures;
                return;
            }
        }
        // dangerous-image clause over tracked tops
        for (const auto& d : dangers) {
            const MarkTrack& mt = marks_[d.e];
            long long newM = 0, newF = 0;
            if (d.x_in) {
                newM = 0;
                const auto& shm = G_->shape(mt.cur_copy);
                for_each_rank_fixed(shm, d.posx_mark, y,
                                    [&](long long r) { newM += mt.m.test(r); });
                if (newM == 0) continue;
                newF = slice_size(d.et_old, d.posx_et, y);
            } else {
                const auto& hset = hs_.set(d.et_old);
                const auto& sh = G_->shape(hset.copy);
                std::vector<int> cc;
                mt.m.for_each([&](long long r) {
                    sh.decode(r, cc);
                    newM += hyp_member(d.et_old, cc, x, y, sx_of, sxpos_of);
                });
                if (newM == 0) continue;
                F_[d.et_old].for_each([&](long long r) {
                    sh.decode(r, cc);
                    newF += hyp_member(d.et_old, cc, x, y, sx_of, sxpos_of);
                });
            }
            if (static_cast<double>(newM) > d.theta * static_cast<double>(newF)) {
                ++last_diag_.danger_failures;
                return;
            }
        }
        ok.push_back(y);
    });
    return ok;
}

// ---------------------------------------------------------------------------
// apply one embedding
// ---------------------------------------------------------------------------

void Engine::apply_embedding(int x, int y) {
    touch(hs_.singleton_set(x));
    if (phi_[x] >= 0 || !F_[hs_.singleton_set(x)].test(y) || used_[hs_.vid(hs_.part_of(x), y)])
        throw std::logic_error("apply_embedding: contract breach");
    ++t_;

    std::vector<int> local, consult, utops;
    local_family(x, local, consult, utops);
    std::vector<int> sx_of, sxpos_of;
    compute_sx(x, sx_of, sxpos_of);

    // nu ledger: K updates first (reading time-t values), then nu bumps
    std::vector<char> is_nbr(hs_.vertex_count(), 0);
    for (int z : hs_.neighbors(x)) is_nbr[z] = 1;
    std::vector<std::pair<int, int>> K_updates; // (set, new K)
    for (int s = 0; s < hs_.set_count(); ++s) {
        if (sx_of[s] < 0 || hs_.set(s).size >= cfg_.k) continue;
        int sx = sx_of[s];
        int nusx_t = nu_set_[sx];
        for (int w : hs_.set(sx).verts)
            if (is_nbr[w]) ++nusx_t;
        int Ksx = hs_.set(sx).size < cfg_.k ? K_set_[sx] : 0;
        K_updates.push_back({s, std::max(K_set_[s], nusx_t + Ksx)});
    }
    for (auto& [s, k] : K_updates) K_set_[s] = k;
    for (int z : hs_.neighbors(x)) {
        ++nu_v_[z];
        for (int s : hs_.sets_of_vertex(z)) ++nu_set_[s];
    }

    // phase A: bring every consulted set to time t-1
    for (int s : consult) touch(s);
    for (int e : utops) touch_mark(e);

    // phase B: record the used vertex; non-local consulted sets absorb it
    phi_[x] = y;
    int img = hs_.vid(hs_.part_of(x), y);
    used_[img] = 1;
    --avail_[hs_.part_of(x)];
    used_log_.push_back({hs_.part_of(x), y});
    std::vector<char> is_local(hs_.set_count(), 0);
    for (int s : local) is_local[s] = 1;
    for (int s : consult)
        if (!is_local[s]) touch(s);

    // phase C: eager updates of the local family, ascending by size
    for (int s : local) {
        const auto& hset = hs_.set(s);
        const auto& sh = G_->shape(hset.copy);
        int posx = hs_.position_in(s, x);
        if (posx >= 0) {
            // keep only tuples through y at x's coordinate
            std::vector<long long> drop;
            F_[s].for_each([&](long long r) {
                if (sh.coord(r, posx) != y) drop.push_back(r);
            });
            for (long long r : drop) F_[s].reset(r);
            fsize_[s] -= static_cast<long long>(drop.size());
        } else if (sx_of[s] >= 0) {
            // slice of the lifted set at y
            int sx = sx_of[s];
            const auto& shx = G_->shape(hs_.set(sx).copy);
            Bitset nb(sh.total);
            long long cnt = 0;
            int px = sxpos_of[s];
            for_each_rank_fixed(shx, px, y, [&](long long r) {
                if (!F_[sx].test(r)) return;
                // strip x's coordinate
                long long rr = 0;
                int q = 0;
                for (int p = 0; p < hs_.set(sx).size; ++p) {
                    if (p == px) continue;
                    rr += shx.coord(r, p) * sh.stride[q++];
                }
                nb.set(rr);
                ++cnt;
            });
            F_[s] = std::move(nb);
            fsize_[s] = cnt;
        } else {
            // iterative construction from the updated strict subsets
            std::vector<long long> drop;
            std::vector<int> coords;
            F_[s].for_each([&](long long r) {
                sh.decode(r, coords);
                for (unsigned m = 1; m + 1 < (1u << hset.size); ++m) {
                    int sub = hs_.subset(s, m);
                    const auto& ssh = G_->shape(hs_.set(sub).copy);
                    long long rr = 0;
                    int q = 0;
                    for (int p = 0; p < hset.size; ++p)
                        if (m & (1u << p)) rr += coords[p] * ssh.stride[q++];
                    if (!F_[sub].test(rr)) {
                        drop.push_back(r);
                        return;
                    }
                }
            });
            for (long long r : drop) F_[s].reset(r);
            fsize_[s] -= static_cast<long long>(drop.size());
        }
        fsync_[s] = used_log_.size();
    }

    // phase D: marked-subset tracking for the affected tops
    for (int e : utops) {
        MarkTrack& mt = marks_[e];
        int t = hs_.top_sets()[e];
        int posx_top = hs_.position_in(t, x);
        bool x_in_unemb = posx_top >= 0 && (mt.unemb_mask & (1u << posx_top));
        if (x_in_unemb) {
            // M_{E^t,E}(t) = M_{E^{t-1},E}(t-1)(y)
            int posm = 0;
            for (int p = 0; p < posx_top; ++p)
                if (mt.unemb_mask & (1u << p)) ++posm;
            unsigned new_mask = mt.unemb_mask & ~(1u << posx_top);
            const auto& shm = G_->shape(mt.cur_copy);
            int new_copy = H_->R().subcopy(hs_.set(t).copy, new_mask);
            const auto& shn = G_->shape(new_copy);
            Bitset nm(shn.total);
            long long cnt = 0;
            for_each_rank_fixed(shm, posm, y, [&](long long r) {
                if (!mt.m.test(r)) return;
                long long rr = 0;
                int q = 0;
                for (int p = 0; p < H_->R().size(mt.cur_copy); ++p) {
                    if (p == posm) continue;
                    rr += shm.coord(r, p) * shn.stride[q++];
                }
                nm.set(rr);
                ++cnt;
            });
            mt.m = std::move(nm);
            mt.msize = cnt;
            mt.unemb_mask = new_mask;
            mt.cur_copy = new_copy;
        } else {
            // M stays on the same copy: intersect with the updated free set
            int et = hs_.subset(t, mt.unemb_mask);
            mt.m &= F_[et];
            mt.msize = mt.m.count();
        }
        mt.sync = used_log_.size();
    }

    // phase E: regimes and queue admissions. Next to the relative rule
    // (free set below queue_admission of its regime baseline) an absolute
    // rescue fires when a free set approaches the universal floor d_u: the
    // relative rule alone cannot trigger at a regime boundary, and desk
    // sizes leave no slack once a free set is down to a handful of images.
    // Two admission channels share the queue: the relative-shrink rule
    // (charged against the delta_Q abort budget) and the d_u-floor rescue,
    // which exists because at desk sizes a free set of two or three images
    // must be consumed immediately or part-mates drain it to nothing. The
    // rescue channel is accounted separately.
    auto admit = [&](int z) {
        if (phi_[z] >= 0 || in_queue_[z]) return;
        int s = hs_.singleton_set(z);
        if (s < 0) return;
        int part = hs_.part_of(z);
        double floor_abs = std::max(
            2.0, cfg_.universal_floor * static_cast<double>(G_->ground().size(part)));
        bool low_rel = static_cast<double>(fsize_[s]) <
                       cfg_.queue_admission * static_cast<double>(regime_size_[z]);
        bool low_abs = static_cast<double>(fsize_[s]) <= floor_abs;
        if (!low_rel && !low_abs) return;
#ifdef HE_DEBUG_QUEUE
        fprintf(stderr, "admit t=%lld z=%d part=%d fsize=%lld baseline=%lld rel=%d abs=%d\n",
                t_, z, part, fsize_[s], regime_size_[z], (int)low_rel, (int)low_abs);
#endif
        queue_.push_back(z);
        in_queue_[z] = 1;
        if (low_rel && !ever_queued_[z]) {
            ever_queued_[z] = 1;
            ++qcount_[part];
        }
        if (low_rel) ++tele_.queue_admissions;
        else ++tele_.rescue_admissions;
    };
    for (int z : hs_.neighbors(x)) {
        if (phi_[z] >= 0) continue;
        t_z_[z] = t_;
        regime_size_[z] = fsize_[hs_.singleton_set(z)];
        admit(z); // absolute rescue may fire even at the regime boundary
    }
    int pc = hs_.part_of(x);
    for (int o = 0; o < H_->ground().size(pc); ++o) {
        int z = hs_.vid(pc, o);
        if (z == x || is_nbr[z]) continue;
        admit(z);
    }

    // phase F: eager watch. Bring every set sharing x's part up to date and
    // rescue the members of any fully-unembedded set whose joint free set
    // has run out of slack: once a pair or triple is down to a couple of
    // joint images, only immediate embedding protects it from part-mates
    // draining those images.
    if (cfg_.eager_watch) {
        for (int s = 0; s < hs_.set_count(); ++s) {
            const auto& hset = hs_.set(s);
            if (hset.size < 2) continue;
            bool shares = false, unemb = true;
            for (int p = 0; p < hset.size && !shares; ++p)
                if (H_->R().singleton_at(hset.copy, p) == pc) shares = true;
            for (int w : hset.verts)
                if (phi_[w] >= 0) unemb = false;
            if (shares) touch(s);
            if (!unemb || fsize_[s] > cfg_.watch_floor) continue;
            for (int w : hset.verts) admit_force(w);
        }
    }

    // remove x from the order structures
    if (in_queue_[x]) {
        in_queue_[x] = 0; // popped lazily
    }
    if (in_jumpers_[x]) {
        jumpers_.erase(x);
        in_jumpers_[x] = 0;
    }
    if (!is_buffer_[x]) {
        --unembedded_nonbuffer_[pc];
        --unembedded_nonbuffer_total_;
    }
    for (int b : buffer_)
        if (hs_.adjacent(x, b)) --vn_unembedded_[b];
    ++tele_.total_steps;
}

// ---------------------------------------------------------------------------
// phases
// ---------------------------------------------------------------------------

EmbedOutcome Engine::run_iterative() {
    EmbedOutcome out;
    const auto& R = H_->R();
    long long endgame_at = 0;
    for (int pc : R.singleton_copies())
        endgame_at += static_cast<long long>(cfg_.endgame_fraction *
                                             static_cast<double>(H_->ground().size(pc)));
    while (unembedded_nonbuffer_total_ > 0) {
        long long left = 0;
        for (int v = 0; v < hs_.vertex_count(); ++v) left += phi_[v] < 0;
        if (left <= endgame_at) break; // hand over to the exact conclusion
        int x = select_next();
        if (x < 0) break;
        std::vector<int> ok = good_set(x);
        long long fx = fsize_[hs_.singleton_set(x)];
        if (ok.empty()) {
            out.stage = FailStage::EmptyGoodSet;
            std::ostringstream os;
            os << "empty good set for vertex " << x << " at time " << t_ + 1 << " ("
               << last_diag_.candidates << " candidates: " << last_diag_.density_failures
               << " density, " << last_diag_.floor_failures << " floor, "
               << last_diag_.danger_failures << " dangerous)";
            out.witness = os.str();
            out.termination_time = t_;
            out.telemetry = tele_;
            return out;
        }
        int y = ok[rng_.below(ok.size())];
        if (tele_.keep_steps) {
            StepRecord rec;
            rec.t = t_ + 1;
            rec.x = x;
            rec.free_size = fx;
            rec.ok_size = static_cast<long long>(ok.size());
            rec.y = y;
            rec.queue_size = static_cast<int>(queue_.size());
            rec.jumper_size = static_cast<int>(jumpers_.size());
            tele_.steps.push_back(rec);
        }
        if (fx > 0)
            tele_.min_ok_fraction = std::min(
                tele_.min_ok_fraction, static_cast<double>(ok.size()) / static_cast<double>(fx));
        apply_embedding(x, y);
        for (int pc : R.singleton_copies()) {
            if (static_cast<double>(qcount_[pc]) >
                cfg_.queue_abort * static_cast<double>(H_->ground().size(pc))) {
                out.stage = FailStage::QueueOverflow;
                out.witness = "cumulative queue overflow in part " + std::to_string(pc);
                out.termination_time = t_;
                out.telemetry = tele_;
                return out;
            }
        }
    }
    out.success = true;
    out.termination_time = t_;
    return out;
}

EmbedOutcome Engine::conclude_search() {
    EmbedOutcome out;
    std::vector<int> rem;
    for (int v = 0; v < hs_.vertex_count(); ++v)
        if (phi_[v] < 0) rem.push_back(v);
    int m = static_cast<int>(rem.size());

    // components of the live fragment: two unembedded vertices are coupled
    // beyond slot-disjointness only when some target set contains both
    std::vector<int> comp_of(hs_.vertex_count(), -1);
    std::vector<std::vector<int>> comps;
    for (int v : rem) {
        if (comp_of[v] >= 0) continue;
        std::vector<int> c{v};
        comp_of[v] = static_cast<int>(comps.size());
        for (size_t q = 0; q < c.size(); ++q)
            for (int w : hs_.neighbors(c[q]))
                if (phi_[w] < 0 && comp_of[w] < 0) {
                    comp_of[w] = static_cast<int>(comps.size());
                    c.push_back(w);
                }
        comps.push_back(std::move(c));
    }

    // per-component joint options, enumerated against the materialized free
    // sets; every constraint is component-local because any set with two
    // unembedded vertices stays inside one component
    std::vector<int> phi = phi_;
    std::vector<int> cc;
    long long nodes = 0;
    bool over = false;
    auto set_ok = [&](int s) {
        const auto& hset = hs_.set(s);
        cc.clear();
        for (int w : hset.verts) {
            if (phi[w] < 0) return true; // not yet decidable
            cc.push_back(phi[w]);
        }
        long long r = G_->shape(hset.copy).rank(cc);
        if (!G_->part(hset.copy).test(r)) return false;
        if (hset.size == cfg_.k && GM_->marked_defined(hset.copy) &&
            GM_->marks[hset.copy]->test(r))
            return false;
        if (gamma_ && s < static_cast<int>(gamma_->by_set.size()) && gamma_->by_set[s] &&
            !gamma_->by_set[s]->test(r))
            return false;
        return true;
    };
    struct Option {
        std::vector<int> ords;              ///< per component vertex
        std::vector<std::pair<int, int>> slots; ///< (part copy, ordinal)
    };
    // options are materialized up to a cap; components with more choices
    // than that are loose and get a direct search after the tight ones
    const size_t option_cap = 2000;
    std::vector<std::vector<Option>> options(comps.size());
    std::vector<char> lazy(comps.size(), 0);
    std::vector<std::vector<int>> dom_cache(hs_.vertex_count());
    for (int v : rem) {
        int s = hs_.singleton_set(v);
        touch(s);
        F_[s].for_each([&](long long o) { dom_cache[v].push_back(static_cast<int>(o)); });
        rng_.shuffle(dom_cache[v]);
    }
    for (size_t ci = 0; ci < comps.size() && !over; ++ci) {
        const auto& cv = comps[ci];
        bool capped = false;
        std::function<void(size_t)> enumerate = [&](size_t q) {
            if (over || capped) return;
            if (++nodes > cfg_.endgame_nodes) { over = true; return; }
            if (q == cv.size()) {
                Option op;
                for (int v : cv) {
                    op.ords.push_back(phi[v]);
                    op.slots.push_back({hs_.part_of(v), phi[v]});
                }
                options[ci].push_back(std::move(op));
                if (options[ci].size() > option_cap) capped = true;
                return;
            }
            int v = cv[q];
            for (int o : dom_cache[v]) {
                bool clash = false;
                for (size_t q2 = 0; q2 < q; ++q2)
                    if (hs_.part_of(cv[q2]) == hs_.part_of(v) && phi[cv[q2]] == o) clash = true;
                if (clash) continue;
                phi[v] = o;
                bool ok = true;
                for (int s : hs_.sets_of_vertex(v))
                    if (!set_ok(s)) { ok = false; break; }
                if (ok) enumerate(q + 1);
                phi[v] = -1;
                if (over || capped) return;
            }
        };
        enumerate(0);
        if (capped) {
            options[ci].clear();
            lazy[ci] = 1;
        }
#ifdef HE_DEBUG_QUEUE
        fprintf(stderr, "comp %zu size %zu: %zu options%s\n", ci, cv.size(),
                options[ci].size(), lazy[ci] ? " (lazy)" : "");
#endif
    }

    // exact selection: one option per component, slot-disjoint across parts
    std::vector<char> slot_used(hs_.vertex_count(), 0);
    std::vector<int> choice(comps.size(), -1);
    std::vector<std::vector<char>> dead(comps.size());
    for (size_t ci = 0; ci < comps.size(); ++ci)
        dead[ci].assign(options[ci].size(), 0);
    std::vector<int> alive(comps.size());
    for (size_t ci = 0; ci < comps.size(); ++ci)
        alive[ci] = static_cast<int>(options[ci].size());
    std::vector<char> comp_done(comps.size(), 0);
    size_t tight = 0;
    for (size_t ci = 0; ci < comps.size(); ++ci)
        if (lazy[ci]) comp_done[ci] = 1; // excluded from the exact phase
        else ++tight;
    std::vector<std::pair<int, int>> trail; // (component, option) killed
    std::function<bool(size_t)> rec = [&](size_t depth) -> bool {
        if (depth == tight) return true;
        if (++nodes > cfg_.endgame_nodes) { over = true; return false; }
        int best = -1;
        for (size_t ci = 0; ci < comps.size(); ++ci)
            if (!comp_done[ci] && (best < 0 || alive[ci] < alive[best]))
                best = static_cast<int>(ci);
        if (alive[best] == 0) return false;
        comp_done[best] = 1;
        for (size_t oi = 0; oi < options[best].size(); ++oi) {
            if (dead[best][oi] || over) continue;
            const Option& op = options[best][oi];
            for (auto& [pc, o] : op.slots) slot_used[hs_.vid(pc, o)] = 1;
            size_t mark = trail.size();
            bool wiped = false;
            for (size_t cj = 0; cj < comps.size() && !wiped; ++cj) {
                if (comp_done[cj]) continue;
                for (size_t oj = 0; oj < options[cj].size(); ++oj) {
                    if (dead[cj][oj]) continue;
                    bool conflict = false;
                    for (auto& [pc, o] : options[cj][oj].slots)
                        if (slot_used[hs_.vid(pc, o)]) { conflict = true; break; }
                    if (conflict) {
                        dead[cj][oj] = 1;
                        --alive[cj];
                        trail.push_back({static_cast<int>(cj), static_cast<int>(oj)});
                    }
                }
                if (alive[cj] == 0) wiped = true;
            }
            if (!wiped) {
                choice[best] = static_cast<int>(oi);
                if (rec(depth + 1)) return true;
                choice[best] = -1;
            }
            while (trail.size() > mark) {
                dead[trail.back().first][trail.back().second] = 0;
                ++alive[trail.back().first];
                trail.pop_back();
            }
            for (auto& [pc, o] : op.slots) slot_used[hs_.vid(pc, o)] = 0;
        }
        comp_done[best] = 0;
        return false;
    };
    bool solved = !over && rec(0);
    if (solved) {
        // loose components finish with a direct forward-checked search
        // against the slots the exact phase has claimed
        for (size_t ci = 0; ci < comps.size() && solved; ++ci) {
            if (!lazy[ci]) continue;
            const auto& cv = comps[ci];
            std::function<bool(size_t)> fill = [&](size_t q) -> bool {
                if (q == cv.size()) return true;
                if (++nodes > cfg_.endgame_nodes) { over = true; return false; }
                int v = cv[q];
                for (int o : dom_cache[v]) {
                    if (slot_used[hs_.vid(hs_.part_of(v), o)]) continue;
                    bool clash = false;
                    for (size_t q2 = 0; q2 < q; ++q2)
                        if (hs_.part_of(cv[q2]) == hs_.part_of(v) && phi[cv[q2]] == o)
                            clash = true;
                    if (clash) continue;
                    phi[v] = o;
                    bool ok = true;
                    for (int s : hs_.sets_of_vertex(v))
                        if (!set_ok(s)) { ok = false; break; }
                    if (ok && fill(q + 1)) return true;
                    phi[v] = -1;
                    if (over) return false;
                }
                return false;
            };
            if (fill(0)) {
                for (int z : cv) slot_used[hs_.vid(hs_.part_of(z), phi[z])] = 1;
            } else {
                solved = false;
            }
        }
    }
    if (solved) {
        for (size_t ci = 0; ci < comps.size(); ++ci) {
            if (lazy[ci]) {
                for (int z : comps[ci]) {
                    phi_[z] = phi[z];
                    used_[hs_.vid(hs_.part_of(z), phi[z])] = 1;
                    --avail_[hs_.part_of(z)];
                }
                continue;
            }
            const Option& op = options[ci][choice[ci]];
            for (size_t q = 0; q < comps[ci].size(); ++q) {
                int z = comps[ci][q];
                phi_[z] = op.ords[q];
                used_[hs_.vid(hs_.part_of(z), op.ords[q])] = 1;
                --avail_[hs_.part_of(z)];
            }
        }
        out.success = true;
        out.termination_time = t_;
        return out;
    }
    out.stage = over ? FailStage::ConclusionBudget : FailStage::ConclusionInfeasible;
    std::ostringstream os;
    os << "completion search over " << m << " vertices in " << comps.size() << " components "
       << (over ? "exceeded the node budget" : "proved the fragment infeasible") << " ("
       << nodes << " nodes)";
    out.witness = os.str();
    out.telemetry = tele_;
    return out;
}

EmbedOutcome Engine::conclude_sdr() {
    // a set is "live" when at least two of its vertices are unembedded;
    // with no live sets the remainder is an SDR problem, otherwise a
    // bounded completion search finishes the fragment
    bool live = false;
    for (int s = 0; s < hs_.set_count() && !live; ++s) {
        int un = 0;
        for (int w : hs_.set(s).verts) un += phi_[w] < 0;
        if (un >= 2) live = true;
    }
    if (live) return conclude_search();

    EmbedOutcome out;
    const auto& R = H_->R();
    std::map<int, int> top_index;
    for (size_t e = 0; e < hs_.top_sets().size(); ++e)
        top_index[hs_.top_sets()[e]] = static_cast<int>(e);
    for (int pc : R.singleton_copies()) {
        std::vector<int> left;
        for (int o = 0; o < H_->ground().size(pc); ++o)
            if (phi_[hs_.vid(pc, o)] < 0) left.push_back(hs_.vid(pc, o));
        if (left.empty()) continue;
        // available sets A'_x
        std::vector<Bitset> av;
        for (int x : left) {
            int s = hs_.singleton_set(x);
            touch(s);
            Bitset a = F_[s];
            for (int t : hs_.tops_of_vertex(x)) {
                int e = top_index[t];
                touch_mark(e);
                const MarkTrack& mt = marks_[e];
                if (mt.unemb_mask != (1u << hs_.position_in(t, x))) continue;
                a.andnot(mt.m);
            }
            av.push_back(std::move(a));
        }
        // maximum bipartite matching by augmenting paths
        int n = G_->ground().size(pc);
        std::vector<int> match_right(n, -1), match_left(left.size(), -1);
        std::function<bool(int, std::vector<char>&)> try_augment =
            [&](int li, std::vector<char>& vis) -> bool {
            for (long long yo = av[li].find_first(); yo >= 0; yo = av[li].find_next(yo)) {
                int y = static_cast<int>(yo);
                if (vis[y]) continue;
                vis[y] = 1;
                if (match_right[y] < 0 || try_augment(match_right[y], vis)) {
                    match_right[y] = li;
                    match_left[li] = y;
                    return true;
                }
            }
            return false;
        };
        int matched = 0;
        for (size_t li = 0; li < left.size(); ++li) {
            std::vector<char> vis(n, 0);
            if (try_augment(static_cast<int>(li), vis)) ++matched;
        }
        if (matched < static_cast<int>(left.size())) {
            // Hall witness: vertices reachable by alternating paths from an
            // unmatched one form a violating family
            int bad = -1;
            for (size_t li = 0; li < left.size(); ++li)
                if (match_left[li] < 0) bad = static_cast<int>(li);
            std::vector<char> seen_left(left.size(), 0), seen_right(n, 0);
            std::deque<int> dq{bad};
            seen_left[bad] = 1;
            while (!dq.empty()) {
                int li = dq.front();
                dq.pop_front();
                av[li].for_each([&](long long yo) {
                    int y = static_cast<int>(yo);
                    if (seen_right[y]) return;
                    seen_right[y] = 1;
                    if (match_right[y] >= 0 && !seen_left[match_right[y]]) {
                        seen_left[match_right[y]] = 1;
                        dq.push_back(match_right[y]);
                    }
                });
            }
            std::ostringstream os;
            os << "hall violation in part " << pc << ": vertices {";
            long long nb = 0;
            for (size_t li = 0; li < left.size(); ++li)
                if (seen_left[li]) os << ' ' << left[li];
            for (int y = 0; y < n; ++y) nb += seen_right[y];
            os << " } have only " << nb << " available images";
            out.stage = FailStage::SdrHallFailure;
            out.witness = os.str();
            out.telemetry = tele_;
            return out;
        }
        for (size_t li = 0; li < left.size(); ++li) {
            int x = left[li];
            int y = match_left[li];
            phi_[x] = y;
            used_[hs_.vid(pc, y)] = 1;
            --avail_[pc];
        }
    }
    out.success = true;
    out.termination_time = t_;
    return out;
}

EmbedOutcome Engine::run() {
    EmbedOutcome out;
    std::string w;
    FailStage st = select_buffer(&w);
    if (st == FailStage::None) st = init_state(&w);
    if (st != FailStage::None) {
        out.stage = st;
        out.witness = w;
        return out;
    }
    out = run_iterative();
    if (!out.success) return out;
    out = conclude_sdr();
    if (!out.success) return out;
    out.phi = phi_;
    out.telemetry = tele_;
    return out;
}

// ---------------------------------------------------------------------------
// top-level embed + validation
// ---------------------------------------------------------------------------

EmbedOutcome embed(const Complex& H, const MarkedComplex& GM, const ColouredSets* gamma,
                   const ParamConfig& cfg, uint64_t seed, bool keep_steps) {
    Engine eng(H, GM, gamma, cfg, seed);
    eng.telemetry().keep_steps = keep_steps;
    EmbedOutcome out = eng.run();
    if (!out.success) return out;
    auto check = validate_embedding(H, GM, gamma, out.phi);
    if (!check.ok) {
        out.success = false;
        out.stage = FailStage::ValidationFailure;
        out.witness = check.what;
    }
    return out;
}

EmbeddingCheck validate_embedding(const Complex& H, const MarkedComplex& GM,
                                  const ColouredSets* gamma, const std::vector<int>& phi) {
    EmbeddingCheck out;
    const Complex& G = GM.complex;
    HSets hs(H);
    if (static_cast<int>(phi.size()) != hs.vertex_count()) {
        out.what = "phi has wrong arity";
        return out;
    }
    const auto& R = H.R();
    for (int pc : R.singleton_copies()) {
        std::vector<char> hit(G.ground().size(pc), 0);
        for (int o = 0; o < H.ground().size(pc); ++o) {
            int y = phi[hs.vid(pc, o)];
            if (y < 0 || y >= G.ground().size(pc)) {
                out.what = "phi not total on part " + std::to_string(pc);
                return out;
            }
            if (hit[y]) {
                out.what = "phi not injective on part " + std::to_string(pc);
                return out;
            }
            hit[y] = 1;
        }
    }
    std::vector<int> coords;
    for (int s = 0; s < hs.set_count(); ++s) {
        const auto& hset = hs.set(s);
        coords.clear();
        for (int v : hset.verts) coords.push_back(phi[v]);
        if (!G.defined(hset.copy) ||
            !G.part(hset.copy).test(G.shape(hset.copy).rank(coords))) {
            out.what = "image of a target set is not an edge (set " + std::to_string(s) + ")";
            return out;
        }
        if (hset.size == R.max_size() && GM.marked_defined(hset.copy) &&
            GM.marks[hset.copy]->test(G.shape(hset.copy).rank(coords))) {
            out.what = "image of a top-level set is marked (set " + std::to_string(s) + ")";
            return out;
        }
        if (gamma && s < static_cast<int>(gamma->by_set.size()) && gamma->by_set[s] &&
            !gamma->by_set[s]->test(G.shape(hset.copy).rank(coords))) {
            out.what = "restricted position violated (set " + std::to_string(s) + ")";
            return out;
        }
    }
    out.ok = true;
    return out;
}

std::string transcript_json(const EmbedOutcome& out, const ParamConfig& cfg, uint64_t seed) {
    std::ostringstream os;
    nlohmann::ordered_json hdr;
    hdr["record"] = "header";
    hdr["seed"] = seed;
    hdr["k"] = cfg.k;
    hdr["degree_bound"] = cfg.degree_bound;
    hdr["buffer_fraction"] = cfg.buffer_fraction;
    hdr["buffer_distance"] = cfg.buffer_distance;
    hdr["queue_abort"] = cfg.queue_abort;
    hdr["queue_admission"] = cfg.queue_admission;
    hdr["universal_floor"] = cfg.universal_floor;
    hdr["count_slack"] = cfg.count_slack;
    hdr["c"] = cfg.c;
    hdr["c_prime"] = cfg.c_prime;
    os << hdr.dump() << "\n";
    for (const auto& st : out.telemetry.steps) {
        nlohmann::ordered_json j;
        j["record"] = "step";
        j["t"] = st.t;
        j["x"] = st.x;
        j["free"] = st.free_size;
        j["ok"] = st.ok_size;
        j["y"] = st.y;
        j["queue"] = st.queue_size;
        j["jumpers"] = st.jumper_size;
        os << j.dump() << "\n";
    }
    nlohmann::ordered_json tail;
    tail["record"] = out.success ? "success" : "failure";
    tail["stage"] = fail_stage_name(out.stage);
    tail["witness"] = out.witness;
    tail["termination_time"] = out.termination_time;
    os << tail.dump() << "\n";
    return os.str();
}

} // namespace hyperembed
