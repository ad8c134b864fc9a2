#include "hyperembed/hsets.hpp"

#include <algorithm>
#include <deque>

namespace hyperembed {

HSets::HSets(const Complex& H) : H_(&H) {
    const auto& R = H.R();
    vid_base_.assign(R.copy_count(), -1);
    for (int s : R.singleton_copies()) {
        vid_base_[s] = nverts_;
        nverts_ += H.ground().size(s);
    }
    part_of_.resize(nverts_);
    ord_of_.resize(nverts_);
    for (int s : R.singleton_copies())
        for (int o = 0; o < H.ground().size(s); ++o) {
            part_of_[vid_base_[s] + o] = s;
            ord_of_[vid_base_[s] + o] = o;
        }

    by_rank_.resize(R.copy_count());
    for (int c = 0; c < R.copy_count(); ++c) {
        if (!H.defined(c) || R.size(c) == 0) continue;
        for_each_tuple(H.part(c), H.shape(c), [&](long long r, const std::vector<int>& coords) {
            HSet hs;
            hs.copy = c;
            hs.rank = r;
            hs.size = R.size(c);
            hs.verts.resize(coords.size());
            for (size_t p = 0; p < coords.size(); ++p)
                hs.verts[p] = vid(R.singleton_at(c, static_cast<int>(p)), coords[p]);
            by_rank_[c][r] = static_cast<int>(sets_.size());
            sets_.push_back(std::move(hs));
        });
    }

    sets_of_vertex_.assign(nverts_, {});
    tops_of_vertex_.assign(nverts_, {});
    singleton_of_vertex_.assign(nverts_, -1);
    subset_ids_.resize(sets_.size());
    superset_ids_.resize(sets_.size());
    int k = R.max_size();
    for (int s = 0; s < set_count(); ++s) {
        const auto& hs = sets_[s];
        for (int v : hs.verts) sets_of_vertex_[v].push_back(s);
        if (hs.size == 1) singleton_of_vertex_[hs.verts[0]] = s;
        if (hs.size == k) {
            top_sets_.push_back(s);
            for (int v : hs.verts) tops_of_vertex_[v].push_back(s);
        }
        // subset table via the index complex sub-copies
        int m = hs.size;
        subset_ids_[s].assign(1u << m, -1);
        for (unsigned mask = 0; mask < (1u << m); ++mask) {
            if (mask == 0) continue;
            int sub = R.subcopy(hs.copy, mask);
            const auto& ssh = H.shape(sub);
            long long rr = 0;
            int q = 0;
            for (int p = 0; p < m; ++p)
                if (mask & (1u << p)) rr += ord_of_[hs.verts[p]] * ssh.stride[q++];
            auto it = by_rank_[sub].find(rr);
            subset_ids_[s][mask] = it == by_rank_[sub].end() ? -1 : it->second;
        }
    }
    for (int s = 0; s < set_count(); ++s)
        for (unsigned mask = 1; mask + 1 < (1u << sets_[s].size); ++mask) {
            int sub = subset_ids_[s][mask];
            if (sub >= 0) superset_ids_[sub].push_back(s);
        }

    vn_.assign(nverts_, {});
    for (const auto& hs : sets_) {
        if (hs.size < 2) continue;
        for (int a : hs.verts)
            for (int b : hs.verts)
                if (a != b) vn_[a].push_back(b);
    }
    for (auto& l : vn_) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }

    max_top_degree_ = 0;
    for (int v = 0; v < nverts_; ++v)
        max_top_degree_ =
            std::max<int>(max_top_degree_, static_cast<int>(tops_of_vertex_[v].size()));
}

int HSets::find(int copy, long long rank) const {
    auto it = by_rank_[copy].find(rank);
    return it == by_rank_[copy].end() ? -1 : it->second;
}

int HSets::position_in(int s, int v) const {
    const auto& vs = sets_[s].verts;
    for (size_t p = 0; p < vs.size(); ++p)
        if (vs[p] == v) return static_cast<int>(p);
    return -1;
}

int HSets::distance_capped(int u, int v, int cap) const {
    if (u == v) return 0;
    std::deque<std::pair<int, int>> q{{u, 0}};
    std::vector<char> vis(nverts_, 0);
    vis[u] = 1;
    while (!q.empty()) {
        auto [w, d] = q.front();
        q.pop_front();
        if (d == cap) continue;
        for (int z : vn_[w]) {
            if (vis[z]) continue;
            if (z == v) return d + 1;
            vis[z] = 1;
            q.push_back({z, d + 1});
        }
    }
    return cap + 1;
}

std::vector<int> HSets::ball(int v, int radius) const {
    std::vector<int> out{v};
    std::vector<char> vis(nverts_, 0);
    vis[v] = 1;
    std::deque<std::pair<int, int>> q{{v, 0}};
    while (!q.empty()) {
        auto [w, d] = q.front();
        q.pop_front();
        if (d == radius) continue;
        for (int z : vn_[w])
            if (!vis[z]) {
                vis[z] = 1;
                out.push_back(z);
                q.push_back({z, d + 1});
            }
    }
    return out;
}

} // namespace hyperembed
