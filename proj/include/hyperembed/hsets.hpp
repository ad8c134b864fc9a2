#ifndef HYPEREMBED_HSETS_HPP
#define HYPEREMBED_HSETS_HPP

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "hyperembed/complex.hpp"

namespace hyperembed {

/// Catalogue of the sets of a target complex H, with incidence structure:
/// the embedding engine and its oracle key free sets by these ids.
/// Vertices get dense ids across parts; sets of all sizes >= 1 get set ids.
class HSets {
public:
    struct HSet {
        int copy = -1;
        long long rank = -1;
        std::vector<int> verts; ///< vertex ids in positional order
        int size = 0;
    };

    explicit HSets(const Complex& H);

    const Complex& H() const { return *H_; }

    // vertices
    int vertex_count() const { return nverts_; }
    int vid(int part_copy, int ord) const { return vid_base_[part_copy] + ord; }
    int part_of(int v) const { return part_of_[v]; }
    int ord_of(int v) const { return ord_of_[v]; }
    const std::vector<int>& neighbors(int v) const { return vn_[v]; }
    bool adjacent(int u, int v) const {
        return std::binary_search(vn_[u].begin(), vn_[u].end(), v);
    }

    // sets
    int set_count() const { return static_cast<int>(sets_.size()); }
    const HSet& set(int s) const { return sets_[s]; }
    const std::vector<int>& top_sets() const { return top_sets_; }
    const std::vector<int>& sets_of_vertex(int v) const { return sets_of_vertex_[v]; }
    const std::vector<int>& tops_of_vertex(int v) const { return tops_of_vertex_[v]; }
    int singleton_set(int v) const { return singleton_of_vertex_[v]; }

    /// Set id by copy and rank; -1 if absent from H.
    int find(int copy, long long rank) const;

    /// Sub-set id for a position mask of set s (present by downward closure).
    int subset(int s, unsigned mask) const { return subset_ids_[s][mask]; }

    /// Ids of sets strictly containing s (as vertex sets).
    const std::vector<int>& supersets(int s) const { return superset_ids_[s]; }

    /// Position of vertex v within set s, or -1.
    int position_in(int s, int v) const;

    /// Maximum number of top-level sets containing any single vertex.
    int max_top_degree() const { return max_top_degree_; }

    /// Walk distance between two vertices, capped at `cap` (returns cap+1
    /// when further apart or disconnected).
    int distance_capped(int u, int v, int cap) const;

    /// All vertices within walk distance `radius` of v (including v).
    std::vector<int> ball(int v, int radius) const;

private:
    const Complex* H_;
    int nverts_ = 0;
    std::vector<int> vid_base_, part_of_, ord_of_;
    std::vector<HSet> sets_;
    std::vector<std::unordered_map<long long, int>> by_rank_;
    std::vector<std::vector<int>> sets_of_vertex_, tops_of_vertex_, vn_;
    std::vector<int> singleton_of_vertex_, top_sets_;
    std::vector<std::vector<int>> subset_ids_, superset_ids_;
    int max_top_degree_ = 0;
};

} // namespace hyperembed

#endif
