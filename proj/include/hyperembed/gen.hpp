#ifndef HYPEREMBED_GEN_HPP
#define HYPEREMBED_GEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hyperembed/complex.hpp"
#include "hyperembed/rng.hpp"

namespace hyperembed {

/// Instance description for the seeded generators.
struct InstanceSpec {
    int k = 3;
    int r = 3;
    std::vector<int> part_sizes;            ///< one entry, or one per part
    std::map<int, double> level_density;    ///< by tuple size (2..k); missing = 1
    double theta = 0.0;                     ///< mark rate on top-level edges
    std::string family;                     ///< target family tag (see gen_target)
    std::vector<int> family_sizes;          ///< e.g. complete-partite part sizes
    int degree_bound = 3;                   ///< for the random-greedy family
    double c = 0.0, c_prime = 0.5;          ///< restricted-position fractions
    uint64_t seed = 0;

    std::vector<int> sizes() const;
};

/// Insert one edge given as (part copy, ordinal) pairs ordered by base
/// index, together with its full down-set.
void add_edge_closure(Complex& H, const std::vector<std::pair<int, int>>& verts);

/// Level-by-level independent inclusion: singleton parts are full; each
/// tuple of the previous level's star set is kept independently with the
/// level density. All parts defined up to size k.
Complex gen_regular_complex(const InstanceSpec& spec);
Complex gen_regular_complex(std::shared_ptr<const IndexComplex> R,
                            std::shared_ptr<const Ground> ground,
                            const std::map<int, double>& level_density, uint64_t seed);

/// Independent marking of top-level edges at rate theta.
MarkedComplex gen_marks(Complex G, double theta, uint64_t seed);

/// Bounded-degree target complexes. Families:
///   "matching"        disjoint k-edges covering the parts (k=2: balanced
///                     cross-part pairing; k=r: one edge per transversal row)
///   "clique-factor"   disjoint K_r^(k)-closures, one vertex per part
///   "loose-cycle"     k=3 loose cycle threaded through 3 parts
///   "partite-factor"  vertex-disjoint complete-partite copies with
///                     family_sizes vertices from consecutive parts
///   "random-greedy"   random k-edges while every vertex keeps top-level
///                     degree <= degree_bound
/// Unbalanced leftovers are trimmed and reported via *leftover.
Complex gen_target(const std::string& family, std::shared_ptr<const IndexComplex> R,
                   std::shared_ptr<const Ground> ground, const InstanceSpec& spec,
                   uint64_t seed, int* leftover = nullptr);

/// Restricted positions: X_* of fraction <= c per part, each x getting a
/// random admissible image set of density > c_prime.
struct VertexRestriction {
    int part_copy = -1;
    int ord = -1;     ///< target-side vertex ordinal (in H)
    Bitset allowed;   ///< subset of the image part
};
std::vector<VertexRestriction> gen_restrictions(const Complex& H, const Complex& G,
                                                double c, double c_prime, uint64_t seed);

/// Planted packing instance: clusters per part, graph-cells per cluster
/// pair, dense triple-cells planted over disjoint triads, then noise flips.
struct CellSystem {
    int parts = 3;
    int clusters_per_part = 0;      ///< a_1
    int cluster_size = 0;           ///< n_1
    std::vector<std::vector<int>> cluster_of; ///< per part: cluster id per ordinal
    int cells_per_pair = 1;
    /// cell id per pair-tuple, keyed by (part a, part b) pair index a<b
    std::vector<std::vector<int>> pair_cell;
    /// planted triads: (cluster in part0, part1, part2) + chosen cell per pair
    struct Triad {
        int cl[3];
        int cell[3]; ///< cell chosen for pair (0,1), (0,2), (1,2)
    };
    std::vector<Triad> planted;
    long long pair_index(int a, int b, long long rank) const;
};

struct PlantedInstance {
    Complex g0;        ///< the noisy 3-graph complex (what packing must cover)
    Complex planted;   ///< the clean planted complex G'
    MarkedComplex gm;  ///< planted complex with M = planted \ g0 marked
    CellSystem cells;
};

struct PlantSpec {
    int clusters_per_part = 6;
    int cluster_size = 30;
    double cell_density = 0.5;
    int cells_per_pair = 1;
    double noise = 0.0;
    uint64_t seed = 0;
};

PlantedInstance plant_packing_instance(const PlantSpec& spec);

// -- randomized helpers shared by tests --

/// Arbitrary (possibly partial) random complex: a random subset of copies
/// defined, each defined level subsampled from the star set of what is
/// below. Always passes validate().
Complex random_complex(std::shared_ptr<const IndexComplex> R,
                       std::shared_ptr<const Ground> ground, Rng& rng,
                       double define_prob = 0.8);

/// Random subcomplex of H: some parts undefined, defined parts subsampled
/// and re-closed downward.
Complex random_subcomplex(const Complex& H, Rng& rng, double keep_prob = 0.7,
                          double define_prob = 0.7);

} // namespace hyperembed

#endif
