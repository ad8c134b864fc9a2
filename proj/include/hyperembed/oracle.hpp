#ifndef HYPEREMBED_ORACLE_HPP
#define HYPEREMBED_ORACLE_HPP

#include <vector>

#include "hyperembed/complex.hpp"
#include "hyperembed/engine.hpp"
#include "hyperembed/hsets.hpp"

namespace hyperembed {

/// From-scratch free sets for a partial embedding, computed by the closed
/// characterization rather than incrementally:
///   P is free for S iff embedded coordinates match phi, unembedded
///   coordinates avoid used images, and for every sub-tuple S' and every
///   edge E containing S' whose remainder is fully embedded, phi(E - S')
///   together with P's S'-coordinates is an edge of the restricted host.
/// Marked subsets come straight from their definition.
struct OracleState {
    std::vector<Bitset> free_sets;      ///< by H-set id
    std::vector<Bitset> marked;         ///< by top-set index, over the E^t copy
    std::vector<unsigned> unemb_mask;   ///< by top-set index
};

/// phi: by H vertex id, image ordinal or -1. Throws if phi is not a valid
/// partial embedding of H into G[Gamma].
OracleState oracle_free_sets(const HSets& hs, const MarkedComplex& GM,
                             const ColouredSets* gamma, const std::vector<int>& phi);

} // namespace hyperembed

#endif
