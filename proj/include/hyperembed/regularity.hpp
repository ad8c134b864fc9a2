#ifndef HYPEREMBED_REGULARITY_HPP
#define HYPEREMBED_REGULARITY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hyperembed/complex.hpp"

namespace hyperembed {

/// Regularity measurement result. In sampled mode the deviation is a lower
/// bound on the true irregularity (witnessed by the best subcomplex found),
/// never a certificate of regularity.
struct RegularityReport {
    int copy = -1;
    double deviation = 0.0;
    enum class Method { Exact, Sampled } method = Method::Sampled;
    long long samples = 0;
    uint64_t seed = 0;
    bool lower_bound_only = true;
    std::string witness;
};

/// Exact partite homomorphism density of J in G by backtracking over all
/// partite maps from J's ground into G's. J and G must share the index
/// complex; J's ground is typically tiny. Throws when the map space exceeds
/// the budget.
double hom_density(const Complex& J, const Complex& G, double budget = 1e8);

/// Exact triangle count against the product of absolute pair densities.
struct TriangleCheck {
    long long count = 0;
    double predicted = 0.0;
    double deviation = 0.0; ///< |count - predicted| / (n_i n_j n_k)
};
TriangleCheck triangle_check(const Complex& G, int i, int j, int k);

struct DeviationOptions {
    bool exact = false;
    double budget = 1e8;     ///< exact mode: 2^{n_i+n_j} cap
    double min_frac = 0.1;   ///< star-set fraction cutoff for subcomplexes
    int samples = 200;       ///< sampled mode draws
    uint64_t seed = 0;
};

/// Deviation of relative density over large subcomplexes. Exact mode
/// enumerates vertex-subset pairs (pair parts over small grounds only);
/// sampled mode draws random vertex-subset and edge-subsampled
/// subcomplexes and reports the maximum deviation observed.
RegularityReport regularity_deviation(const Complex& G, int c, const DeviationOptions& opt);

/// Vertices of part i whose degree into the target part differs from the
/// average by more than tol times the average row of the target's star
/// set; for top-level targets optionally also flags vertices whose
/// neighbourhood part looks irregular under sampling.
struct TypicalDegreeReport {
    std::vector<int> atypical; ///< ordinals in part i
    double fraction = 0.0;
    double max_rel_dev = 0.0;
};
TypicalDegreeReport typical_degree_report(const Complex& G, int part_copy, int target_copy,
                                          double tol, int reg_samples = 0,
                                          uint64_t seed = 0);

/// Samples tuples P of part cA and counts extensions v in the target part
/// with P_S + v an edge for every S in I; reports the fraction of samples
/// outside (1 +- tol) of the predicted size.
struct NeighborhoodCountCheck {
    double bad_fraction = 0.0;
    long long samples = 0;
    double predicted = 0.0;
};
NeighborhoodCountCheck neighborhood_count_check(const Complex& G, int cA,
                                                const std::vector<int>& I, int target_part,
                                                double tol, int samples, uint64_t seed);

std::string report_to_json(const RegularityReport& rep);

} // namespace hyperembed

#endif
