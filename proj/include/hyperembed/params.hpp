#ifndef HYPEREMBED_PARAMS_HPP
#define HYPEREMBED_PARAMS_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperembed {

/// Runtime constant hierarchy for the embedding algorithm. The asymptotic
/// analysis fixes only the ordering of these constants; the numeric
/// defaults here are desk-scale calibration values and every one of them
/// can be overridden.
struct ParamConfig {
    int k = 3;
    int degree_bound = 3;        ///< D
    int index_degree_bound = 64; ///< D_R
    double size_ratio = 2.0;     ///< C

    double buffer_fraction = 0.05;  ///< delta_B
    int buffer_distance = 9;        ///< 4 when k=2, 9 otherwise
    double queue_abort = 0.25;      ///< delta_Q
    double queue_admission = 0.30;  ///< delta'_Q
    double universal_floor = 0.04;  ///< d_u
    double c = 0.02;                ///< restricted-position fraction
    double c_prime = 0.5;           ///< restricted-position density floor

    /// Density-evolution tolerance grid over (i, j), i in [0, k^3 D],
    /// j in [0, 3]; lexicographically monotone.
    std::vector<std::vector<double>> eps_grid;
    double eps_star = 0.35;

    /// Interleaved marking ceilings theta_i < theta'_i < theta_{i+1}.
    std::vector<double> theta_sched, theta_prime_sched;
    double theta_star = 0.5;

    /// Integer-granularity slack added to the density-evolution tolerance:
    /// counts are integers, so a pure multiplicative band is empty once
    /// expected sizes drop to a handful of tuples.
    double count_slack = 2.0;

    /// Eagerly apply used-vertex deletions to every affected set and rescue
    /// the vertices of any unembedded set whose joint free set runs low.
    /// When false, non-local sets defer deletions to a log applied on first
    /// touch and only singleton free sets are watched.
    bool eager_watch = true;
    double watch_floor = 2.0; ///< joint-size rescue trigger

    /// The iterative phase hands over to the exact conclusion once the
    /// unembedded remainder drops to this fraction of the vertices; the
    /// conclusion runs a distinct-representatives matching when the
    /// remainder is independent and a bounded completion search otherwise.
    double endgame_fraction = 0.30;
    long long endgame_nodes = 4000000;

    /// Telemetry-only constants (never drive control flow).
    double p0 = 1e-3, p = 1e-2, gamma = 5e-3;

    /// Sampled-regularity telemetry cadence; 0 disables.
    int telemetry_regularity_every = 0;

    int eps_rows() const { return static_cast<int>(eps_grid.size()); }

    double eps(int i, int j = 0) const {
        if (eps_grid.empty()) return eps_star;
        i = std::min(std::max(i, 0), eps_rows() - 1);
        j = std::min(std::max(j, 0), 3);
        return eps_grid[i][j];
    }
    double theta_at(int i) const {
        if (theta_sched.empty()) return theta_star;
        return theta_sched[std::min<size_t>(i, theta_sched.size() - 1)];
    }
    double theta_prime_at(int i) const {
        if (theta_prime_sched.empty()) return theta_star;
        return theta_prime_sched[std::min<size_t>(i, theta_prime_sched.size() - 1)];
    }

    /// Default schedules for an instance: the eps grid ramps geometrically
    /// from eps_lo to eps_hi, reaching eps_hi by the row indices that
    /// actually occur (about 2kD); the theta schedule runs from 2*theta by
    /// factors of 1.5, capped at 0.45.
    static ParamConfig defaults(int k, int degree_bound, double theta = 0.02,
                                double eps_lo = 0.10, double eps_hi = 0.50) {
        ParamConfig cfg;
        cfg.k = k;
        cfg.degree_bound = std::max(1, degree_bound);
        cfg.buffer_distance = k == 2 ? 4 : 9;
        int rows = k * k * k * cfg.degree_bound + 1;
        cfg.eps_grid.assign(rows, std::vector<double>(4, 0.0));
        int ramp = 4 * (2 * k * cfg.degree_bound);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < 4; ++j) {
                double t = std::min(1.0, double(i * 4 + j) / double(ramp));
                cfg.eps_grid[i][j] = eps_lo * std::pow(eps_hi / eps_lo, t);
            }
        cfg.eps_star = eps_hi;
        double t = std::max(2.0 * theta, 1e-4);
        for (int i = 0; i < rows; ++i) {
            cfg.theta_sched.push_back(std::min(t, 0.45));
            t *= 1.5;
            cfg.theta_prime_sched.push_back(std::min(t, 0.45));
            t *= 1.5;
        }
        cfg.validate();
        return cfg;
    }

    void validate() const {
        auto in01 = [](double v) { return v > 0.0 && v < 1.0; };
        if (!in01(buffer_fraction) || !in01(queue_abort) || !in01(queue_admission) ||
            !in01(universal_floor) || !in01(c_prime) || c < 0.0 || c >= 1.0)
            throw std::invalid_argument("params: ratios must lie in (0,1)");
        if (queue_admission <= queue_abort)
            throw std::invalid_argument("params: queue admission must exceed queue abort");
        double prev = 0.0;
        for (const auto& row : eps_grid)
            for (double v : row) {
                if (v < prev) throw std::invalid_argument("params: eps grid not monotone");
                prev = v;
            }
        for (size_t i = 0; i < theta_sched.size(); ++i) {
            if (theta_prime_sched[i] < theta_sched[i] ||
                (i + 1 < theta_sched.size() && theta_sched[i + 1] < theta_prime_sched[i]))
                throw std::invalid_argument("params: theta schedules not interleaved");
        }
    }
};

} // namespace hyperembed

#endif
