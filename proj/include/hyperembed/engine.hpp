#ifndef HYPEREMBED_ENGINE_HPP
#define HYPEREMBED_ENGINE_HPP

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyperembed/complex.hpp"
#include "hyperembed/gen.hpp"
#include "hyperembed/hsets.hpp"
#include "hyperembed/params.hpp"
#include "hyperembed/rng.hpp"

namespace hyperembed {

/// Restricted positions as an H-coloured complex: per H-set image
/// constraints. Only sets with a constraint carry a bitset.
struct ColouredSets {
    std::vector<std::optional<Bitset>> by_set; ///< by H-set id

    static ColouredSets from_vertex_restrictions(const HSets& hs,
                                                 const std::vector<VertexRestriction>& items);
    bool empty() const;
};

enum class FailStage {
    None,
    Hypothesis,
    BufferInfeasible,
    EmptyGoodSet,
    QueueOverflow,
    SdrHallFailure,
    ConclusionInfeasible,
    ConclusionBudget,
    ValidationFailure,
};
const char* fail_stage_name(FailStage s);

struct StepRecord {
    long long t = 0;
    int x = -1;
    long long free_size = 0;
    long long ok_size = 0;
    int y = -1;
    int queue_size = 0;
    int jumper_size = 0;
    int nu_prime_max_touched = 0;
};

struct Telemetry {
    bool keep_steps = false;
    std::vector<StepRecord> steps;
    long long total_steps = 0;
    long long queue_admissions = 0;
    long long rescue_admissions = 0;
    long long jumper_count = 0;
    long long density_upper_outliers = 0;
    double min_ok_fraction = 1.0;
    /// sampled regularity observations (cadence-driven), as (t, deviation)
    std::vector<std::pair<long long, double>> regularity_samples;
};

struct EmbedOutcome {
    bool success = false;
    FailStage stage = FailStage::None;
    std::string witness;
    std::vector<int> phi; ///< by H vertex id, image ordinal in the same part
    long long termination_time = 0;
    Telemetry telemetry;
};

/// Randomized greedy embedding engine: one instance runs one embedding.
/// The graph case is the k=2 configuration (buffer distance 4, marks
/// usually empty); the general case handles marks, restricted positions
/// and multicomplex-indexed inputs.
class Engine {
public:
    /// H and the marked host must share the index complex and part sizes.
    Engine(const Complex& H, const MarkedComplex& GM, const ColouredSets* gamma,
           const ParamConfig& cfg, uint64_t seed);

    /// Greedy buffer selection: floor(delta_B |X_i|) per part at mutual
    /// distance >= cfg.buffer_distance, avoiding restricted vertices and
    /// their neighbourhoods. Fails (stage BufferInfeasible) naming the part
    /// that ran out.
    FailStage select_buffer(std::string* witness = nullptr);

    /// Hypothesis checks and F_S(0) = G[Gamma]_S; builds the list.
    FailStage init_state(std::string* witness = nullptr);

    /// Selection rule: jumpers, then queue (with buffer-neighbourhood
    /// jumping), then the list head.
    int select_next();

    /// Candidate images of x that pass the density-evolution clause and are
    /// not dangerous for any tracked edge.
    std::vector<int> good_set(int x);

    /// Commit x -> y: eager local updates, lazy deletion elsewhere, marked
    /// subset tracking, queue admissions.
    void apply_embedding(int x, int y);

    /// Iterate until only buffer vertices remain (or abort).
    EmbedOutcome run_iterative();

    /// Conclusion: a system of distinct representatives when the remainder
    /// is independent, a bounded completion search otherwise.
    EmbedOutcome conclude_sdr();

    /// Full pipeline: buffer, init, iterate, conclude, validate.
    EmbedOutcome run();

    // --- introspection (tests, oracle comparison) ---
    const HSets& hsets() const { return hs_; }
    const std::vector<int>& phi() const { return phi_; }
    long long now() const { return t_; }
    const std::vector<int>& buffer() const { return buffer_; }
    Telemetry& telemetry() { return tele_; }

    /// Free set of an H-set with pending deletions applied (const view).
    Bitset materialized_free(int set_id) const;
    /// Marked subset tracked for top set index e (position in top_sets()).
    Bitset materialized_mark(int top_index) const;
    unsigned unembedded_mask(int top_index) const;
    long long free_size(int set_id) const;

private:
    struct MarkTrack {
        unsigned unemb_mask = 0;
        int cur_copy = -1;
        Bitset m;
        long long msize = 0;
        size_t sync = 0;
    };

    // setup
    const Complex* H_;
    const Complex* G_;
    const MarkedComplex* GM_;
    const ColouredSets* gamma_;
    ParamConfig cfg_;
    Rng rng_;
    HSets hs_;
    std::vector<char> restricted_ball_; ///< X_* plus its neighbourhoods

    // free sets
    std::vector<Bitset> F_;
    std::vector<long long> fsize_;
    std::vector<size_t> fsync_;
    std::vector<MarkTrack> marks_;
    std::vector<std::pair<int, int>> used_log_; ///< (part copy, ordinal)

    // embedding state
    long long t_ = 0;
    std::vector<int> phi_;
    std::vector<char> used_;     ///< by image vertex id
    std::vector<int> unembedded_nonbuffer_;  // count per part copy
    long long unembedded_nonbuffer_total_ = 0;
    std::vector<int> avail_;     ///< per part copy: unused image count
    std::vector<int> list_;
    size_t list_head_ = 0;
    std::deque<int> queue_;
    std::set<int> jumpers_;
    std::vector<char> in_queue_, ever_queued_, in_jumpers_;
    std::vector<int> qcount_;    ///< cumulative queue count per part copy
    std::vector<int> buffer_;
    std::vector<char> is_buffer_;
    std::vector<int> buffer_near_;     ///< unique near buffer vid or -1
    std::vector<int> vn_unembedded_;   ///< per buffer vertex

    // nu ledger and regimes
    std::vector<int> nu_v_;
    std::vector<int> nu_set_, K_set_;
    std::vector<long long> t_z_;
    std::vector<long long> regime_size_;

    Telemetry tele_;
    bool initialized_ = false;

    struct GoodSetDiag {
        long long candidates = 0;
        long long density_failures = 0;
        long long floor_failures = 0;
        long long danger_failures = 0;
    };
    GoodSetDiag last_diag_;

    // helpers
    EmbedOutcome conclude_search();
    void admit_force(int vertex);
    void touch(int set_id);
    void touch_mark(int top_index);
    long long star_now(int set_id) const; ///< star of F(t-1) at a set
    int nu_prime_now(int set_id) const;
    int nu_prime_after(int set_id, int x) const;
    bool hyp_member(int set_id, const std::vector<int>& coords, int x, int y,
                    const std::vector<int>& sx_of, const std::vector<int>& sxpos_of) const;
    void local_family(int x, std::vector<int>& local, std::vector<int>& consult,
                      std::vector<int>& utops) const;
    void compute_sx(int x, std::vector<int>& sx_of, std::vector<int>& sxpos_of) const;
    long long slice_size(int super_set, int pos, int y) const;
};

/// One-call embedding: returns the outcome with an independently validated
/// phi on success.
EmbedOutcome embed(const Complex& H, const MarkedComplex& GM, const ColouredSets* gamma,
                   const ParamConfig& cfg, uint64_t seed, bool keep_steps = false);

/// Validator independent of the engine: part-respecting bijection, every
/// H-set lands in G, no top-level image marked, restrictions respected.
struct EmbeddingCheck {
    bool ok = false;
    std::string what;
};
EmbeddingCheck validate_embedding(const Complex& H, const MarkedComplex& GM,
                                  const ColouredSets* gamma, const std::vector<int>& phi);

/// JSON-lines transcript of a run (header record + one record per step).
std::string transcript_json(const EmbedOutcome& out, const ParamConfig& cfg, uint64_t seed);

} // namespace hyperembed

#endif
