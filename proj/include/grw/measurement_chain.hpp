#pragma once

#include <cstdint>
#include <vector>

#include "grw/logprob.hpp"
#include "grw/rng.hpp"
#include "grw/state_algebra.hpp"

namespace grw {

/// Counting-protocol parameters: n marbles with in-box weight alpha_sq each,
/// per-pointer tail weight |delta|^2 = 1 - gamma_sq.
struct ChainParams {
    std::uint64_t n = 10;
    double alpha_sq = 0.9;
    double gamma_sq = 0.99;
    std::uint64_t seed = 1;

    void validate() const;  // 0 < alpha_sq < 1, 0.5 < gamma_sq <= 1, n >= 1
};

/// Where a mis-resolved global pointer lands: uniformly on one of the n
/// other readings (default), or on a neighbouring reading.
enum class PointerFlipModel { UniformOther, AdjacentReading };

/// Collapse ordering: the count observable first and the marble/apparatus
/// cascade second, or everything in a single joint collapse. Observables
/// are distribution-identical either way; the toggle exists to demonstrate
/// that.
enum class CollapseOrdering { CountThenCascade, Simultaneous };

struct ChainOutcome {
    std::uint64_t n = 0;
    std::uint64_t k_marbles_in = 0;
    std::uint64_t k_apparatus_in = 0;
    std::uint64_t o_reading = 0;
    bool consistent = true;  // all three numbers agree
};

/// Marbles with per-marble apparatuses perfectly correlated to them. The
/// amplitudes are unchanged by the correlation, so the chain keeps just the
/// product state plus the precomputed count distribution used for sampling.
class CorrelatedChain {
public:
    explicit CorrelatedChain(ProductState marbles);

    const ProductState& marbles() const { return marbles_; }
    std::uint64_t size() const { return marbles_.size(); }
    bool homogeneous() const { return homogeneous_; }

    const std::vector<LogValue>& count_distribution() const { return log_pmf_; }

    /// Sample k from the count distribution (inverse CDF walk).
    std::uint64_t sample_count(RandomStream& rng) const;

    /// Sample a size-k in-subset with the conditional collapse weights:
    /// uniform over the C(n,k) subsets in the homogeneous case.
    std::vector<std::uint64_t> sample_in_subset(std::uint64_t k, RandomStream& rng) const;

    /// Joint collapse: every marble resolves independently by Born weight.
    std::vector<std::uint64_t> sample_configuration(RandomStream& rng) const;

private:
    ProductState marbles_;
    bool homogeneous_ = true;
    std::vector<LogValue> log_pmf_;
    std::vector<double> cdf_;                       // normalized, ascending k
    std::vector<std::vector<double>> suffix_pmf_;   // heterogeneous subset sampling
    std::vector<double> in_weight_real_;
};

/// Correlate each marble to its own two-state apparatus (Mi). Heterogeneous
/// states are accepted up to n = 20, homogeneous ones to ~1e6.
CorrelatedChain correlate(const ProductState& state);

/// Tail model of a macroscopic pointer: resolving it flips the reading with
/// probability |delta|^2 = 1 - gamma_sq.
struct PointerTailModel {
    double gamma_sq = 1.0;
    double delta_sq() const { return 1.0 - gamma_sq; }
    LogValue log_delta_sq() const;
};
PointerTailModel apply_pointer_tails(double gamma_sq);

struct PostMeasurement {
    std::uint64_t n = 0;
    std::uint64_t k = 0;  // the registered O eigenvalue
};

/// Collapse onto the O = k eigenspace.
PostMeasurement measure_O(const CorrelatedChain& chain, RandomStream& rng);

struct CascadeResult {
    ChainOutcome outcome;                  // o_reading = k, counts = k, consistent
    std::vector<std::uint64_t> in_subset;  // which marbles ended up in
};

/// The quick second collapse: one definite configuration with exactly k
/// marbles (and their apparatuses) in.
CascadeResult cascade_collapse(const CorrelatedChain& chain, const PostMeasurement& post,
                               RandomStream& rng);

/// Resolve the global pointer through its tail: with probability |delta|^2
/// the reading flips to a different value per the flip model.
ChainOutcome resolve_pointer_with_tails(ChainOutcome outcome, const PointerTailModel& tails,
                                        RandomStream& rng,
                                        PointerFlipModel model = PointerFlipModel::UniformOther);

/// Analytic probability that the global pointer disagrees with the collapsed
/// marble count: |delta|^2, independent of k under either flip model.
LogValue mismatch_probability(const ChainParams& params);

struct ChainRunOptions {
    PointerFlipModel flip_model = PointerFlipModel::UniformOther;
    CollapseOrdering ordering = CollapseOrdering::CountThenCascade;
    unsigned threads = 1;  // 0 = hardware concurrency
};

struct ChainSummary {
    ChainParams params;
    std::uint64_t trials = 0;
    std::vector<std::uint64_t> k_histogram;  // of k_marbles_in, size n+1
    double consistency_rate = 0.0;
    LogValue mismatch;  // analytic |delta|^2
    PointerFlipModel flip_model = PointerFlipModel::UniformOther;
    CollapseOrdering ordering = CollapseOrdering::CountThenCascade;
};

/// Full protocol, `trials` times: correlate -> measure O -> cascade ->
/// resolve the pointer tail. Trial i uses substream i of params.seed, so the
/// summary does not depend on the thread count.
ChainSummary run_chain(const ChainParams& params, std::uint64_t trials,
                       const ChainRunOptions& options = {});

}  // namespace grw
