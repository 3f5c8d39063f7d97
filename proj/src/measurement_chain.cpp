#include "grw/measurement_chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace grw {

namespace {

constexpr std::uint64_t kMaxHeterogeneousChain = 20;
constexpr std::uint64_t kMaxChainSize = 1u << 20;

}  // namespace

void ChainParams::validate() const {
    if (n == 0) throw std::domain_error("ChainParams: n must be >= 1");
    if (!(alpha_sq > 0.0) || !(alpha_sq < 1.0)) {
        throw std::domain_error("ChainParams: alpha_sq must lie in (0, 1)");
    }
    if (!(gamma_sq > 0.5) || gamma_sq > 1.0) {
        throw std::domain_error("ChainParams: gamma_sq must lie in (0.5, 1]");
    }
}

CorrelatedChain::CorrelatedChain(ProductState marbles) : marbles_(std::move(marbles)) {
    const std::uint64_t n = marbles_.size();
    homogeneous_ = marbles_.homogeneous();
    if (n > kMaxChainSize) {
        throw std::length_error("CorrelatedChain: state too large");
    }
    if (!homogeneous_ && n > kMaxHeterogeneousChain) {
        throw std::domain_error("CorrelatedChain: heterogeneous states limited to n <= 20");
    }

    log_pmf_ = full_count_distribution(marbles_);
    cdf_.resize(log_pmf_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < log_pmf_.size(); ++k) {
        acc += log_pmf_[k].to_real();  // values below ~1e-300 vanish; they are unreachable anyway
        cdf_[k] = acc;
    }
    for (double& c : cdf_) c /= acc;
    cdf_.back() = 1.0;

    in_weight_real_.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        in_weight_real_[i] = marbles_.marble(i).in_weight().to_real();
    }

    if (!homogeneous_) {
        // suffix_pmf_[i][j] = P(j of the marbles i..n-1 resolve in), used for
        // sequential conditional subset sampling. Outcomes whose weight
        // underflows a double are unreachable by the sampler anyway.
        suffix_pmf_.assign(n + 1, {});
        suffix_pmf_[n] = {1.0};
        for (std::uint64_t i = n; i-- > 0;) {
            const double win = in_weight_real_[i];
            const double wout = marbles_.marble(i).out_weight().to_real();
            const auto& tail = suffix_pmf_[i + 1];
            std::vector<double> cur(tail.size() + 1, 0.0);
            for (std::size_t j = 0; j < tail.size(); ++j) {
                cur[j] += wout * tail[j];
                cur[j + 1] += win * tail[j];
            }
            suffix_pmf_[i] = std::move(cur);
        }
    }
}

std::uint64_t CorrelatedChain::sample_count(RandomStream& rng) const {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(it - cdf_.begin());
}

std::vector<std::uint64_t> CorrelatedChain::sample_in_subset(std::uint64_t k,
                                                             RandomStream& rng) const {
    const std::uint64_t n = size();
    if (k > n) throw std::domain_error("sample_in_subset: k > n");
    std::vector<std::uint64_t> subset;
    subset.reserve(k);
    if (homogeneous_) {
        // Uniform k-subset: sequential selection sampling.
        std::uint64_t needed = k;
        for (std::uint64_t i = 0; i < n && needed > 0; ++i) {
            const std::uint64_t remaining = n - i;
            if (rng.uniform() * static_cast<double>(remaining) < static_cast<double>(needed)) {
                subset.push_back(i);
                --needed;
            }
        }
        return subset;
    }
    // Conditional Bernoulli: include marble i with probability
    // w_i * S_{i+1}(j-1) / S_i(j) given j still to place.
    std::uint64_t j = k;
    for (std::uint64_t i = 0; i < n && j > 0; ++i) {
        const std::uint64_t remaining = n - i;
        const double denom = suffix_pmf_[i][j];
        double p_take;
        if (denom > 0.0) {
            p_take = in_weight_real_[i] * suffix_pmf_[i + 1][j - 1] / denom;
        } else {
            // Underflowed conditional; only the forced branch is coherent.
            p_take = (j == remaining) ? 1.0 : 0.0;
        }
        if (rng.uniform() < p_take) {
            subset.push_back(i);
            --j;
        }
    }
    return subset;
}

std::vector<std::uint64_t> CorrelatedChain::sample_configuration(RandomStream& rng) const {
    std::vector<std::uint64_t> subset;
    const std::uint64_t n = size();
    for (std::uint64_t i = 0; i < n; ++i) {
        if (rng.uniform() < in_weight_real_[i]) subset.push_back(i);
    }
    return subset;
}

CorrelatedChain correlate(const ProductState& state) {
    return CorrelatedChain(state);
}

PointerTailModel apply_pointer_tails(double gamma_sq) {
    if (!(gamma_sq > 0.5) || gamma_sq > 1.0) {
        throw std::domain_error("apply_pointer_tails: gamma_sq must lie in (0.5, 1]");
    }
    return PointerTailModel{gamma_sq};
}

LogValue PointerTailModel::log_delta_sq() const {
    if (gamma_sq == 1.0) return LogValue::zero();
    return LogValue::from_log(std::log1p(-gamma_sq));
}

PostMeasurement measure_O(const CorrelatedChain& chain, RandomStream& rng) {
    return PostMeasurement{chain.size(), chain.sample_count(rng)};
}

CascadeResult cascade_collapse(const CorrelatedChain& chain, const PostMeasurement& post,
                               RandomStream& rng) {
    CascadeResult r;
    r.in_subset = chain.sample_in_subset(post.k, rng);
    r.outcome.n = post.n;
    r.outcome.k_marbles_in = post.k;
    r.outcome.k_apparatus_in = post.k;  // the cascade pins the Mi readings to the marbles
    r.outcome.o_reading = post.k;
    r.outcome.consistent = true;
    return r;
}

ChainOutcome resolve_pointer_with_tails(ChainOutcome outcome, const PointerTailModel& tails,
                                        RandomStream& rng, PointerFlipModel model) {
    const double u = rng.uniform();
    if (u < tails.delta_sq()) {
        const std::uint64_t k = outcome.o_reading;
        const std::uint64_t n = outcome.n;
        if (model == PointerFlipModel::UniformOther) {
            // Readings run 0..n; pick uniformly among the n others.
            const std::uint64_t r = rng.uniform_below(n);
            outcome.o_reading = (r < k) ? r : r + 1;
        } else {
            if (k == 0) {
                outcome.o_reading = 1;
            } else if (k == n) {
                outcome.o_reading = n - 1;
            } else {
                outcome.o_reading = (rng.uniform() < 0.5) ? k - 1 : k + 1;
            }
        }
    }
    outcome.consistent = outcome.o_reading == outcome.k_marbles_in &&
                         outcome.k_marbles_in == outcome.k_apparatus_in;
    return outcome;
}

LogValue mismatch_probability(const ChainParams& params) {
    params.validate();
    return apply_pointer_tails(params.gamma_sq).log_delta_sq();
}

ChainSummary run_chain(const ChainParams& params, std::uint64_t trials,
                       const ChainRunOptions& options) {
    params.validate();
    if (trials == 0) throw std::domain_error("run_chain: trials must be >= 1");

    const CorrelatedChain chain =
        correlate(ProductState::uniform(MarbleState::from_alpha_sq(params.alpha_sq), params.n));
    const PointerTailModel tails = apply_pointer_tails(params.gamma_sq);

    unsigned threads = options.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

    std::vector<std::vector<std::uint64_t>> hists(
        threads, std::vector<std::uint64_t>(params.n + 1, 0));
    std::vector<std::uint64_t> consistent_counts(threads, 0);

    auto worker = [&](unsigned slot, std::uint64_t begin, std::uint64_t end) {
        auto& hist = hists[slot];
        std::uint64_t consistent = 0;
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            RandomStream rng(substream_seed(params.seed, trial));
            ChainOutcome outcome;
            if (options.ordering == CollapseOrdering::CountThenCascade) {
                const PostMeasurement post = measure_O(chain, rng);
                outcome = cascade_collapse(chain, post, rng).outcome;
            } else {
                const auto subset = chain.sample_configuration(rng);
                const std::uint64_t k = subset.size();
                outcome = ChainOutcome{params.n, k, k, k, true};
            }
            outcome = resolve_pointer_with_tails(outcome, tails, rng, options.flip_model);
            if (outcome.k_marbles_in != outcome.k_apparatus_in) {
                throw std::logic_error("run_chain: cascade identity violated");
            }
            ++hist[outcome.k_marbles_in];
            if (outcome.consistent) ++consistent;
        }
        consistent_counts[slot] = consistent;
    };

    if (threads == 1 || trials < 2) {
        worker(0, 0, trials);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t per = (trials + threads - 1) / threads;
        for (unsigned j = 0; j < threads; ++j) {
            const std::uint64_t begin = j * per;
            const std::uint64_t end = std::min<std::uint64_t>(begin + per, trials);
            if (begin >= end) break;
            pool.emplace_back(worker, j, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    ChainSummary summary;
    summary.params = params;
    summary.trials = trials;
    summary.k_histogram.assign(params.n + 1, 0);
    std::uint64_t consistent_total = 0;
    for (unsigned j = 0; j < threads; ++j) {
        for (std::size_t k = 0; k < summary.k_histogram.size(); ++k) {
            summary.k_histogram[k] += hists[j][k];
        }
        consistent_total += consistent_counts[j];
    }
    summary.consistency_rate =
        static_cast<double>(consistent_total) / static_cast<double>(trials);
    summary.mismatch = mismatch_probability(params);
    summary.flip_model = options.flip_model;
    summary.ordering = options.ordering;
    return summary;
}

}  // namespace grw
