#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "grw/logprob.hpp"

namespace grw {

enum class Region { In, Out };

Region opposite(Region r);

/// Two-level in/out superposition of a single marble. `alpha` is the large
/// amplitude by convention; `dominant_region` records which side it sits on,
/// so flipping a marble is a toggle of that tag.
class MarbleState {
public:
    /// Plain constructor; alpha_sq in (0, 1].
    static MarbleState from_alpha_sq(double alpha_sq);
    /// Log-domain constructor for values with no clean double form.
    static MarbleState from_alpha_sq(LogValue alpha_sq);
    /// The (1 - eps) form: |alpha|^2 = 1 - eps with |beta|^2 = eps held
    /// exactly. Mandatory for the regime where eps ~ 1e-9: the plain
    /// constructor cannot represent 1 - 1e-17 distinctly from 1.
    static MarbleState from_beta_sq_epsilon(double eps);

    LogValue log_alpha_sq() const { return alpha_sq_; }
    LogValue log_beta_sq() const { return beta_sq_; }
    Region dominant_region() const { return dominant_; }
    /// True when |alpha|^2 <= |beta|^2, i.e. the dominance assumption behind
    /// the in/out reading does not actually hold for this marble.
    bool dominance_violated() const { return dominance_violated_; }

    LogValue in_weight() const;
    LogValue out_weight() const;
    LogValue region_weight(Region r) const;

    /// Swap the alpha/beta roles between the regions.
    MarbleState flipped() const;

    friend bool operator==(const MarbleState& a, const MarbleState& b);

private:
    MarbleState(LogValue a, LogValue b, Region dom, bool flagged);

    LogValue alpha_sq_;
    LogValue beta_sq_;
    Region dominant_;
    bool dominance_violated_;
};

/// Assignment of a region to every one of n marbles, stored as whichever of
/// the two index sets is explicit (so all-in / all-out cost O(1) at any n).
class TermPattern {
public:
    static TermPattern from_in_set(std::uint64_t n, std::vector<std::uint64_t> in_indices);
    static TermPattern from_out_set(std::uint64_t n, std::vector<std::uint64_t> out_indices);
    static TermPattern all_in(std::uint64_t n) { return from_out_set(n, {}); }
    static TermPattern all_out(std::uint64_t n) { return from_in_set(n, {}); }

    std::uint64_t size() const { return n_; }
    bool assigns_in(std::uint64_t index) const;
    std::uint64_t in_count() const;

    bool listed_is_in() const { return listed_is_in_; }
    const std::vector<std::uint64_t>& listed() const { return listed_; }

private:
    TermPattern(std::uint64_t n, bool listed_is_in, std::vector<std::uint64_t> listed);

    std::uint64_t n_ = 0;
    bool listed_is_in_ = true;
    std::vector<std::uint64_t> listed_;  // sorted, unique, < n_
};

/// Product state of n marbles. Uniform states keep one marble plus a count
/// (and the set of flipped indices), so n can be as large as 1e10 and more;
/// heterogeneous states store the marbles explicitly.
class ProductState {
public:
    static ProductState uniform(const MarbleState& marble, std::uint64_t n);
    static ProductState from_marbles(std::vector<MarbleState> marbles);

    std::uint64_t size() const;
    bool homogeneous() const;
    MarbleState marble(std::uint64_t index) const;

    /// flip_marble: new state with marble `index` (0-based) flipped.
    ProductState flipped(std::uint64_t index) const;

    struct Group {
        MarbleState marble;
        std::uint64_t count;
    };
    /// Marbles grouped by identical state: uniform states yield one or two
    /// groups regardless of n, explicit states one group per run.
    std::vector<Group> groups() const;

    bool is_uniform_repr() const;

private:
    struct UniformRepr {
        MarbleState base;
        std::uint64_t count;
        std::vector<std::uint64_t> flipped;  // sorted
    };
    using ExplicitRepr = std::vector<MarbleState>;

    explicit ProductState(UniformRepr r) : repr_(std::move(r)) {}
    explicit ProductState(ExplicitRepr r) : repr_(std::move(r)) {}

    std::variant<UniformRepr, ExplicitRepr> repr_;
};

/// Squared-magnitude log-coefficient of one expansion term:
/// sum over in-assigned marbles of ln|alpha_i|^2 (in-weights) plus the
/// out-weights of the rest. O(listed + flipped) on uniform states.
LogValue term_log_coefficient(const ProductState& state, const TermPattern& pattern);

/// P(exactly k marbles in the box). Closed binomial form on uniform states,
/// O(n k) dynamic programming on explicit ones.
LogValue outcome_count_distribution(const ProductState& state, std::uint64_t k);

/// All n+1 outcome probabilities at once (requires materializable n).
std::vector<LogValue> full_count_distribution(const ProductState& state);

}  // namespace grw
