#include "grw/state_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grw {

namespace {

// Full-distribution queries materialize n+1 entries; explicit DP is O(n^2).
constexpr std::uint64_t kMaxFullDistribution = 1u << 21;
constexpr std::uint64_t kMaxExplicitDp = 8192;

// One group's binomial point term: C(c,j) w_in^j w_out^(c-j).
LogValue group_count_term(const MarbleState& m, std::uint64_t c, std::uint64_t j) {
    return log_mul(log_binomial(c, j),
                   log_mul(log_pow_uint(m.in_weight(), j),
                           log_pow_uint(m.out_weight(), c - j)));
}

// DP point query over explicit marbles: probability that exactly `target`
// of them carry `counted` as their region. Row truncated to j <= target.
LogValue explicit_count_dp(const std::vector<MarbleState>& ms, std::uint64_t target,
                           Region counted) {
    const std::uint64_t n = ms.size();
    std::vector<LogValue> row(target + 1, LogValue::zero());
    row[0] = LogValue::one();
    for (std::uint64_t i = 0; i < n; ++i) {
        const LogValue hit = ms[i].region_weight(counted);
        const LogValue miss = ms[i].region_weight(opposite(counted));
        const std::uint64_t jmax = std::min<std::uint64_t>(i + 1, target);
        for (std::uint64_t j = jmax; j >= 1; --j) {
            row[j] = log_add(log_mul(row[j], miss), log_mul(row[j - 1], hit));
        }
        row[0] = log_mul(row[0], miss);
    }
    return row[target];
}

}  // namespace

Region opposite(Region r) {
    return r == Region::In ? Region::Out : Region::In;
}

MarbleState::MarbleState(LogValue a, LogValue b, Region dom, bool flagged)
    : alpha_sq_(a), beta_sq_(b), dominant_(dom), dominance_violated_(flagged) {}

MarbleState MarbleState::from_alpha_sq(double alpha_sq) {
    if (!(alpha_sq > 0.0) || alpha_sq > 1.0) {
        throw std::domain_error("MarbleState: alpha_sq must lie in (0, 1]");
    }
    if (alpha_sq == 1.0) {
        return MarbleState(LogValue::one(), LogValue::zero(), Region::In, false);
    }
    const LogValue a = LogValue::from_real(alpha_sq);
    const LogValue b = LogValue::from_log(std::log1p(-alpha_sq));
    return MarbleState(a, b, Region::In, !(alpha_sq > 0.5));
}

MarbleState MarbleState::from_alpha_sq(LogValue alpha_sq) {
    if (alpha_sq.sign != +1 || alpha_sq.log_mag > 0.0) {
        throw std::domain_error("MarbleState: alpha_sq must lie in (0, 1]");
    }
    if (alpha_sq.log_mag == 0.0) {
        return MarbleState(LogValue::one(), LogValue::zero(), Region::In, false);
    }
    // |beta|^2 = 1 - e^{la}; expm1 keeps this stable when la is tiny.
    const LogValue b = LogValue::from_log(std::log(-std::expm1(alpha_sq.log_mag)));
    const bool flagged = !(alpha_sq.log_mag > b.log_mag);
    return MarbleState(alpha_sq, b, Region::In, flagged);
}

MarbleState MarbleState::from_beta_sq_epsilon(double eps) {
    if (eps < 0.0 || !(eps < 1.0)) {
        throw std::domain_error("MarbleState: epsilon must lie in [0, 1)");
    }
    if (eps == 0.0) {
        return MarbleState(LogValue::one(), LogValue::zero(), Region::In, false);
    }
    const LogValue a = LogValue::from_log(std::log1p(-eps));
    const LogValue b = LogValue::from_real(eps);
    return MarbleState(a, b, Region::In, !(eps < 0.5));
}

LogValue MarbleState::in_weight() const {
    return dominant_ == Region::In ? alpha_sq_ : beta_sq_;
}

LogValue MarbleState::out_weight() const {
    return dominant_ == Region::In ? beta_sq_ : alpha_sq_;
}

LogValue MarbleState::region_weight(Region r) const {
    return r == Region::In ? in_weight() : out_weight();
}

MarbleState MarbleState::flipped() const {
    return MarbleState(alpha_sq_, beta_sq_, opposite(dominant_), dominance_violated_);
}

bool operator==(const MarbleState& a, const MarbleState& b) {
    return a.dominant_ == b.dominant_ && a.alpha_sq_.sign == b.alpha_sq_.sign &&
           a.beta_sq_.sign == b.beta_sq_.sign &&
           (a.alpha_sq_.sign == 0 || a.alpha_sq_.log_mag == b.alpha_sq_.log_mag) &&
           (a.beta_sq_.sign == 0 || a.beta_sq_.log_mag == b.beta_sq_.log_mag);
}

TermPattern::TermPattern(std::uint64_t n, bool listed_is_in,
                         std::vector<std::uint64_t> listed)
    : n_(n), listed_is_in_(listed_is_in), listed_(std::move(listed)) {
    std::sort(listed_.begin(), listed_.end());
    listed_.erase(std::unique(listed_.begin(), listed_.end()), listed_.end());
    if (!listed_.empty() && listed_.back() >= n_) {
        throw std::domain_error("TermPattern: index out of range");
    }
}

TermPattern TermPattern::from_in_set(std::uint64_t n, std::vector<std::uint64_t> in) {
    return TermPattern(n, true, std::move(in));
}

TermPattern TermPattern::from_out_set(std::uint64_t n, std::vector<std::uint64_t> out) {
    return TermPattern(n, false, std::move(out));
}

bool TermPattern::assigns_in(std::uint64_t index) const {
    const bool listed = std::binary_search(listed_.begin(), listed_.end(), index);
    return listed_is_in_ ? listed : !listed;
}

std::uint64_t TermPattern::in_count() const {
    return listed_is_in_ ? listed_.size() : n_ - listed_.size();
}

ProductState ProductState::uniform(const MarbleState& marble, std::uint64_t n) {
    if (n == 0) throw std::domain_error("ProductState: n must be >= 1");
    return ProductState(UniformRepr{marble, n, {}});
}

ProductState ProductState::from_marbles(std::vector<MarbleState> marbles) {
    if (marbles.empty()) throw std::domain_error("ProductState: n must be >= 1");
    return ProductState(ExplicitRepr{std::move(marbles)});
}

std::uint64_t ProductState::size() const {
    if (const auto* u = std::get_if<UniformRepr>(&repr_)) return u->count;
    return std::get<ExplicitRepr>(repr_).size();
}

bool ProductState::homogeneous() const {
    if (const auto* u = std::get_if<UniformRepr>(&repr_)) {
        return u->flipped.empty() || u->flipped.size() == u->count;
    }
    const auto& ms = std::get<ExplicitRepr>(repr_);
    for (const auto& m : ms) {
        if (!(m == ms.front())) return false;
    }
    return true;
}

MarbleState ProductState::marble(std::uint64_t index) const {
    if (index >= size()) throw std::domain_error("ProductState: index out of range");
    if (const auto* u = std::get_if<UniformRepr>(&repr_)) {
        const bool f = std::binary_search(u->flipped.begin(), u->flipped.end(), index);
        return f ? u->base.flipped() : u->base;
    }
    return std::get<ExplicitRepr>(repr_)[index];
}

ProductState ProductState::flipped(std::uint64_t index) const {
    if (index >= size()) throw std::domain_error("ProductState: index out of range");
    if (const auto* u = std::get_if<UniformRepr>(&repr_)) {
        UniformRepr next = *u;
        auto it = std::lower_bound(next.flipped.begin(), next.flipped.end(), index);
        if (it != next.flipped.end() && *it == index) {
            next.flipped.erase(it);
        } else {
            next.flipped.insert(it, index);
        }
        return ProductState(std::move(next));
    }
    ExplicitRepr next = std::get<ExplicitRepr>(repr_);
    next[index] = next[index].flipped();
    return ProductState(std::move(next));
}

std::vector<ProductState::Group> ProductState::groups() const {
    std::vector<Group> out;
    if (const auto* u = std::get_if<UniformRepr>(&repr_)) {
        const std::uint64_t f = u->flipped.size();
        if (u->count > f) out.push_back({u->base, u->count - f});
        if (f > 0) out.push_back({u->base.flipped(), f});
        return out;
    }
    const auto& ms = std::get<ExplicitRepr>(repr_);
    for (const auto& m : ms) {
        if (!out.empty() && out.back().marble == m) {
            ++out.back().count;
        } else {
            out.push_back({m, 1});
        }
    }
    return out;
}

bool ProductState::is_uniform_repr() const {
    return std::holds_alternative<UniformRepr>(repr_);
}

LogValue term_log_coefficient(const ProductState& state, const TermPattern& pattern) {
    if (pattern.size() != state.size()) {
        throw std::domain_error("term_log_coefficient: pattern size mismatch");
    }
    const std::uint64_t n = state.size();
    if (state.is_uniform_repr()) {
        // Count the four (majority/flipped) x (in/out) buckets from the
        // listed indices; the unlisted bulk follows by subtraction. A single
        // group (no flips, or everything flipped) has flip_count 0.
        const std::vector<ProductState::Group> gs = state.groups();
        const MarbleState base_marble = gs[0].marble;
        const MarbleState flip_marble = base_marble.flipped();
        const std::uint64_t flip_count = (gs.size() == 2) ? gs[1].count : 0;
        std::uint64_t listed_flipped = 0;
        for (std::uint64_t idx : pattern.listed()) {
            if (!(state.marble(idx) == base_marble)) ++listed_flipped;
        }
        const std::uint64_t listed_total = pattern.listed().size();
        const std::uint64_t listed_base = listed_total - listed_flipped;
        std::uint64_t in_base, in_flip, out_base, out_flip;
        if (pattern.listed_is_in()) {
            in_base = listed_base;
            in_flip = listed_flipped;
            out_base = (n - flip_count) - listed_base;
            out_flip = flip_count - listed_flipped;
        } else {
            out_base = listed_base;
            out_flip = listed_flipped;
            in_base = (n - flip_count) - listed_base;
            in_flip = flip_count - listed_flipped;
        }
        LogValue r = log_pow_uint(base_marble.in_weight(), in_base);
        r = log_mul(r, log_pow_uint(base_marble.out_weight(), out_base));
        r = log_mul(r, log_pow_uint(flip_marble.in_weight(), in_flip));
        r = log_mul(r, log_pow_uint(flip_marble.out_weight(), out_flip));
        return r;
    }
    LogValue r = LogValue::one();
    for (std::uint64_t i = 0; i < n; ++i) {
        const Region assigned = pattern.assigns_in(i) ? Region::In : Region::Out;
        r = log_mul(r, state.marble(i).region_weight(assigned));
    }
    return r;
}

LogValue outcome_count_distribution(const ProductState& state, std::uint64_t k) {
    const std::uint64_t n = state.size();
    if (k > n) throw std::domain_error("outcome_count_distribution: k > n");
    const std::vector<ProductState::Group> gs = state.groups();
    if (gs.size() == 1) {
        return group_count_term(gs[0].marble, gs[0].count, k);
    }
    if (state.is_uniform_repr()) {
        // Two groups: convolve the flipped group's small support.
        const auto& bulk = gs[0];
        const auto& flip = gs[1];
        LogValue total = LogValue::zero();
        const std::uint64_t j_lo = (k > bulk.count) ? k - bulk.count : 0;
        const std::uint64_t j_hi = std::min(flip.count, k);
        for (std::uint64_t j = j_lo; j <= j_hi; ++j) {
            total = log_add(total, log_mul(group_count_term(flip.marble, flip.count, j),
                                           group_count_term(bulk.marble, bulk.count, k - j)));
        }
        return total;
    }
    if (n > kMaxExplicitDp) {
        throw std::length_error("outcome_count_distribution: explicit state too large");
    }
    std::vector<MarbleState> ms;
    ms.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) ms.push_back(state.marble(i));
    // Track whichever count is smaller.
    if (k <= n - k) return explicit_count_dp(ms, k, Region::In);
    return explicit_count_dp(ms, n - k, Region::Out);
}

std::vector<LogValue> full_count_distribution(const ProductState& state) {
    const std::uint64_t n = state.size();
    if (n > kMaxFullDistribution) {
        throw std::length_error("full_count_distribution: state too large");
    }
    if (state.is_uniform_repr()) {
        std::vector<LogValue> out(n + 1);
        for (std::uint64_t k = 0; k <= n; ++k) {
            out[k] = outcome_count_distribution(state, k);
        }
        return out;
    }
    if (n > kMaxExplicitDp) {
        throw std::length_error("full_count_distribution: explicit state too large");
    }
    // One full DP sweep: O(n^2).
    std::vector<LogValue> row(n + 1, LogValue::zero());
    row[0] = LogValue::one();
    for (std::uint64_t i = 0; i < n; ++i) {
        const MarbleState m = state.marble(i);
        const LogValue hit = m.in_weight();
        const LogValue miss = m.out_weight();
        for (std::uint64_t j = i + 1; j >= 1; --j) {
            row[j] = log_add(log_mul(row[j], miss), log_mul(row[j - 1], hit));
        }
        row[0] = log_mul(row[0], miss);
    }
    return row;
}

}  // namespace grw
