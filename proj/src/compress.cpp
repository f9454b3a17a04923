#include "fri/compress.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "fri/error.hpp"

namespace fri {

RuleKind parse_rule_kind(std::string_view name)
{
    if (name == "floorceil") return RuleKind::FloorCeil;
    if (name == "indep") return RuleKind::IndependentUniform;
    if (name == "systematic") return RuleKind::Systematic;
    if (name == "stratified") return RuleKind::Stratified;
    if (name == "tbs") return RuleKind::TbS;
    throw Error("unknown compression rule '" + std::string(name) +
                "' (expected floorceil|indep|systematic|stratified|tbs)");
}

std::string to_string(RuleKind kind)
{
    switch (kind) {
    case RuleKind::FloorCeil: return "floorceil";
    case RuleKind::IndependentUniform: return "indep";
    case RuleKind::Systematic: return "systematic";
    case RuleKind::Stratified: return "stratified";
    case RuleKind::TbS: return "tbs";
    }
    return "?";
}

StochasticOrder parse_stochastic_order(std::string_view name)
{
    if (name == "input") return StochasticOrder::InputOrder;
    if (name == "magdesc") return StochasticOrder::MagnitudeDescending;
    throw Error("unknown stochastic order '" + std::string(name) + "' (expected input|magdesc)");
}

std::string to_string(StochasticOrder order)
{
    return order == StochasticOrder::InputOrder ? "input" : "magdesc";
}

namespace {

// Orders positions by decreasing magnitude, smaller index first on ties.
struct ByMagnitude {
    const std::vector<double>* mags;
    std::span<const Entry> entries;

    bool before(std::size_t a, std::size_t b) const
    {
        double ma = (*mags)[a], mb = (*mags)[b];
        if (ma != mb) return ma > mb;
        return entries[a].index < entries[b].index;
    }
};

Complex scaled_phase(Complex value, double magnitude, double amount)
{
    return value * (amount / magnitude);
}

// Builds the output of a rounding step from per-position selection counts.
SparseVector from_counts(std::span<const Entry> entries, const std::vector<double>& mags,
                         const std::vector<std::size_t>& counts, double unit)
{
    std::vector<Entry> out;
    for (std::size_t p = 0; p < entries.size(); ++p) {
        if (counts[p] == 0) continue;
        Complex x = scaled_phase(entries[p].value, mags[p], static_cast<double>(counts[p]) * unit);
        if (x != 0.0) out.push_back({entries[p].index, x});
    }
    return SparseVector::from_sorted(std::move(out));
}

std::vector<double> magnitudes(std::span<const Entry> entries)
{
    std::vector<double> mags(entries.size());
    for (std::size_t p = 0; p < entries.size(); ++p) mags[p] = std::abs(entries[p].value);
    return mags;
}

// Shared body of systematic and stratified resampling.  `next_offset(k)`
// returns the position of the k-th selection inside its stratum, in [0, 1).
template <typename Offset>
SparseVector resample_strata(const SparseVector& remainder, std::size_t budget,
                             StochasticOrder order, Offset next_offset)
{
    if (budget == 0) throw Error("budget must be positive");
    if (remainder.empty()) return remainder;
    auto entries = remainder.entries();
    auto mags = magnitudes(entries);

    std::vector<std::size_t> sequence(entries.size());
    std::iota(sequence.begin(), sequence.end(), std::size_t{0});
    if (order == StochasticOrder::MagnitudeDescending) {
        ByMagnitude cmp{&mags, entries};
        std::stable_sort(sequence.begin(), sequence.end(),
                         [&](std::size_t a, std::size_t b) { return cmp.before(a, b); });
    }

    double total = 0.0;
    for (std::size_t p : sequence) total += mags[p];
    if (total == 0.0) throw Error("zero vector");

    std::vector<std::size_t> counts(entries.size(), 0);
    const double nb = static_cast<double>(budget);
    std::size_t k = 0;
    double threshold = total * next_offset(0) / nb;
    double cum = 0.0;
    std::size_t last_nonzero = sequence.front();
    for (std::size_t p : sequence) {
        cum += mags[p];
        if (mags[p] > 0.0) last_nonzero = p;
        while (k < budget && threshold < cum) {
            ++counts[p];
            ++k;
            if (k < budget) threshold = total * (static_cast<double>(k) + next_offset(k)) / nb;
        }
    }
    // thresholds that rounded past the final cumulative sum
    counts[last_nonzero] += budget - k;
    return from_counts(entries, mags, counts, total / nb);
}

// Bernoulli rounding of w_j = budget |v_j| / S.  `draw(p)` returns the count
// increment for fractional part handling.
template <typename Draw>
std::vector<std::size_t> independent_counts(std::span<const Entry> entries,
                                            const std::vector<double>& mags, double total,
                                            std::size_t budget, Draw draw)
{
    std::vector<std::size_t> counts(entries.size());
    const double nb = static_cast<double>(budget);
    for (std::size_t p = 0; p < entries.size(); ++p) {
        double w = nb * mags[p] / total;
        double fl = std::floor(w);
        counts[p] = static_cast<std::size_t>(fl) + draw(w - fl);
    }
    return counts;
}

SparseVector thin_if_oversized(SparseVector rounded, const std::vector<std::size_t>& counts,
                               std::size_t budget, RngStream& rng)
{
    if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) <= budget) return rounded;
    return stochastic_round_systematic(rounded, budget, rng);
}

}  // namespace

SplitResult exact_preservation_split(const SparseVector& v, std::size_t m)
{
    if (m == 0) throw Error("compression budget m must be positive");
    auto entries = v.entries();
    auto mags = magnitudes(entries);
    double total = 0.0;
    for (double x : mags) total += x;
    if (total == 0.0) throw Error("zero vector");

    ByMagnitude cmp{&mags, entries};
    auto heap_less = [&](std::size_t a, std::size_t b) { return cmp.before(b, a); };
    std::vector<std::size_t> heap(entries.size());
    std::iota(heap.begin(), heap.end(), std::size_t{0});
    std::make_heap(heap.begin(), heap.end(), heap_less);

    std::vector<bool> kept(entries.size(), false);
    std::size_t tau = 0;
    double remaining = total;
    // (m - tau) == 1 can never satisfy the strict test in exact arithmetic.
    while (!heap.empty() && m - tau >= 2) {
        std::size_t top = heap.front();
        if (!(static_cast<double>(m - tau) * mags[top] > remaining)) break;
        std::pop_heap(heap.begin(), heap.end(), heap_less);
        heap.pop_back();
        kept[top] = true;
        ++tau;
        remaining = heap.empty() ? 0.0 : remaining - mags[top];
    }

    std::vector<Entry> preserved, rest;
    preserved.reserve(tau);
    rest.reserve(entries.size() - tau);
    for (std::size_t p = 0; p < entries.size(); ++p) (kept[p] ? preserved : rest).push_back(entries[p]);

    SplitResult split{SparseVector::from_sorted(std::move(preserved)),
                      SparseVector::from_sorted(std::move(rest)), tau};
    assert(tau_bound_holds(split, total, m));
    return split;
}

bool tau_bound_holds(const SplitResult& split, double input_l1, std::size_t m)
{
    double bound = static_cast<double>(m - split.tau) / static_cast<double>(m) * input_l1;
    return l1_norm(split.remainder) <= bound * (1.0 + 1e-12) + 1e-300;
}

SparseVector stochastic_round_floor_ceil(const SparseVector& remainder, std::size_t budget,
                                         RngStream& rng)
{
    if (budget == 0) throw Error("budget must be positive");
    if (remainder.empty()) return remainder;
    auto entries = remainder.entries();
    auto mags = magnitudes(entries);
    double total = 0.0;
    for (double x : mags) total += x;
    auto counts = independent_counts(entries, mags, total, budget, [&](double frac) -> std::size_t {
        if (frac == 0.0) return 0;
        return rng.uniform() < frac ? 1 : 0;
    });
    auto rounded = from_counts(entries, mags, counts, total / static_cast<double>(budget));
    return thin_if_oversized(std::move(rounded), counts, budget, rng);
}

SparseVector stochastic_round_independent_uniform(const SparseVector& remainder,
                                                  std::size_t budget, RngStream& rng)
{
    if (budget == 0) throw Error("budget must be positive");
    if (remainder.empty()) return remainder;
    auto entries = remainder.entries();
    auto mags = magnitudes(entries);
    double total = 0.0;
    for (double x : mags) total += x;
    for (int attempt = 0; attempt < kMaxIndependentRedraws; ++attempt) {
        auto counts = independent_counts(entries, mags, total, budget, [&](double frac) -> std::size_t {
            // floor(w + U) = floor(w) + [U >= 1 - frac]
            return rng.uniform() + frac >= 1.0 ? 1 : 0;
        });
        auto rounded = from_counts(entries, mags, counts, total / static_cast<double>(budget));
        if (!rounded.empty()) return thin_if_oversized(std::move(rounded), counts, budget, rng);
    }
    throw Error("independent-uniform compression produced only zero vectors after " +
                std::to_string(kMaxIndependentRedraws) + " redraws");
}

SparseVector stochastic_round_systematic(const SparseVector& remainder, std::size_t budget,
                                         RngStream& rng, StochasticOrder order)
{
    if (remainder.empty()) return remainder;
    const double u = rng.uniform_open();
    return resample_strata(remainder, budget, order, [u](std::size_t) { return u; });
}

SparseVector stochastic_round_stratified(const SparseVector& remainder, std::size_t budget,
                                         RngStream& rng, StochasticOrder order)
{
    return resample_strata(remainder, budget, order, [&rng](std::size_t) { return rng.uniform(); });
}

SparseVector tbs_truncate(const SparseVector& v, std::size_t m, bool renormalize)
{
    if (v.nnz() <= m) return v;
    auto entries = v.entries();
    auto mags = magnitudes(entries);
    ByMagnitude cmp{&mags, entries};
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                     [&](std::size_t a, std::size_t b) { return cmp.before(a, b); });
    order.resize(m);
    std::sort(order.begin(), order.end());

    double kept_l1 = 0.0;
    for (std::size_t p : order) kept_l1 += mags[p];
    const double factor = renormalize && kept_l1 > 0.0 ? l1_norm(v) / kept_l1 : 1.0;

    std::vector<Entry> out;
    out.reserve(m);
    for (std::size_t p : order) {
        Complex x = renormalize ? entries[p].value * factor : entries[p].value;
        if (x != 0.0) out.push_back({entries[p].index, x});
    }
    return SparseVector::from_sorted(std::move(out));
}

SparseVector compress(const CompressionRule& rule, const SparseVector& v, RngStream& rng)
{
    if (rule.m == 0) throw Error("compression budget m must be positive");
    if (l1_norm(v) == 0.0) throw Error("zero vector");
    if (rule.kind == RuleKind::TbS) return tbs_truncate(v, rule.m, rule.tbs_renormalize);
    // nnz <= m forces every remaining weight to exactly one: the law is the identity.
    if (v.nnz() <= rule.m) return v;

    auto split = exact_preservation_split(v, rule.m);
    const std::size_t budget = rule.m - split.tau;
    SparseVector rounded;
    switch (rule.kind) {
    case RuleKind::FloorCeil:
        rounded = stochastic_round_floor_ceil(split.remainder, budget, rng);
        break;
    case RuleKind::IndependentUniform:
        rounded = stochastic_round_independent_uniform(split.remainder, budget, rng);
        break;
    case RuleKind::Systematic:
        rounded = stochastic_round_systematic(split.remainder, budget, rng, rule.order);
        break;
    case RuleKind::Stratified:
        rounded = stochastic_round_stratified(split.remainder, budget, rng, rule.order);
        break;
    case RuleKind::TbS:
        break;
    }
    // disjoint supports: preserved values pass through bit-for-bit
    return axpy(1.0, split.preserved, rounded);
}

}  // namespace fri
