#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "fri/rng.hpp"
#include "fri/sparse.hpp"

namespace fri {

enum class RuleKind { FloorCeil, IndependentUniform, Systematic, Stratified, TbS };

/// Order in which the stochastic remainder is laid along the cumulative
/// profile (Systematic and Stratified only).
enum class StochasticOrder { InputOrder, MagnitudeDescending };

struct CompressionRule {
    RuleKind kind = RuleKind::Systematic;
    std::size_t m = 1;
    bool tbs_renormalize = false;
    StochasticOrder order = StochasticOrder::InputOrder;

    bool stochastic() const noexcept { return kind != RuleKind::TbS; }
};

/// Accepts `floorceil | indep | systematic | stratified | tbs`.
RuleKind parse_rule_kind(std::string_view name);
std::string to_string(RuleKind kind);

/// Accepts `input | magdesc`.
StochasticOrder parse_stochastic_order(std::string_view name);
std::string to_string(StochasticOrder order);

struct SplitResult {
    SparseVector preserved;
    SparseVector remainder;
    std::size_t tau = 0;
};

/// Deterministic head of every stochastic rule: repeatedly moves the largest
/// entry into `preserved` while (m - l) |v_max| > (remaining l1 mass), with
/// strict inequality.  Postcondition:
///   l1(remainder) <= (m - tau) / m * l1(v).
SplitResult exact_preservation_split(const SparseVector& v, std::size_t m);

/// Checks l1(remainder) <= (m - tau)/m * l1(input) up to rounding.
bool tau_bound_holds(const SplitResult& split, double input_l1, std::size_t m);

// Stochastic rounding of a remainder to `budget` units of mass S/budget,
// S = l1(remainder).  Phases v_j/|v_j| pass through untouched.

/// Each entry independently rounded to floor or ceil of budget |v_j| / S.
SparseVector stochastic_round_floor_ceil(const SparseVector& remainder, std::size_t budget,
                                         RngStream& rng);

/// N_j = floor(budget |v_j| / S + U_j); all-zero draws are rejected and
/// redrawn, oversized draws thinned by one systematic pass.
SparseVector stochastic_round_independent_uniform(const SparseVector& remainder,
                                                  std::size_t budget, RngStream& rng);

/// One uniform U, strata U_k = (k - 1 + U) / budget.
SparseVector stochastic_round_systematic(const SparseVector& remainder, std::size_t budget,
                                         RngStream& rng,
                                         StochasticOrder order = StochasticOrder::InputOrder);

/// Independent U_k in [(k - 1) / budget, k / budget).
SparseVector stochastic_round_stratified(const SparseVector& remainder, std::size_t budget,
                                         RngStream& rng,
                                         StochasticOrder order = StochasticOrder::InputOrder);

/// Keeps the m largest magnitudes (ties: smaller index wins).
SparseVector tbs_truncate(const SparseVector& v, std::size_t m, bool renormalize);

/// Dispatches on rule.kind.  Throws for a zero input or m == 0.
SparseVector compress(const CompressionRule& rule, const SparseVector& v, RngStream& rng);

/// Maximum rejection attempts for the IndependentUniform all-zero event.
inline constexpr int kMaxIndependentRedraws = 1000;

}  // namespace fri
