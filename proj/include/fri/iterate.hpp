#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fri/compress.hpp"
#include "fri/linop.hpp"
#include "fri/stats.hpp"

namespace fri {

inline constexpr std::uint64_t kDefaultSeed = 20160502;

/// Averaging weights eps_t for the running averages of recorded quantities.
struct EpsSchedule {
    enum class Kind { Reciprocal, Constant };

    Kind kind = Kind::Reciprocal;
    double eps = 0.0;

    static EpsSchedule reciprocal() { return {Kind::Reciprocal, 0.0}; }
    static EpsSchedule constant(double eps) { return {Kind::Constant, eps}; }

    /// Weight of sample t (1-based).  Samples t <= burn_in get weight 1, so
    /// the average restarts at the first retained sample.
    double weight(std::size_t t, std::size_t burn_in) const;
};

struct IterationConfig {
    std::size_t num_iters = 1000;
    std::size_t burn_in = 0;
    CompressionRule rule{};
    std::uint64_t seed = kDefaultSeed;
    EpsSchedule schedule = EpsSchedule::reciprocal();
    IndexPredicate forbidden;  // entries forced to zero every step
    std::size_t record_every = 1;
    unsigned threads = 1;
    std::size_t replicas = 1;

    void validate() const;
};

struct TrajectoryRecord {
    std::size_t t = 0;
    Complex lambda = 0.0;
    Complex lambda_avg = 0.0;
    std::vector<Complex> f_values;
    std::vector<Complex> f_avg;
    std::size_t nnz = 0;
    double l1 = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;     // every record_every-th step
    std::vector<Complex> lambda_series;        // every step, t = 1..num_iters
    std::vector<std::vector<Complex>> f_series;  // [functional][t - 1]
    SparseVector final_iterate;
    std::size_t burn_in = 0;

    EstimateSummary lambda_summary() const { return summarize(lambda_series, burn_in); }
    EstimateSummary f_summary(std::size_t i) const { return summarize(f_series.at(i), burn_in); }
};

//
// Iteration map M.  Linear: v -> K v.  Affine perturbation of identity:
// v -> v + eps b(v) with b(v) = A v - r.
//
class IterationMap {
public:
    static IterationMap linear(const ColumnOracle& op) { return IterationMap(op, {}, 0.0, false); }
    static IterationMap affine(const ColumnOracle& op, SparseVector r, double eps)
    {
        return IterationMap(op, std::move(r), eps, true);
    }

    bool is_affine() const noexcept { return affine_; }
    double eps() const noexcept { return eps_; }
    const ColumnOracle& op() const noexcept { return *op_; }
    const SparseVector& rhs() const noexcept { return r_; }

    SparseVector apply(const SparseVector& v, unsigned threads = 1) const;

    /// b(v) = A v - r (affine maps only).
    SparseVector drift(const SparseVector& v, unsigned threads = 1) const;

private:
    IterationMap(const ColumnOracle& op, SparseVector r, double eps, bool affine)
        : op_(&op), r_(std::move(r)), eps_(eps), affine_(affine) {}

    const ColumnOracle* op_;
    SparseVector r_;
    double eps_;
    bool affine_;
};

/// Randomized power iteration:
///   Y = compress(V_t), W = P K Y, Lambda_{t+1} = u^ct W / u^ct V_t,
///   V_{t+1} = W / ||W||_1, F_{t+1} = f^ct V_{t+1}
/// where P zeroes cfg.forbidden.  v0 is projected and normalized first.
Trajectory fri_power(const ColumnOracle& op, const SparseVector& v0, const DenseFunctional& u,
                     const std::vector<DenseFunctional>& fs, const IterationConfig& cfg);

/// Same recursion with compression switched off.
Trajectory deterministic_power(const ColumnOracle& op, const SparseVector& v0, std::size_t iters,
                               const DenseFunctional& u, const std::vector<DenseFunctional>& fs);

/// V_{t+1} = P M(compress(V_t)).  Lambda is not defined here and recorded as 0.
Trajectory fri_iterate(const IterationMap& map, const SparseVector& v0,
                       const std::vector<DenseFunctional>& fs, const IterationConfig& cfg);

/// V_{t+1} = V_t + eps b(compress(V_t)); iterates are typically dense, so the
/// operator domain must be explicit and at most 2^26.
Trajectory fri_iterate_residual(const IterationMap& map, const SparseVector& v0,
                                const std::vector<DenseFunctional>& fs, const IterationConfig& cfg);

/// Deterministic counterparts used as oracles (no compression).
Trajectory deterministic_iterate(const IterationMap& map, const SparseVector& v0, std::size_t iters,
                                 const std::vector<DenseFunctional>& fs);

struct ReplicaResult {
    std::vector<EstimateSummary> estimates;  // one per functional
    Trajectory first_replica;
};

/// Jacobi-style solve: iterates v -> v + eps (A v - r), whose fixed point is
/// A^{-1} r, and reports burn-in-discarded trajectory averages of f^ct V_t.
/// Replicas run with independent seeds; with one replica the summary carries
/// the trajectory IAT, otherwise the spread of the replica averages.
/// `v0` defaults to r.
ReplicaResult fri_solve(const ColumnOracle& a, const SparseVector& r, double eps,
                        const std::vector<DenseFunctional>& fs, const IterationConfig& cfg,
                        const std::optional<SparseVector>& v0 = std::nullopt);

/// Action of exp(T A) on b by ceil(T / eps) steps of size T / steps of
/// v -> v + h A v with compression before every step; the summary is over
/// replicas of f^ct V at the final step.
ReplicaResult fri_expm(const ColumnOracle& a, const SparseVector& b, double total_time, double eps,
                       const std::vector<DenseFunctional>& fs, const IterationConfig& cfg);

/// Seed for replica k of a run seeded with `seed`.
std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica);

/// Divergence threshold relative to the initial l1 norm.
inline constexpr double kDivergenceFactor = 1e6;

}  // namespace fri
