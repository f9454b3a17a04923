#include "fri/iterate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "fri/error.hpp"

namespace fri {

double EpsSchedule::weight(std::size_t t, std::size_t burn_in) const
{
    if (t <= burn_in) return 1.0;
    if (kind == Kind::Constant) return t == burn_in + 1 ? 1.0 : eps;
    return 1.0 / static_cast<double>(t - burn_in);
}

void IterationConfig::validate() const
{
    if (num_iters == 0) throw Error("num_iters must be positive");
    if (burn_in >= num_iters) throw Error("burn_in must be smaller than num_iters");
    if (record_every == 0) throw Error("record_every must be at least 1");
    if (rule.m == 0) throw Error("compression budget m must be positive");
    if (replicas == 0) throw Error("replicas must be at least 1");
    if (schedule.kind == EpsSchedule::Kind::Constant && !(schedule.eps > 0.0 && schedule.eps <= 1.0))
        throw Error("constant averaging weight must lie in (0, 1]");
}

SparseVector IterationMap::apply(const SparseVector& v, unsigned threads) const
{
    if (!affine_) return apply_sparse(*op_, v, threads);
    return axpy(eps_, drift(v, threads), v);
}

SparseVector IterationMap::drift(const SparseVector& v, unsigned threads) const
{
    if (!affine_) throw Error("drift is defined for affine maps only");
    return axpy(-1.0, r_, apply_sparse(*op_, v, threads));
}

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica)
{
    return stream_id(seed, stream_id(replica, StreamPurpose::Replica));
}

namespace {

// Per-step bookkeeping shared by all drivers.
class Recorder {
public:
    Recorder(const IterationConfig& cfg, std::size_t n_functionals)
        : every_(cfg.record_every), burn_in_(cfg.burn_in), last_(cfg.num_iters), schedule_(cfg.schedule),
          f_avg_(n_functionals, 0.0)
    {
        traj_.burn_in = cfg.burn_in;
        traj_.lambda_series.reserve(cfg.num_iters);
        traj_.f_series.resize(n_functionals);
        for (auto& s : traj_.f_series) s.reserve(cfg.num_iters);
    }

    void push(std::size_t t, Complex lambda, const std::vector<DenseFunctional>& fs, const SparseVector& v)
    {
        const double w = schedule_.weight(t, burn_in_);
        lambda_avg_ = (1.0 - w) * lambda_avg_ + w * lambda;
        traj_.lambda_series.push_back(lambda);
        std::vector<Complex> fv(fs.size());
        for (std::size_t i = 0; i < fs.size(); ++i) {
            fv[i] = fs[i].dot(v);
            f_avg_[i] = (1.0 - w) * f_avg_[i] + w * fv[i];
            traj_.f_series[i].push_back(fv[i]);
        }
        if (t % every_ == 0 || t == last_)
            traj_.records.push_back({t, lambda, lambda_avg_, std::move(fv), f_avg_, v.nnz(), l1_norm(v)});
    }

    Trajectory finish(SparseVector final_iterate)
    {
        traj_.final_iterate = std::move(final_iterate);
        return std::move(traj_);
    }

private:
    std::size_t every_, burn_in_, last_;
    EpsSchedule schedule_;
    Complex lambda_avg_ = 0.0;
    std::vector<Complex> f_avg_;
    Trajectory traj_;
};

SparseVector maybe_compress(const CompressionRule* rule, const SparseVector& v, std::uint64_t seed,
                            std::size_t t)
{
    // zero is a legitimate (absorbing for linear maps) value of an unbiased
    // iterate; only the power driver needs to normalize
    if (!rule || v.empty()) return v;
    RngStream rng(seed, stream_id(t, StreamPurpose::Compress));
    return compress(*rule, v, rng);
}

Trajectory power_engine(const ColumnOracle& op, const SparseVector& v0, const DenseFunctional& u,
                        const std::vector<DenseFunctional>& fs, const IterationConfig& cfg,
                        const CompressionRule* rule)
{
    cfg.validate();
    SparseVector v = project_zero(v0, cfg.forbidden);
    if (l1_norm(v) == 0.0) throw Error("initial vector has zero l1 norm");
    v = normalize_l1(v);

    Recorder rec(cfg, fs.size());
    for (std::size_t t = 1; t <= cfg.num_iters; ++t) {
        const Complex den = u.dot(v);
        if (den == 0.0) throw Error("degenerate eigenvalue functional");
        auto y = maybe_compress(rule, v, cfg.seed, t);
        auto w = project_zero(apply_sparse(op, y, cfg.threads), cfg.forbidden);
        const Complex lambda = u.dot(w) / den;
        if (l1_norm(w) == 0.0) throw Error("iterate collapsed");
        v = normalize_l1(w);
        rec.push(t, lambda, fs, v);
    }
    return rec.finish(std::move(v));
}

double divergence_reference(const IterationMap& map, const SparseVector& v0)
{
    double ref = l1_norm(v0);
    if (map.is_affine()) ref = std::max(ref, l1_norm(map.rhs()));
    return ref;
}

void check_stable(const IterationMap& map, const SparseVector& v, double reference)
{
    if (!map.is_affine()) return;
    const double n = l1_norm(v);
    if (!std::isfinite(n) || n > kDivergenceFactor * reference)
        throw Error("unstable; increase m or decrease eps");
}

Trajectory iterate_engine(const IterationMap& map, const SparseVector& v0,
                          const std::vector<DenseFunctional>& fs, const IterationConfig& cfg,
                          const CompressionRule* rule, bool residual)
{
    cfg.validate();
    if (residual) {
        if (!map.is_affine()) throw Error("residual scheme requires a perturbation-of-identity map");
        if (!map.op().domain().storable(kMaxStorableDim))
            throw Error("residual scheme requires storable iterates");
    }
    SparseVector v = project_zero(v0, cfg.forbidden);
    const double reference = divergence_reference(map, v);

    Recorder rec(cfg, fs.size());
    for (std::size_t t = 1; t <= cfg.num_iters; ++t) {
        auto y = maybe_compress(rule, v, cfg.seed, t);
        if (residual)
            v = axpy(map.eps(), map.drift(y, cfg.threads), v);
        else
            v = map.apply(y, cfg.threads);
        v = project_zero(v, cfg.forbidden);
        check_stable(map, v, reference);
        rec.push(t, 0.0, fs, v);
    }
    return rec.finish(std::move(v));
}

// Runs body(k) for k < count over up to `threads` workers; results are kept
// in replica order.
template <typename Result, typename Body>
std::vector<Result> run_replicas(std::size_t count, unsigned threads, Body body)
{
    std::vector<Result> out(count);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    if (workers == 1) {
        for (std::size_t k = 0; k < count; ++k) out[k] = body(k);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    out[k] = body(k);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

IterationConfig replica_config(const IterationConfig& cfg, std::size_t k)
{
    IterationConfig c = cfg;
    c.seed = replica_seed(cfg.seed, k);
    c.replicas = 1;
    if (cfg.replicas > 1) c.threads = 1;
    return c;
}

}  // namespace

Trajectory fri_power(const ColumnOracle& op, const SparseVector& v0, const DenseFunctional& u,
                     const std::vector<DenseFunctional>& fs, const IterationConfig& cfg)
{
    return power_engine(op, v0, u, fs, cfg, &cfg.rule);
}

Trajectory deterministic_power(const ColumnOracle& op, const SparseVector& v0, std::size_t iters,
                               const DenseFunctional& u, const std::vector<DenseFunctional>& fs)
{
    IterationConfig cfg;
    cfg.num_iters = iters;
    return power_engine(op, v0, u, fs, cfg, nullptr);
}

Trajectory fri_iterate(const IterationMap& map, const SparseVector& v0, const std::vector<DenseFunctional>& fs,
                       const IterationConfig& cfg)
{
    return iterate_engine(map, v0, fs, cfg, &cfg.rule, false);
}

Trajectory fri_iterate_residual(const IterationMap& map, const SparseVector& v0,
                                const std::vector<DenseFunctional>& fs, const IterationConfig& cfg)
{
    return iterate_engine(map, v0, fs, cfg, &cfg.rule, true);
}

Trajectory deterministic_iterate(const IterationMap& map, const SparseVector& v0, std::size_t iters,
                                 const std::vector<DenseFunctional>& fs)
{
    IterationConfig cfg;
    cfg.num_iters = iters;
    return iterate_engine(map, v0, fs, cfg, nullptr, false);
}

ReplicaResult fri_solve(const ColumnOracle& a, const SparseVector& r, double eps,
                        const std::vector<DenseFunctional>& fs, const IterationConfig& cfg,
                        const std::optional<SparseVector>& v0)
{
    cfg.validate();
    if (!(eps > 0.0)) throw Error("eps must be positive");
    const SparseVector start = v0 ? *v0 : r;
    if (l1_norm(start) == 0.0) throw Error("initial vector has zero l1 norm");
    const auto map = IterationMap::affine(a, r, eps);

    auto trajectories = run_replicas<Trajectory>(cfg.replicas, cfg.threads, [&](std::size_t k) {
        return fri_iterate(map, start, fs, replica_config(cfg, k));
    });

    ReplicaResult out;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (cfg.replicas == 1) {
            out.estimates.push_back(trajectories[0].f_summary(i));
            continue;
        }
        std::vector<Complex> averages;
        averages.reserve(cfg.replicas);
        for (const auto& tr : trajectories) averages.push_back(trajectory_average(tr.f_series[i], cfg.burn_in));
        auto s = summarize_replicas(averages);
        s.burn_in_used = cfg.burn_in;
        out.estimates.push_back(s);
    }
    out.first_replica = std::move(trajectories.front());
    return out;
}

ReplicaResult fri_expm(const ColumnOracle& a, const SparseVector& b, double total_time, double eps,
                       const std::vector<DenseFunctional>& fs, const IterationConfig& cfg)
{
    if (!(eps > 0.0) || !(total_time > 0.0)) throw Error("eps and T must be positive");
    if (l1_norm(b) == 0.0) throw Error("initial vector has zero l1 norm");
    const double ratio = total_time / eps;
    const double nearest = std::round(ratio);
    const auto steps = static_cast<std::size_t>(
        std::max(1.0, std::abs(ratio - nearest) <= 1e-9 * nearest ? nearest : std::ceil(ratio)));
    const double h = total_time / static_cast<double>(steps);
    const auto map = IterationMap::affine(a, {}, h);

    IterationConfig base = cfg;
    base.num_iters = steps;
    base.burn_in = 0;
    base.validate();

    auto trajectories = run_replicas<Trajectory>(cfg.replicas, cfg.threads, [&](std::size_t k) {
        return fri_iterate(map, b, fs, replica_config(base, k));
    });

    ReplicaResult out;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        std::vector<Complex> finals;
        finals.reserve(trajectories.size());
        for (const auto& tr : trajectories) finals.push_back(tr.f_series[i].back());
        out.estimates.push_back(summarize_replicas(finals));
    }
    out.first_replica = std::move(trajectories.front());
    return out;
}

}  // namespace fri
