#include "fri/ising.hpp"

#include <cmath>

#include "fri/error.hpp"

namespace fri {

void IsingParams::validate() const
{
    if (ell < 3 || ell > 63) throw Error("ell must lie in [3, 63], got " + std::to_string(ell));
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw Error("temperature must be positive");
    if (!std::isfinite(field)) throw Error("field must be finite");
    for (double w : {a(), b(), c(), 1.0 / a(), 1.0 / b(), 1.0 / c()})
        if (!std::isfinite(w) || !(w > 0.0)) throw Error("Ising weights overflow for these T, B");
}

double IsingParams::a() const { return std::exp((2.0 - field) / temperature); }
double IsingParams::b() const { return std::exp(-field / temperature); }
double IsingParams::c() const { return std::exp(-(2.0 + field) / temperature); }

IsingOperator::IsingOperator(const IsingParams& params) : params_(params)
{
    params_.validate();
    mask_ = (Index{1} << params_.ell) - 1;
    for (unsigned out = 0; out < 2; ++out)
        for (unsigned next = 0; next < 2; ++next)
            for (unsigned add = 0; add < 2; ++add) {
                const double s_out = out ? 1.0 : -1.0;
                const double s_next = next ? 1.0 : -1.0;
                const double s_new = add ? 1.0 : -1.0;
                weights_[(out << 2) | (next << 1) | add] =
                    std::exp((s_out * s_new + s_out * s_next + params_.field * s_out) / params_.temperature);
            }
}

void IsingOperator::append_column(Index j, std::vector<Entry>& out) const
{
    const unsigned out_bit = static_cast<unsigned>(j >> (params_.ell - 1)) & 1u;
    const unsigned next_bit = static_cast<unsigned>(j >> (params_.ell - 2)) & 1u;
    const Index row = (j << 1) & mask_;
    out.push_back({row, weight(out_bit, next_bit, 0)});
    out.push_back({row | 1, weight(out_bit, next_bit, 1)});
}

std::optional<double> IsingOperator::column_l1(Index j) const
{
    const unsigned out_bit = static_cast<unsigned>(j >> (params_.ell - 1)) & 1u;
    const unsigned next_bit = static_cast<unsigned>(j >> (params_.ell - 2)) & 1u;
    return weight(out_bit, next_bit, 0) + weight(out_bit, next_bit, 1);
}

IsingOperator ising_operator(const IsingParams& params)
{
    return IsingOperator(params);
}

DenseFunctional tail_weight_functional(unsigned ell)
{
    if (ell < 1 || ell > 64) throw Error("ell out of range");
    return DenseFunctional::indicator_at_least(Index{1} << (ell - 1));
}

IsingExactResult ising_exact(const IsingParams& params, double tol, std::size_t max_iters)
{
    params.validate();
    if (params.ell > 26) throw Error("exact oracle limited to ell <= 26");
    const IsingOperator op(params);
    const unsigned ell = params.ell;
    const std::size_t n = std::size_t{1} << ell;
    const std::size_t half = n / 2;

    // gather form: row rho receives from sigma = rho >> 1 (oldest bit 0) and
    // sigma | half (oldest bit 1); bit ell-2 of both equals bit ell-1 of rho
    double w0[2][2], w1[2][2];
    for (unsigned next = 0; next < 2; ++next)
        for (unsigned add = 0; add < 2; ++add) {
            w0[next][add] = op.weight(0, next, add);
            w1[next][add] = op.weight(1, next, add);
        }

    std::vector<double> v(n, 1.0 / static_cast<double>(n));
    std::vector<double> w(n);
    double lambda_prev = 0.0;
    // one spin enters per step, so the test must hold for ell straight steps
    std::size_t settled = 0;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        double sum = 0.0;
        for (std::size_t quarter = 0; quarter < 2; ++quarter) {
            // rows with bit ell-1 == quarter
            const std::size_t lo = quarter * half, hi = lo + half;
            const double a0 = w0[quarter][0], a1 = w0[quarter][1];
            const double b0 = w1[quarter][0], b1 = w1[quarter][1];
            for (std::size_t rho = lo; rho < hi; rho += 2) {
                const std::size_t s = rho >> 1;
                const double x0 = v[s], x1 = v[s | half];
                const double y0 = a0 * x0 + b0 * x1;
                const double y1 = a1 * x0 + b1 * x1;
                w[rho] = y0;
                w[rho + 1] = y1;
                sum += y0 + y1;
            }
        }
        // v has unit sum, so u^T K v / u^T v = sum with u = all ones
        const double lambda = sum;
        const double inv = 1.0 / sum;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] * inv;
        settled = std::abs(lambda - lambda_prev) < tol ? settled + 1 : 0;
        if (settled >= ell) {
            IsingExactResult r;
            r.lambda = lambda;
            double tail = 0.0;
            for (std::size_t i = half; i < n; ++i) tail += v[i];
            r.f_tail = tail;
            r.v = std::move(v);
            r.iterations = it;
            return r;
        }
        lambda_prev = lambda;
    }
    throw Error("exact Ising power iteration did not converge in " + std::to_string(max_iters) + " iterations");
}

}  // namespace fri
