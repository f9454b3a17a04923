#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fri/linop.hpp"

namespace fri {

struct IsingParams {
    unsigned ell = 50;         // spins in the transfer window, 3 <= ell <= 63
    double temperature = 2.2;
    double field = 0.01;

    /// Throws on an out-of-range ell or non-finite weights.
    void validate() const;

    double a() const;  // e^{(2-B)/T}
    double b() const;  // e^{-B/T}
    double c() const;  // e^{-(2+B)/T}
};

//
// Matrix-free transfer matrix of the 2D Ising model on a helical
// (shift-register) lattice.  State sigma encodes the last ell spins, bit 1
// meaning spin +1, with bit ell-1 the oldest.  Column sigma has the two rows
// (2 sigma) mod 2^ell and (2 sigma + 1) mod 2^ell; appending s_new charges
// the outgoing spin s_out with
//
//     exp[(s_out s_new + s_out s_{ell-2} + B s_out) / T].
//
class IsingOperator final : public ColumnOracle {
public:
    explicit IsingOperator(const IsingParams& params);

    const IsingParams& params() const noexcept { return params_; }

    Domain domain() const override { return Domain::power_of_two(params_.ell); }
    void append_column(Index j, std::vector<Entry>& out) const override;
    std::optional<double> column_l1(Index j) const override;

    /// Weight for (outgoing bit, next-oldest bit, new bit).
    double weight(unsigned out_bit, unsigned next_bit, unsigned new_bit) const noexcept
    {
        return weights_[(out_bit << 2) | (next_bit << 1) | new_bit];
    }

private:
    IsingParams params_;
    Index mask_;
    std::array<double, 8> weights_{};
};

IsingOperator ising_operator(const IsingParams& params);

/// Indicator of indices >= 2^{ell-1} (the oldest spin is +1).
DenseFunctional tail_weight_functional(unsigned ell);

struct IsingExactResult {
    double lambda = 0.0;
    double f_tail = 0.0;
    std::vector<double> v;  // unit l1 sum
    std::size_t iterations = 0;
};

/// Dense power iteration with l1 normalization until |Lambda_{t+1} - Lambda_t|
/// < tol has held for ell consecutive steps.  Requires ell <= 26.
IsingExactResult ising_exact(const IsingParams& params, double tol = 1e-12,
                             std::size_t max_iters = 100000);

}  // namespace fri
