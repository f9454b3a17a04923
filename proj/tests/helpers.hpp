#pragma once

// Test-only oracles and generators.  Nothing here calls into the code paths
// it is used to check, other than reading columns of explicit matrices.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fri/linop.hpp"
#include "fri/sparse.hpp"

namespace fri::testing {

using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

inline DenseMatrix to_eigen(const ColumnOracle& op, std::uint64_t n)
{
    DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Index j = 0; j < n; ++j)
        for (const auto& e : op.column(j)) m(static_cast<Eigen::Index>(e.index), static_cast<Eigen::Index>(j)) += e.value;
    return m;
}

inline DenseVector to_eigen(const SparseVector& v, std::uint64_t n)
{
    DenseVector x = DenseVector::Zero(static_cast<Eigen::Index>(n));
    for (const auto& e : v) x(static_cast<Eigen::Index>(e.index)) = e.value;
    return x;
}

inline SparseVector from_eigen(const DenseVector& x)
{
    std::vector<Entry> pairs;
    for (Eigen::Index i = 0; i < x.size(); ++i) pairs.push_back({static_cast<Index>(i), x(i)});
    return SparseVector::from_pairs(std::move(pairs));
}

inline ExplicitMatrix from_eigen(const DenseMatrix& m)
{
    std::vector<ExplicitMatrix::Triplet> t;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != 0.0) t.push_back({static_cast<Index>(i), static_cast<Index>(j), m(i, j)});
    return ExplicitMatrix::from_triplets(static_cast<std::uint64_t>(m.rows()), std::move(t));
}

/// Random vector with `n` nonzeros at indices spread over [0, spread).
inline SparseVector random_vector(std::mt19937_64& gen, std::size_t n, bool complex_values = true,
                                  Index spread = 0, bool nonnegative = false)
{
    std::uniform_real_distribution<double> mag(0.01, 1.0), phase(0.0, 2.0 * M_PI);
    std::vector<Entry> pairs;
    const Index stride = spread > n ? spread / n : 1;
    for (std::size_t k = 0; k < n; ++k) {
        double r = mag(gen);
        Complex x = nonnegative ? Complex(r) : (complex_values ? std::polar(r, phase(gen)) : Complex(gen() & 1 ? r : -r));
        pairs.push_back({static_cast<Index>(k) * stride, x});
    }
    return SparseVector::from_pairs(std::move(pairs));
}

/// Dense matrix with entries drawn uniformly from [lo, hi).
inline DenseMatrix random_dense(std::mt19937_64& gen, Eigen::Index n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    DenseMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = u(gen);
    return m;
}

/// Running mean and standard error of a complex sample.
class MeanAccumulator {
public:
    void add(Complex x)
    {
        ++n_;
        sum_ += x;
        sq_ += std::norm(x);
    }

    Complex mean() const { return sum_ / static_cast<double>(n_); }

    /// sqrt(E|x - mean|^2 / n)
    double standard_error() const
    {
        const double nn = static_cast<double>(n_);
        const double var = (sq_ - std::norm(sum_) / nn) / (nn - 1.0);
        return std::sqrt(std::max(var, 0.0) / nn);
    }

    std::size_t count() const { return n_; }

private:
    std::size_t n_ = 0;
    Complex sum_ = 0.0;
    double sq_ = 0.0;
};

}  // namespace fri::testing

namespace fri::testing {

/// The 8 x 8 transfer matrix for three spins written out entry by entry.
inline DenseMatrix kpart(double T, double B)
{
    const double a = std::exp((2 - B) / T), b = std::exp(-B / T), c = std::exp(-(2 + B) / T);
    DenseMatrix k = DenseMatrix::Zero(8, 8);
    k(0, 0) = a, k(1, 0) = b, k(2, 1) = a, k(3, 1) = b;
    k(4, 2) = b, k(5, 2) = c, k(6, 3) = b, k(7, 3) = c;
    k(0, 4) = 1 / a, k(1, 4) = 1 / b, k(2, 5) = 1 / a, k(3, 5) = 1 / b;
    k(4, 6) = 1 / b, k(5, 6) = 1 / c, k(6, 7) = 1 / b, k(7, 7) = 1 / c;
    return k;
}

inline double max_relative_error(const DenseMatrix& got, const DenseMatrix& want)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < want.rows(); ++i)
        for (Eigen::Index j = 0; j < want.cols(); ++j) {
            const double scale = std::abs(want(i, j));
            const double err = std::abs(got(i, j) - want(i, j));
            worst = std::max(worst, scale > 0 ? err / scale : err);
        }
    return worst;
}

}  // namespace fri::testing
