#include <random>

#include "doctest.h"
#include "fri/error.hpp"
#include "fri/ising.hpp"
#include "fri/linop.hpp"
#include "helpers.hpp"

using namespace fri;
using fri::testing::MeanAccumulator;

namespace {

ExplicitMatrix random_sparse_matrix(std::mt19937_64& gen, std::uint64_t n, std::size_t per_column)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<ExplicitMatrix::Triplet> t;
    for (Index j = 0; j < n; ++j)
        for (std::size_t k = 0; k < per_column; ++k) t.push_back({gen() % n, j, Complex(u(gen), u(gen))});
    return ExplicitMatrix::from_triplets(n, std::move(t));
}

}  // namespace

TEST_CASE("domain")
{
    CHECK(Domain::explicit_dim(5).dim() == 5u);
    CHECK(Domain::explicit_dim(5).contains(4));
    CHECK_FALSE(Domain::explicit_dim(5).contains(5));
    CHECK(Domain::power_of_two(50).dim() == (std::uint64_t{1} << 50));
    CHECK_FALSE(Domain::power_of_two(50).storable(kMaxStorableDim));
    CHECK(Domain::power_of_two(26).storable(kMaxStorableDim));
    CHECK_FALSE(Domain::power_of_two(64).dim());
    CHECK(Domain::power_of_two(64).contains(~Index{0}));
}

TEST_CASE("explicit matrix assembly")
{
    auto m = ExplicitMatrix::from_triplets(3, {{0, 0, 1.0}, {0, 0, 2.0}, {2, 1, -1.0}, {1, 2, 0.0}, {1, 1, 1.0}, {1, 1, -1.0}});
    CHECK(m.nnz() == 2);
    CHECK(m.column(0) == std::vector<Entry>{{0, 3.0}});
    CHECK(m.column(1) == std::vector<Entry>{{2, -1.0}});
    CHECK(m.column(2).empty());
    CHECK(m.column_l1(0) == 3.0);
    CHECK_THROWS_AS(ExplicitMatrix::from_triplets(2, {{2, 0, 1.0}}), Error);
}

TEST_CASE("identity and out-of-range indices")
{
    auto id = ExplicitMatrix::identity(10);
    std::mt19937_64 gen(1);
    auto v = testing::random_vector(gen, 7, true, 10);
    CHECK(apply_sparse(id, v) == v);
    CHECK_THROWS_WITH_AS(apply_sparse(id, SparseVector::from_pairs({{10, 1.0}})), "index 10 out of operator range",
                         Error);
}

TEST_CASE("apply_sparse matches a dense product")
{
    std::mt19937_64 gen(2);
    for (int trial = 0; trial < 50; ++trial) {
        const std::uint64_t n = 8 + gen() % 40;
        auto a = random_sparse_matrix(gen, n, 1 + gen() % 4);
        auto v = testing::random_vector(gen, 1 + gen() % n, true, n);
        testing::DenseVector want = testing::to_eigen(a, n) * testing::to_eigen(v, n);
        testing::DenseVector got = testing::to_eigen(apply_sparse(a, v), n);
        CHECK((got - want).norm() <= 1e-13 * (1 + want.norm()));
    }
}

TEST_CASE("apply_sparse on the three-spin transfer matrix")
{
    auto k = ising_operator({3, 2.2, 0.01});
    auto col0 = apply_sparse(k, SparseVector::from_pairs({{0, 1.0}}));
    const double a = std::exp((2 - 0.01) / 2.2), b = std::exp(-0.01 / 2.2);
    REQUIRE(col0.nnz() == 2);
    CHECK(col0.at(0).real() == doctest::Approx(a).epsilon(1e-14));
    CHECK(col0.at(1).real() == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("apply_sparse is linear")
{
    std::mt19937_64 gen(3);
    auto a = random_sparse_matrix(gen, 30, 3);
    for (int trial = 0; trial < 30; ++trial) {
        auto x = testing::random_vector(gen, 10, true, 30);
        auto y = testing::random_vector(gen, 12, true, 30);
        const Complex alpha(0.3, -1.2);
        auto lhs = testing::to_eigen(apply_sparse(a, axpy(alpha, x, y)), 30);
        testing::DenseVector rhs =
            alpha * testing::to_eigen(apply_sparse(a, x), 30) + testing::to_eigen(apply_sparse(a, y), 30);
        CHECK((lhs - rhs).norm() <= 1e-13 * (1 + rhs.norm()));
    }
}

TEST_CASE("apply_sparse is bit-identical across thread counts")
{
    std::mt19937_64 gen(4);
    const std::uint64_t n = 40000;
    auto a = random_sparse_matrix(gen, n, 3);
    auto v = testing::random_vector(gen, 30000, true, n);
    auto one = apply_sparse(a, v, 1);
    for (unsigned t : {2u, 3u, 8u}) CHECK(apply_sparse(a, v, t) == one);
}

TEST_CASE("column-compressed product is exact with a generous budget")
{
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 30; ++trial) {
        auto a = random_sparse_matrix(gen, 20, 2);
        // one dominant entry plus a second; both clear the strict split
        auto v = SparseVector::from_pairs({{gen() % 10, 1.0}, {10 + gen() % 10, Complex(0, 0.9)}});
        RngStream rng(trial, 1);
        auto got = testing::to_eigen(apply_column_compressed(a, v, 1000, rng), 20);
        auto want = testing::to_eigen(apply_sparse(a, v), 20);
        CHECK((got - want).norm() <= 1e-14 * (1 + want.norm()));
    }
}

TEST_CASE("column-compressed product is unbiased")
{
    std::mt19937_64 gen(6);
    const std::uint64_t n = 25;
    auto a = random_sparse_matrix(gen, n, 6);
    auto v = testing::random_vector(gen, 20, true, n);
    const DenseFunctional f(testing::random_vector(gen, n, true, n));
    const Complex truth = f.dot(apply_sparse(a, v));
    for (std::size_t m : {3u, 15u}) {
        MeanAccumulator acc;
        for (std::size_t r = 0; r < 40000; ++r) {
            RngStream rng(m, r);
            auto out = apply_column_compressed(a, v, m, rng);
            acc.add(f.dot(out));
        }
        CAPTURE(m);
        CHECK(std::abs(acc.mean() - truth) <= 5 * acc.standard_error());
    }
}

TEST_CASE("column-compressed product without column norms")
{
    // an oracle that withholds column_l1 falls back to one selection per column
    struct Opaque final : ColumnOracle {
        ExplicitMatrix inner;
        Domain domain() const override { return inner.domain(); }
        void append_column(Index j, std::vector<Entry>& out) const override { inner.append_column(j, out); }
    };
    std::mt19937_64 gen(7);
    Opaque op;
    op.inner = random_sparse_matrix(gen, 12, 4);
    auto v = testing::random_vector(gen, 6, true, 12);
    const DenseFunctional f = DenseFunctional::all_ones();
    const Complex truth = f.dot(apply_sparse(op, v));
    MeanAccumulator acc;
    for (std::size_t r = 0; r < 40000; ++r) {
        RngStream rng(9, r);
        auto out = apply_column_compressed(op, v, 1, rng);
        CHECK(out.nnz() <= v.nnz());
        acc.add(f.dot(out));
    }
    CHECK(std::abs(acc.mean() - truth) <= 5 * acc.standard_error());
}
