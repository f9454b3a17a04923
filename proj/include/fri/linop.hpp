#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fri/rng.hpp"
#include "fri/sparse.hpp"

namespace fri {

//
// Size of an operator's index space.  Power-of-two domains are carried by
// their exponent so that 2^ell never has to be formed for ell = 64.
//
class Domain {
public:
    static Domain explicit_dim(std::uint64_t n) { return Domain(n, 0, false); }
    static Domain power_of_two(unsigned log2_dim) { return Domain(0, log2_dim, true); }

    bool is_power_of_two() const noexcept { return log2_; }
    unsigned log2_dim() const noexcept { return log2_dim_; }

    /// Number of indices when it fits in 64 bits.
    std::optional<std::uint64_t> dim() const noexcept;

    bool contains(Index i) const noexcept;

    /// True when a dense vector over the domain has at most `limit` entries.
    bool storable(std::uint64_t limit) const noexcept;

    friend bool operator==(const Domain&, const Domain&) = default;

private:
    Domain(std::uint64_t n, unsigned log2_dim, bool log2) : n_(n), log2_dim_(log2_dim), log2_(log2) {}

    std::uint64_t n_;
    unsigned log2_dim_;
    bool log2_;
};

/// Largest domain for which dense iterates are allowed (2^26).
inline constexpr std::uint64_t kMaxStorableDim = std::uint64_t{1} << 26;

//
// Linear operator accessed one column at a time.  Implementations must be
// immutable after construction; apply_sparse may call append_column from
// several threads.
//
class ColumnOracle {
public:
    virtual ~ColumnOracle() = default;

    virtual Domain domain() const = 0;

    /// Appends the nonzero (row, value) pairs of column j, each row at most once.
    virtual void append_column(Index j, std::vector<Entry>& out) const = 0;

    /// l1 norm of column j, when cheaply known.
    virtual std::optional<double> column_l1(Index /*j*/) const { return std::nullopt; }

    std::vector<Entry> column(Index j) const
    {
        std::vector<Entry> out;
        append_column(j, out);
        return out;
    }
};

/// Compressed sparse column storage of an n x n complex matrix.
class ExplicitMatrix final : public ColumnOracle {
public:
    struct Triplet {
        Index row;
        Index col;
        Complex value;
    };

    ExplicitMatrix() = default;

    /// Duplicates are summed; exact zeros dropped.
    static ExplicitMatrix from_triplets(std::uint64_t n, std::vector<Triplet> triplets);

    static ExplicitMatrix identity(std::uint64_t n);

    std::uint64_t size() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    Domain domain() const override { return Domain::explicit_dim(n_); }
    void append_column(Index j, std::vector<Entry>& out) const override;
    std::optional<double> column_l1(Index j) const override;

    /// Row-major dense copy; intended for small test oracles.
    std::vector<Complex> to_dense() const;

    std::vector<Triplet> triplets() const;

private:
    std::uint64_t n_ = 0;
    std::vector<std::size_t> col_ptr_{0};
    std::vector<Index> row_idx_;
    std::vector<Complex> values_;
    std::vector<double> col_l1_;
};

/// Operator-vector product by listing (row, K_ij v_j) products, sorting by row
/// and combining.  `threads` only splits product generation; the result is
/// bit-identical for any thread count.
SparseVector apply_sparse(const ColumnOracle& op, const SparseVector& v, unsigned threads = 1);

/// Unbiased randomized product in which every column is itself compressed.
/// Per-column budgets come from one systematic pass over ||K_j||_1 |v_j| with
/// a total of m_total selections (budget 1 per column when column norms are
/// unavailable); each column is then compressed by the systematic rule.
SparseVector apply_column_compressed(const ColumnOracle& op, const SparseVector& v,
                                     std::size_t m_total, RngStream& rng);

}  // namespace fri
