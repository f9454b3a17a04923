#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace fri {

using Index = std::uint64_t;
using Complex = std::complex<double>;

struct Entry {
    Index index;
    Complex value;

    friend bool operator==(const Entry&, const Entry&) = default;
};

//
// Sorted sparse complex vector.  Indices are strictly increasing and no
// stored value is exactly zero.  Exact comparison with 0.0 is intentional:
// nnz counts drive the compression budget.
//
class SparseVector {
public:
    SparseVector() = default;

    /// Sums duplicates, drops exact zeros, sorts.
    static SparseVector from_pairs(std::vector<Entry> pairs);

    /// Caller guarantees the invariants (sorted, unique, nonzero).
    static SparseVector from_sorted(std::vector<Entry> entries);

    std::span<const Entry> entries() const noexcept { return entries_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Value at `index`, zero when not stored.
    Complex at(Index index) const;

    std::vector<Entry> to_pairs() const { return entries_; }

    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
    explicit SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {}

    std::vector<Entry> entries_;
};

/// Predicate over indices (e.g. orthogonalization constraints).
using IndexPredicate = std::function<bool(Index)>;

//
// A functional f evaluated as f^ct v.  Either explicitly sparse or given by a
// rule index -> value so that functionals such as "1 on the upper half of a
// 2^50 domain" never need storage.
//
class DenseFunctional {
public:
    using Rule = std::function<Complex(Index)>;

    explicit DenseFunctional(SparseVector coefficients) : repr_(std::move(coefficients)) {}
    explicit DenseFunctional(Rule rule) : repr_(std::move(rule)) {}

    static DenseFunctional all_ones();
    static DenseFunctional indicator_at_least(Index threshold);
    static DenseFunctional coordinate(Index index);

    Complex operator()(Index index) const;

    /// conj(f)^T v over the stored entries of v.
    Complex dot(const SparseVector& v) const;

private:
    std::variant<SparseVector, Rule> repr_;
};

double l1_norm(const SparseVector& v);

/// sum_j conj(f_j) v_j.
Complex dot(const DenseFunctional& f, const SparseVector& v);

SparseVector scale(const SparseVector& v, Complex c);

/// a*x + y via a merge of the two supports.
SparseVector axpy(Complex a, const SparseVector& x, const SparseVector& y);

/// Throws fri::Error("zero vector") when l1_norm(v) == 0.
SparseVector normalize_l1(const SparseVector& v);

SparseVector project_zero(const SparseVector& v, const IndexPredicate& forbidden);

/// One `index,re,im` line per entry, shortest round-trip decimals.
void write_debug_dump(std::ostream& out, const SparseVector& v);

}  // namespace fri
