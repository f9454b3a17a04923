#include "fri/linop.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fri/compress.hpp"
#include "fri/error.hpp"

namespace fri {

std::optional<std::uint64_t> Domain::dim() const noexcept
{
    if (!log2_) return n_;
    if (log2_dim_ >= 64) return std::nullopt;
    return std::uint64_t{1} << log2_dim_;
}

bool Domain::contains(Index i) const noexcept
{
    if (!log2_) return i < n_;
    if (log2_dim_ >= 64) return true;
    return (i >> log2_dim_) == 0;
}

bool Domain::storable(std::uint64_t limit) const noexcept
{
    auto d = dim();
    return d && *d <= limit;
}

ExplicitMatrix ExplicitMatrix::from_triplets(std::uint64_t n, std::vector<Triplet> triplets)
{
    for (const auto& t : triplets)
        if (t.row >= n || t.col >= n)
            throw Error("matrix entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                        ") outside " + std::to_string(n) + "x" + std::to_string(n));
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });

    ExplicitMatrix m;
    m.n_ = n;
    m.col_ptr_.assign(n + 1, 0);
    m.col_l1_.assign(n, 0.0);
    for (std::size_t i = 0; i < triplets.size();) {
        const Index row = triplets[i].row, col = triplets[i].col;
        Complex sum = 0.0;
        for (; i < triplets.size() && triplets[i].row == row && triplets[i].col == col; ++i)
            sum += triplets[i].value;
        if (sum == 0.0) continue;
        m.row_idx_.push_back(row);
        m.values_.push_back(sum);
        ++m.col_ptr_[col + 1];
        m.col_l1_[col] += std::abs(sum);
    }
    for (std::uint64_t j = 0; j < n; ++j) m.col_ptr_[j + 1] += m.col_ptr_[j];
    return m;
}

ExplicitMatrix ExplicitMatrix::identity(std::uint64_t n)
{
    std::vector<Triplet> t;
    t.reserve(n);
    for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, std::move(t));
}

void ExplicitMatrix::append_column(Index j, std::vector<Entry>& out) const
{
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) out.push_back({row_idx_[p], values_[p]});
}

std::optional<double> ExplicitMatrix::column_l1(Index j) const
{
    return col_l1_[j];
}

std::vector<Complex> ExplicitMatrix::to_dense() const
{
    std::vector<Complex> d(n_ * n_, 0.0);
    for (Index j = 0; j < n_; ++j)
        for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) d[row_idx_[p] * n_ + j] = values_[p];
    return d;
}

std::vector<ExplicitMatrix::Triplet> ExplicitMatrix::triplets() const
{
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (Index j = 0; j < n_; ++j)
        for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) t.push_back({row_idx_[p], j, values_[p]});
    return t;
}

namespace {

void check_support(const ColumnOracle& op, const SparseVector& v)
{
    const auto dom = op.domain();
    if (!v.empty() && !dom.contains(v.entries().back().index))
        throw Error("index " + std::to_string(v.entries().back().index) + " out of operator range");
}

void append_products(const ColumnOracle& op, std::span<const Entry> support, std::vector<Entry>& out)
{
    std::vector<Entry> col;
    for (const auto& e : support) {
        col.clear();
        op.append_column(e.index, col);
        for (const auto& c : col) out.push_back({c.index, c.value * e.value});
    }
}

SparseVector sort_and_combine(std::vector<Entry> products)
{
    std::sort(products.begin(), products.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    std::vector<Entry> out;
    out.reserve(products.size());
    for (std::size_t i = 0; i < products.size();) {
        const Index row = products[i].index;
        Complex sum = products[i].value;
        for (++i; i < products.size() && products[i].index == row; ++i) sum += products[i].value;
        if (sum != 0.0) out.push_back({row, sum});
    }
    return SparseVector::from_sorted(std::move(out));
}

}  // namespace

SparseVector apply_sparse(const ColumnOracle& op, const SparseVector& v, unsigned threads)
{
    check_support(op, v);
    auto support = v.entries();
    std::vector<Entry> products;

    constexpr std::size_t kMinPerThread = 4096;
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(threads, support.size() / kMinPerThread));
    if (workers <= 1) {
        products.reserve(2 * support.size());
        append_products(op, support, products);
    } else {
        // chunk outputs are concatenated in chunk order, so the sort input is
        // identical for every thread count
        std::vector<std::vector<Entry>> parts(workers);
        std::vector<std::thread> pool;
        const std::size_t chunk = (support.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = std::min(support.size(), w * chunk);
            const std::size_t hi = std::min(support.size(), lo + chunk);
            pool.emplace_back([&, lo, hi, w] { append_products(op, support.subspan(lo, hi - lo), parts[w]); });
        }
        for (auto& t : pool) t.join();
        std::size_t total = 0;
        for (const auto& p : parts) total += p.size();
        products.reserve(total);
        for (const auto& p : parts) products.insert(products.end(), p.begin(), p.end());
    }
    return sort_and_combine(std::move(products));
}

SparseVector apply_column_compressed(const ColumnOracle& op, const SparseVector& v,
                                     std::size_t m_total, RngStream& rng)
{
    if (m_total == 0) throw Error("column compression budget must be positive");
    check_support(op, v);

    struct ColumnPlan {
        Index col;
        Complex coeff;  // replaces v_j
        std::size_t budget;
    };
    std::vector<ColumnPlan> plan;

    std::vector<double> norms;
    norms.reserve(v.nnz());
    bool have_norms = true;
    for (const auto& e : v) {
        auto n = op.column_l1(e.index);
        if (!n) {
            have_norms = false;
            break;
        }
        norms.push_back(*n);
    }

    if (!have_norms) {
        for (const auto& e : v) plan.push_back({e.index, e.value, 1});
    } else {
        std::vector<Entry> weighted;
        std::vector<double> weighted_norm;
        for (std::size_t p = 0; p < v.nnz(); ++p) {
            if (norms[p] == 0.0) continue;
            weighted.push_back({v.entries()[p].index, v.entries()[p].value * norms[p]});
            weighted_norm.push_back(norms[p]);
        }
        if (weighted.empty()) return {};
        const auto x = SparseVector::from_sorted(weighted);
        const double total = l1_norm(x);
        auto norm_of = [&](Index col) {
            auto it = std::lower_bound(weighted.begin(), weighted.end(), col,
                                       [](const Entry& e, Index i) { return e.index < i; });
            return weighted_norm[static_cast<std::size_t>(it - weighted.begin())];
        };

        auto split = exact_preservation_split(x, m_total);
        for (const auto& e : split.preserved) {
            const double share = static_cast<double>(m_total) * std::abs(e.value) / total;
            plan.push_back({e.index, e.value / norm_of(e.index),
                            static_cast<std::size_t>(std::ceil(share))});
        }
        if (!split.remainder.empty()) {
            const std::size_t budget = m_total - split.tau;
            const double unit = l1_norm(split.remainder) / static_cast<double>(budget);
            auto drawn = stochastic_round_systematic(split.remainder, budget, rng);
            for (const auto& e : drawn) {
                auto count = static_cast<std::size_t>(std::llround(std::abs(e.value) / unit));
                plan.push_back({e.index, e.value / norm_of(e.index), std::max<std::size_t>(count, 1)});
            }
        }
        std::sort(plan.begin(), plan.end(), [](const ColumnPlan& a, const ColumnPlan& b) { return a.col < b.col; });
    }

    std::vector<Entry> products;
    CompressionRule column_rule{RuleKind::Systematic, 1};
    for (const auto& cp : plan) {
        auto col = SparseVector::from_pairs(op.column(cp.col));
        if (col.empty()) continue;
        column_rule.m = cp.budget;
        auto kept = compress(column_rule, col, rng);
        for (const auto& c : kept) products.push_back({c.index, c.value * cp.coeff});
    }
    return sort_and_combine(std::move(products));
}

}  // namespace fri
