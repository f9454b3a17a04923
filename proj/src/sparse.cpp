#include "fri/sparse.hpp"

#include <algorithm>
#include <ostream>

#include "fri/error.hpp"
#include "fri/format.hpp"

namespace fri {

SparseVector SparseVector::from_pairs(std::vector<Entry> pairs)
{
    std::sort(pairs.begin(), pairs.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    std::vector<Entry> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size();) {
        Index idx = pairs[i].index;
        Complex sum = 0.0;
        for (; i < pairs.size() && pairs[i].index == idx; ++i) sum += pairs[i].value;
        if (sum != 0.0) out.push_back({idx, sum});
    }
    return SparseVector(std::move(out));
}

SparseVector SparseVector::from_sorted(std::vector<Entry> entries)
{
    return SparseVector(std::move(entries));
}

Complex SparseVector::at(Index index) const
{
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, Index i) { return e.index < i; });
    if (it != entries_.end() && it->index == index) return it->value;
    return 0.0;
}

DenseFunctional DenseFunctional::all_ones()
{
    return DenseFunctional(Rule([](Index) { return Complex(1.0); }));
}

DenseFunctional DenseFunctional::indicator_at_least(Index threshold)
{
    return DenseFunctional(Rule([threshold](Index i) { return Complex(i >= threshold ? 1.0 : 0.0); }));
}

DenseFunctional DenseFunctional::coordinate(Index index)
{
    return DenseFunctional(SparseVector::from_sorted({{index, 1.0}}));
}

Complex DenseFunctional::operator()(Index index) const
{
    if (const auto* sv = std::get_if<SparseVector>(&repr_)) return sv->at(index);
    return std::get<Rule>(repr_)(index);
}

Complex DenseFunctional::dot(const SparseVector& v) const
{
    Complex sum = 0.0;
    if (const auto* f = std::get_if<SparseVector>(&repr_)) {
        // merge over the two sorted supports
        auto fi = f->begin();
        for (const auto& e : v) {
            while (fi != f->end() && fi->index < e.index) ++fi;
            if (fi == f->end()) break;
            if (fi->index == e.index) sum += std::conj(fi->value) * e.value;
        }
        return sum;
    }
    const auto& rule = std::get<Rule>(repr_);
    for (const auto& e : v) sum += std::conj(rule(e.index)) * e.value;
    return sum;
}

double l1_norm(const SparseVector& v)
{
    double s = 0.0;
    for (const auto& e : v) s += std::abs(e.value);
    return s;
}

Complex dot(const DenseFunctional& f, const SparseVector& v)
{
    return f.dot(v);
}

SparseVector scale(const SparseVector& v, Complex c)
{
    std::vector<Entry> out;
    out.reserve(v.nnz());
    for (const auto& e : v) {
        Complex x = c * e.value;
        if (x != 0.0) out.push_back({e.index, x});
    }
    return SparseVector::from_sorted(std::move(out));
}

SparseVector axpy(Complex a, const SparseVector& x, const SparseVector& y)
{
    std::vector<Entry> out;
    out.reserve(x.nnz() + y.nnz());
    auto xi = x.begin();
    auto yi = y.begin();
    auto push = [&](Index i, Complex val) {
        if (val != 0.0) out.push_back({i, val});
    };
    while (xi != x.end() || yi != y.end()) {
        if (yi == y.end() || (xi != x.end() && xi->index < yi->index)) {
            push(xi->index, a * xi->value);
            ++xi;
        } else if (xi == x.end() || yi->index < xi->index) {
            push(yi->index, yi->value);
            ++yi;
        } else {
            push(xi->index, a * xi->value + yi->value);
            ++xi;
            ++yi;
        }
    }
    return SparseVector::from_sorted(std::move(out));
}

SparseVector normalize_l1(const SparseVector& v)
{
    double n = l1_norm(v);
    if (n == 0.0) throw Error("zero vector");
    std::vector<Entry> out;
    out.reserve(v.nnz());
    for (const auto& e : v) {
        Complex x = e.value / n;
        if (x != 0.0) out.push_back({e.index, x});
    }
    return SparseVector::from_sorted(std::move(out));
}

SparseVector project_zero(const SparseVector& v, const IndexPredicate& forbidden)
{
    if (!forbidden) return v;
    std::vector<Entry> out;
    out.reserve(v.nnz());
    for (const auto& e : v)
        if (!forbidden(e.index)) out.push_back(e);
    return SparseVector::from_sorted(std::move(out));
}

void write_debug_dump(std::ostream& out, const SparseVector& v)
{
    for (const auto& e : v)
        out << e.index << ',' << format_double(e.value.real()) << ',' << format_double(e.value.imag())
            << '\n';
}

}  // namespace fri
