#include "fri/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "fri/error.hpp"
#include "fri/format.hpp"

namespace fri {

namespace {

enum class Field { Real, Complex, Pattern };
enum class Symmetry { General, Symmetric, Hermitian, Skew };
enum class Layout { Coordinate, Array };

struct Header {
    Layout layout;
    Field field;
    Symmetry symmetry;
};

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-comment, non-blank line.
    bool next(std::string& line)
    {
        while (std::getline(in_, line)) {
            ++number_;
            auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '%') continue;
            return true;
        }
        return false;
    }

    bool raw(std::string& line)
    {
        if (!std::getline(in_, line)) return false;
        ++number_;
        return true;
    }

    std::size_t number() const { return number_; }

private:
    std::istream& in_;
    std::size_t number_ = 0;
};

Header parse_header(LineReader& reader)
{
    std::string line;
    if (!reader.raw(line)) throw ParseError("empty Matrix Market file", 1);
    std::istringstream ss(line);
    std::string banner, object, layout, field, symmetry;
    ss >> banner >> object >> layout >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", reader.number());
    if (lower(object) != "matrix") throw ParseError("unsupported object '" + object + "'", reader.number());

    Header h{};
    layout = lower(layout);
    if (layout == "coordinate") h.layout = Layout::Coordinate;
    else if (layout == "array") h.layout = Layout::Array;
    else throw ParseError("unsupported format '" + layout + "'", reader.number());

    field = lower(field);
    if (field == "real" || field == "integer" || field == "double") h.field = Field::Real;
    else if (field == "complex") h.field = Field::Complex;
    else if (field == "pattern") h.field = Field::Pattern;
    else throw ParseError("unsupported field '" + field + "'", reader.number());

    symmetry = lower(symmetry);
    if (symmetry == "general") h.symmetry = Symmetry::General;
    else if (symmetry == "symmetric") h.symmetry = Symmetry::Symmetric;
    else if (symmetry == "hermitian") h.symmetry = Symmetry::Hermitian;
    else if (symmetry == "skew-symmetric") h.symmetry = Symmetry::Skew;
    else throw ParseError("unsupported symmetry '" + symmetry + "'", reader.number());

    if (h.layout == Layout::Array && h.field == Field::Pattern)
        throw ParseError("pattern field requires coordinate format", reader.number());
    return h;
}

Complex parse_value(std::istringstream& ss, Field field, std::size_t line)
{
    if (field == Field::Pattern) return 1.0;
    double re = 0.0, im = 0.0;
    if (!(ss >> re)) throw ParseError("malformed numeric value", line);
    if (field == Field::Complex && !(ss >> im)) throw ParseError("missing imaginary part", line);
    return {re, im};
}

void expect_end(std::istringstream& ss, std::size_t line)
{
    std::string extra;
    if (ss >> extra) throw ParseError("unexpected trailing token '" + extra + "'", line);
}

struct RawMatrix {
    std::uint64_t rows = 0, cols = 0;
    std::vector<ExplicitMatrix::Triplet> triplets;
};

RawMatrix read_raw(std::istream& in)
{
    LineReader reader(in);
    const Header h = parse_header(reader);
    std::string line;
    if (!reader.next(line)) throw ParseError("missing size line", reader.number() + 1);

    RawMatrix raw;
    std::istringstream size_ss(line);
    std::uint64_t nnz = 0;
    if (!(size_ss >> raw.rows >> raw.cols)) throw ParseError("malformed size line", reader.number());
    if (h.layout == Layout::Coordinate && !(size_ss >> nnz))
        throw ParseError("malformed size line", reader.number());
    expect_end(size_ss, reader.number());

    auto add = [&](Index i, Index j, Complex x) {
        raw.triplets.push_back({i, j, x});
        if (i == j) return;
        switch (h.symmetry) {
        case Symmetry::General: break;
        case Symmetry::Symmetric: raw.triplets.push_back({j, i, x}); break;
        case Symmetry::Hermitian: raw.triplets.push_back({j, i, std::conj(x)}); break;
        case Symmetry::Skew: raw.triplets.push_back({j, i, -x}); break;
        }
    };

    if (h.layout == Layout::Coordinate) {
        raw.triplets.reserve(nnz);
        for (std::uint64_t k = 0; k < nnz; ++k) {
            if (!reader.next(line))
                throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(k),
                                 reader.number());
            std::istringstream ss(line);
            std::uint64_t i = 0, j = 0;
            if (!(ss >> i >> j)) throw ParseError("malformed entry indices", reader.number());
            if (i < 1 || i > raw.rows || j < 1 || j > raw.cols)
                throw ParseError("entry index out of bounds", reader.number());
            Complex x = parse_value(ss, h.field, reader.number());
            expect_end(ss, reader.number());
            add(i - 1, j - 1, x);
        }
    } else {
        // column-major dense listing; symmetric variants store the lower triangle
        for (std::uint64_t j = 0; j < raw.cols; ++j) {
            const std::uint64_t start = h.symmetry == Symmetry::General ? 0 : (h.symmetry == Symmetry::Skew ? j + 1 : j);
            for (std::uint64_t i = start; i < raw.rows; ++i) {
                if (!reader.next(line)) throw ParseError("unexpected end of array data", reader.number());
                std::istringstream ss(line);
                Complex x = parse_value(ss, h.field, reader.number());
                expect_end(ss, reader.number());
                if (x != 0.0) add(i, j, x);
            }
        }
    }
    if (reader.next(line)) throw ParseError("trailing data after last entry", reader.number());
    return raw;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

void write_value(std::ostream& out, Complex x, bool complex)
{
    out << format_double(x.real());
    if (complex) out << ' ' << format_double(x.imag());
}

}  // namespace

ExplicitMatrix read_matrix_market(std::istream& in)
{
    auto raw = read_raw(in);
    if (raw.rows != raw.cols)
        throw Error("matrix must be square, got " + std::to_string(raw.rows) + "x" + std::to_string(raw.cols));
    return ExplicitMatrix::from_triplets(raw.rows, std::move(raw.triplets));
}

ExplicitMatrix load_matrix_market(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const ExplicitMatrix& matrix)
{
    auto trip = matrix.triplets();
    const bool complex = std::any_of(trip.begin(), trip.end(), [](const auto& t) { return t.value.imag() != 0.0; });
    out << "%%MatrixMarket matrix coordinate " << (complex ? "complex" : "real") << " general\n";
    out << matrix.size() << ' ' << matrix.size() << ' ' << trip.size() << '\n';
    for (const auto& t : trip) {
        out << t.row + 1 << ' ' << t.col + 1 << ' ';
        write_value(out, t.value, complex);
        out << '\n';
    }
}

void save_matrix_market(const std::filesystem::path& path, const ExplicitMatrix& matrix)
{
    auto out = open_output(path);
    write_matrix_market(out, matrix);
}

LoadedVector read_matrix_market_vector(std::istream& in)
{
    auto raw = read_raw(in);
    if (raw.cols != 1) throw Error("vector file must have exactly one column, got " + std::to_string(raw.cols));
    std::vector<Entry> pairs;
    pairs.reserve(raw.triplets.size());
    for (const auto& t : raw.triplets) pairs.push_back({t.row, t.value});
    return {raw.rows, SparseVector::from_pairs(std::move(pairs))};
}

LoadedVector load_matrix_market_vector(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_matrix_market_vector(in);
}

void write_matrix_market_vector(std::ostream& out, std::uint64_t dim, const SparseVector& v)
{
    const bool complex = std::any_of(v.begin(), v.end(), [](const Entry& e) { return e.value.imag() != 0.0; });
    out << "%%MatrixMarket matrix coordinate " << (complex ? "complex" : "real") << " general\n";
    out << dim << " 1 " << v.nnz() << '\n';
    for (const auto& e : v) {
        out << e.index + 1 << " 1 ";
        write_value(out, e.value, complex);
        out << '\n';
    }
}

void save_matrix_market_vector(const std::filesystem::path& path, std::uint64_t dim, const SparseVector& v)
{
    auto out = open_output(path);
    write_matrix_market_vector(out, dim, v);
}

}  // namespace fri
