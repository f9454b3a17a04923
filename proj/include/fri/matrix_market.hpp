#pragma once

#include <filesystem>
#include <iosfwd>

#include "fri/linop.hpp"

namespace fri {

// Matrix Market coordinate format: real, integer or complex fields; general,
// symmetric, hermitian or skew-symmetric storage.  Indices in files are
// 1-based.  Errors carry the offending line number.

ExplicitMatrix read_matrix_market(std::istream& in);
ExplicitMatrix load_matrix_market(const std::filesystem::path& path);

/// Writes the `general` storage form, `complex` field only when needed.
void write_matrix_market(std::ostream& out, const ExplicitMatrix& matrix);
void save_matrix_market(const std::filesystem::path& path, const ExplicitMatrix& matrix);

struct LoadedVector {
    std::uint64_t dim = 0;
    SparseVector values;
};

/// An n x 1 matrix, coordinate or array format.
LoadedVector read_matrix_market_vector(std::istream& in);
LoadedVector load_matrix_market_vector(const std::filesystem::path& path);

void write_matrix_market_vector(std::ostream& out, std::uint64_t dim, const SparseVector& v);
void save_matrix_market_vector(const std::filesystem::path& path, std::uint64_t dim,
                               const SparseVector& v);

}  // namespace fri
