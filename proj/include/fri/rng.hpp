#pragma once

#include <cstdint>
#include <random>

namespace fri {

//
// Reproducible uniform stream keyed by (seed, stream).  Backed by
// std::mt19937_64 seeded through std::seed_seq, both of which are exactly
// specified by the standard, and uniforms are formed from the top 53 bits so
// the output is identical across standard library implementations.
//
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Uniform on [0, 1).
    double uniform();

    /// Uniform on the open interval (0, 1).
    double uniform_open();

    std::uint64_t next_u64() { return engine_(); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

/// Stream identifier for the pair (major, minor), e.g. (iteration, purpose).
std::uint64_t stream_id(std::uint64_t major, std::uint64_t minor);

/// Purposes for stream_id's minor key.
enum class StreamPurpose : std::uint64_t {
    Compress = 1,
    ColumnCompress = 2,
    Replica = 3,
    Bench = 4,
};

inline std::uint64_t stream_id(std::uint64_t major, StreamPurpose purpose)
{
    return stream_id(major, static_cast<std::uint64_t>(purpose));
}

}  // namespace fri
