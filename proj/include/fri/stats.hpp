#pragma once

#include <cstddef>
#include <span>

#include "fri/sparse.hpp"

namespace fri {

struct EstimateSummary {
    Complex mean = 0.0;
    double variance = 0.0;
    double iat = 1.0;
    double ci95_halfwidth = 0.0;
    std::size_t n_samples = 0;
    std::size_t burn_in_used = 0;
};

/// Window factor c of the self-consistent rule W >= c * tau(W).
inline constexpr double kIatWindowFactor = 5.0;

/// Plain mean of series[burn_in..].
Complex trajectory_average(std::span<const Complex> series, std::size_t burn_in);
double trajectory_average(std::span<const double> series, std::size_t burn_in);

/// tau = 1 + 2 sum_{k<=W} rho(k) with biased autocovariances and the
/// smallest window satisfying W >= kIatWindowFactor * tau(W); clamped to
/// [1, n/2].  Returns 1 for a zero-variance series.  Requires n >= 10.
///
/// Sums are accumulated symmetrically from both ends, so reversing the
/// series reproduces the estimate bit-for-bit.
double integrated_autocorrelation_time(std::span<const double> series);

/// Maximum over the real and imaginary parts.
double integrated_autocorrelation_time(std::span<const Complex> series);

/// Mean, sample variance, IAT and 95% half-width 1.96 sqrt(var * iat / n)
/// of series[burn_in..]; needs at least 10 samples after burn-in.
EstimateSummary summarize(std::span<const double> series, std::size_t burn_in);
EstimateSummary summarize(std::span<const Complex> series, std::size_t burn_in);

/// Summary of independent replica estimates (iat = 1).
EstimateSummary summarize_replicas(std::span<const Complex> estimates);

}  // namespace fri
