#include "fri/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fri/error.hpp"

namespace fri {

namespace {

// sum_i g(i) for i in [0, n), pairing i with n-1-i so that the result is
// invariant under index reversal.
template <typename Term>
double symmetric_sum(std::size_t n, Term term)
{
    double s = 0.0;
    std::size_t i = 0, j = n;
    while (j - i >= 2) {
        --j;
        s += term(i) + term(j);
        ++i;
    }
    if (j - i == 1) s += term(i);
    return s;
}

double mean_of(std::span<const double> x)
{
    return symmetric_sum(x.size(), [&](std::size_t i) { return x[i]; }) / static_cast<double>(x.size());
}

void check_slice(std::size_t length, std::size_t burn_in)
{
    if (burn_in >= length) throw Error("burn-in leaves no samples");
}

std::vector<double> part(std::span<const Complex> series, bool imag)
{
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = imag ? series[i].imag() : series[i].real();
    return out;
}

double sample_variance(std::span<const double> x, double mean)
{
    if (x.size() < 2) return 0.0;
    double ss = symmetric_sum(x.size(), [&](std::size_t i) {
        double d = x[i] - mean;
        return d * d;
    });
    return ss / static_cast<double>(x.size() - 1);
}

}  // namespace

Complex trajectory_average(std::span<const Complex> series, std::size_t burn_in)
{
    check_slice(series.size(), burn_in);
    auto tail = series.subspan(burn_in);
    Complex s = 0.0;
    for (const auto& x : tail) s += x;
    return s / static_cast<double>(tail.size());
}

double trajectory_average(std::span<const double> series, std::size_t burn_in)
{
    check_slice(series.size(), burn_in);
    auto tail = series.subspan(burn_in);
    double s = 0.0;
    for (double x : tail) s += x;
    return s / static_cast<double>(tail.size());
}

double integrated_autocorrelation_time(std::span<const double> series)
{
    const std::size_t n = series.size();
    if (n < 10) throw Error("autocorrelation time needs at least 10 samples");
    const double mu = mean_of(series);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = series[i] - mu;

    auto autocov = [&](std::size_t lag) {
        return symmetric_sum(n - lag, [&](std::size_t i) { return d[i] * d[i + lag]; }) /
               static_cast<double>(n);
    };
    const double c0 = autocov(0);
    if (c0 == 0.0) return 1.0;

    const std::size_t max_window = n / 2;
    double tau = 1.0;
    for (std::size_t w = 1; w <= max_window; ++w) {
        tau += 2.0 * autocov(w) / c0;
        if (static_cast<double>(w) >= kIatWindowFactor * tau) break;
    }
    return std::clamp(tau, 1.0, static_cast<double>(max_window));
}

double integrated_autocorrelation_time(std::span<const Complex> series)
{
    auto re = part(series, false);
    auto im = part(series, true);
    return std::max(integrated_autocorrelation_time(re), integrated_autocorrelation_time(im));
}

EstimateSummary summarize(std::span<const double> series, std::size_t burn_in)
{
    check_slice(series.size(), burn_in);
    auto tail = series.subspan(burn_in);
    if (tail.size() < 10) throw Error("summary needs at least 10 samples after burn-in");
    EstimateSummary s;
    const double mu = mean_of(tail);
    s.mean = mu;
    s.variance = sample_variance(tail, mu);
    s.iat = integrated_autocorrelation_time(tail);
    s.n_samples = tail.size();
    s.burn_in_used = burn_in;
    s.ci95_halfwidth = 1.96 * std::sqrt(s.variance * s.iat / static_cast<double>(s.n_samples));
    return s;
}

EstimateSummary summarize(std::span<const Complex> series, std::size_t burn_in)
{
    check_slice(series.size(), burn_in);
    auto tail = series.subspan(burn_in);
    if (tail.size() < 10) throw Error("summary needs at least 10 samples after burn-in");
    auto re = part(tail, false);
    auto im = part(tail, true);
    const double mre = mean_of(re), mim = mean_of(im);
    EstimateSummary s;
    s.mean = {mre, mim};
    s.variance = sample_variance(re, mre) + sample_variance(im, mim);
    s.iat = std::max(integrated_autocorrelation_time(re), integrated_autocorrelation_time(im));
    s.n_samples = tail.size();
    s.burn_in_used = burn_in;
    s.ci95_halfwidth = 1.96 * std::sqrt(s.variance * s.iat / static_cast<double>(s.n_samples));
    return s;
}

EstimateSummary summarize_replicas(std::span<const Complex> estimates)
{
    if (estimates.empty()) throw Error("no replica estimates");
    auto re = part(estimates, false);
    auto im = part(estimates, true);
    EstimateSummary s;
    const double mre = mean_of(re), mim = mean_of(im);
    s.mean = {mre, mim};
    s.variance = sample_variance(re, mre) + sample_variance(im, mim);
    s.iat = 1.0;
    s.n_samples = estimates.size();
    s.ci95_halfwidth = 1.96 * std::sqrt(s.variance / static_cast<double>(s.n_samples));
    return s;
}

}  // namespace fri
