#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace hodse {

/// Neumaier-compensated accumulator.  Used wherever the contracts promise
/// compensated summation (column means, block power sums); the running
/// compensation keeps sums of n terms accurate to O(eps) instead of O(n*eps).
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }
    void reset() noexcept { sum_ = 0.0; comp_ = 0.0; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Compensated sum of a contiguous range.
[[nodiscard]] inline double compensated_sum(const double* x, std::size_t n) noexcept {
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s.add(x[i]);
    return s.value();
}

/// log(n! / (n-k)!) = log of the falling factorial n*(n-1)*...*(n-k+1),
/// evaluated in log space so that large n never overflows.
[[nodiscard]] inline double log_falling_factorial(long n, long k) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

/// log(k!)
[[nodiscard]] inline double log_factorial(long k) {
    return std::lgamma(static_cast<double>(k) + 1.0);
}

/// Standard normal CDF.
[[nodiscard]] inline double normal_cdf(double z) noexcept {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Machine epsilon shorthand.
inline constexpr double eps = std::numeric_limits<double>::epsilon();

/// True if every entry of v is finite.
[[nodiscard]] inline bool all_finite(const std::vector<double>& v) noexcept {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace hodse
