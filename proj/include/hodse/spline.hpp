#pragma once

#include <vector>

namespace hodse {

/// Natural cubic spline on a uniform grid.  Small and allocation-stable:
/// used for kernel tabulation and for table-backed separable functionals.
class UniformCubicSpline {
public:
    UniformCubicSpline() = default;

    /// Build from values y_i at x_i = x0 + i*dx, i = 0..n-1 (n >= 4).
    UniformCubicSpline(double x0, double dx, std::vector<double> y);

    [[nodiscard]] double x_min() const noexcept { return x0_; }
    [[nodiscard]] double x_max() const noexcept { return x0_ + dx_ * (static_cast<double>(y_.size()) - 1.0); }
    [[nodiscard]] bool empty() const noexcept { return y_.empty(); }

    /// Value at x (x is clamped to the grid range).
    [[nodiscard]] double operator()(double x) const noexcept;

    /// First or second derivative at x (clamped).  Higher orders are not
    /// available from a cubic representation.
    [[nodiscard]] double derivative(double x, int order) const;

private:
    double x0_ = 0.0;
    double dx_ = 1.0;
    std::vector<double> y_;
    std::vector<double> m_; ///< second derivatives at the knots

    void locate(double x, int& i, double& t) const noexcept;
};

} // namespace hodse
