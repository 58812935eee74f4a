#include "hodse/spline.hpp"

#include "hodse/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hodse {

UniformCubicSpline::UniformCubicSpline(double x0, double dx, std::vector<double> y)
    : x0_(x0), dx_(dx), y_(std::move(y)) {
    const std::size_t n = y_.size();
    if (n < 4) throw contract_error("UniformCubicSpline: need at least 4 knots");
    if (!(dx > 0.0)) throw contract_error("UniformCubicSpline: dx must be positive");

    // Natural spline: solve the tridiagonal system for second derivatives.
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), rhs(n, 0.0);
    // Interior equations: m[i-1] + 4 m[i] + m[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]) / dx^2
    for (std::size_t i = 1; i + 1 < n; ++i) {
        rhs[i] = 6.0 * (y_[i - 1] - 2.0 * y_[i] + y_[i + 1]) / (dx * dx);
    }
    // Thomas algorithm with natural boundary (m[0] = m[n-1] = 0).
    double beta = 4.0;
    if (n > 2) {
        m_[1] = rhs[1] / beta;
        for (std::size_t i = 2; i + 1 < n; ++i) {
            c[i] = 1.0 / beta;
            beta = 4.0 - c[i];
            m_[i] = (rhs[i] - m_[i - 1]) / beta;
        }
        for (std::size_t i = n - 3; i >= 1; --i) {
            m_[i] -= c[i + 1] * m_[i + 1];
            if (i == 1) break;
        }
    }
}

void UniformCubicSpline::locate(double x, int& i, double& t) const noexcept {
    const std::size_t n = y_.size();
    double u = (x - x0_) / dx_;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    i = std::min(static_cast<int>(u), static_cast<int>(n) - 2);
    t = u - static_cast<double>(i);
}

double UniformCubicSpline::operator()(double x) const noexcept {
    int i;
    double t;
    locate(x, i, t);
    const double a = 1.0 - t;
    const double h2 = dx_ * dx_;
    return a * y_[static_cast<std::size_t>(i)] + t * y_[static_cast<std::size_t>(i) + 1] +
           h2 / 6.0 * ((a * a * a - a) * m_[static_cast<std::size_t>(i)] +
                       (t * t * t - t) * m_[static_cast<std::size_t>(i) + 1]);
}

double UniformCubicSpline::derivative(double x, int order) const {
    if (order < 1 || order > 2) {
        throw contract_error("UniformCubicSpline: only derivative orders 1 and 2 are available");
    }
    int i;
    double t;
    locate(x, i, t);
    const double a = 1.0 - t;
    const std::size_t si = static_cast<std::size_t>(i);
    if (order == 1) {
        return (y_[si + 1] - y_[si]) / dx_ +
               dx_ / 6.0 * ((3.0 * t * t - 1.0) * m_[si + 1] - (3.0 * a * a - 1.0) * m_[si]);
    }
    return a * m_[si] + t * m_[si + 1];
}

} // namespace hodse
