#pragma once

#include "hodse/spline.hpp"

#include <atomic>
#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

namespace hodse {

/// Numerically measured properties of a frequency profile Q.
struct ProfileAudit {
    double q_at_zero = 0.0;   ///< Q(0); the kernel normalization needs (2*pi)^(-1/2)
    double l1_q = 0.0;        ///< integral of |Q| over [-1,1]
    double l2_q = 0.0;        ///< L2 norms of Q, Q', Q''
    double l2_q1 = 0.0;
    double l2_q2 = 0.0;
    double c1 = 0.0;          ///< smallest constant satisfying the profile conditions
    bool conditions_ok = false;
};

/// Kernel-side integrals, measured by direct quadrature of the tabulated
/// kernel (an independent route from the closed-form identities they check).
struct KernelAudit {
    double integral = 0.0;        ///< int K       (should be 1)
    double abs_integral = 0.0;    ///< int |K|
    double abs_moment1 = 0.0;     ///< int |y K(y)| dy
    double signed_abs_moment = 0.0; ///< int |y| K(y) dy (signed kernel)
    double k_at_zero = 0.0;       ///< K(0)
};

struct KernelTable; // tabulated kernel + derived tables (internal)

/// An even window Q supported on [-1,1] whose Fourier transform is the
/// smoothing kernel K.  Carries closures for Q, Q', Q'' plus the audit.
struct FrequencyProfile {
    std::function<double(double)> Q;
    std::function<double(double)> Q1;
    std::function<double(double)> Q2;
    ProfileAudit audit;

    /// Lazily built shared kernel tabulation (thread-safe).
    std::shared_ptr<KernelTable> table;
};

/// The built-in profile Q(z) = (2*pi)^(-1/2) (1-z^2)^3 on [-1,1], with all
/// profile conditions audited numerically and the constant c1 reported.
FrequencyProfile default_profile();

/// K^(j)(x) by direct adaptive quadrature of the frequency integral
///   2 (2*pi)^(-1/2) int_0^1 Q(z) z^j cos(z x + j pi/2) dz.
/// Contract: 0 <= j <= 12.
double kernel_eval(const FrequencyProfile& profile, double x, int j = 0);

/// Kernel-side audit integrals (builds the kernel tabulation on first use).
KernelAudit kernel_audit(const FrequencyProfile& profile);

/// Kernel-smoothed |x|^p: evaluation by convolution quadrature against K,
/// derivatives by the single-sided frequency integral
///   f_h^(k)(x) = 2 C_p int_0^(1/h) Q(h z) z^(k-1-p) trig_k(x z) dz,
/// trig_k in {-cos, sin, cos, -sin} by k mod 4, C_p = sqrt(2/pi) Gamma(p+1)
/// sin(pi p/2).  Node/weight sets are cached per refinement level so batch
/// evaluation over many x is cheap; caches are safe to share across threads.
class SmoothedFunctional {
public:
    /// p in (0,1]; h > 0.  max_order bounds the derivative order the
    /// frequency caches are built for.
    SmoothedFunctional(FrequencyProfile profile, double h, double p,
                       int max_order = 24);

    [[nodiscard]] double bandwidth() const noexcept { return h_; }
    [[nodiscard]] double exponent() const noexcept { return p_; }
    [[nodiscard]] double cp() const noexcept { return cp_; }
    [[nodiscard]] int max_order() const noexcept { return max_order_; }
    [[nodiscard]] const FrequencyProfile& profile() const noexcept { return profile_; }

    /// f_h(x) = int K(y) f0(x - h y) dy truncated to |y| <= truncation();
    /// always the convolution route, never the frequency integral.
    [[nodiscard]] double eval(double x) const;

    /// f_h^(k)(x); k = 0 forwards to eval.  Contract: k <= max_order(),
    /// |x|/h <= 1e4 (oscillation guard -> numeric_error).
    [[nodiscard]] double deriv(double x, int k) const;

    /// f_h^(k)(x) for k = k_lo..k_hi in one pass (shared trig evaluations).
    [[nodiscard]] std::vector<double> deriv_batch(double x, int k_lo, int k_hi) const;

    /// Convolution truncation half-width Y (default 1e3).
    [[nodiscard]] double truncation() const noexcept { return y_max_; }

    static constexpr double oscillation_guard = 1e4;

private:
    struct FreqLevel {
        std::vector<double> zeta;              ///< nodes on (0, 1/h)
        std::vector<std::vector<double>> wk;   ///< wk[k-1][i], k = 1..max_order
        std::vector<double> sum_abs;           ///< per-k absolute weight mass
    };

    FrequencyProfile profile_;
    double h_;
    double p_;
    double cp_;
    int max_order_;
    double y_max_ = 1e3;

    // Lazily built refinement levels, published through an atomic counter so
    // readers never take the build mutex once a level exists.
    static constexpr int max_levels = 13;
    mutable std::array<std::shared_ptr<const FreqLevel>, max_levels> levels_;
    mutable std::atomic<int> built_levels_{0};
    mutable std::mutex build_mutex_;

    // abs fast path: G(X) = int_X^Y (y - X) K(y) dy, tabulated and splined.
    mutable std::shared_ptr<const UniformCubicSpline> abs_table_;
    mutable std::mutex abs_mutex_;

    const FreqLevel& level(int idx) const;
    void build_level(int idx) const;
    [[nodiscard]] double eval_abs(double x) const;
    [[nodiscard]] double eval_pow(double x) const;
};

/// Bandwidth / expansion-order tuning for the separable path at dimension d:
///   L = log(d / log d), h = sigma_n / sqrt(L), s_theory = ceil(2^7 e L),
///   s = min(s_theory, cap).  Contract: d >= 3, sigma_n > 0, cap >= 3.
struct TuningRule {
    double log_ratio = 0.0;  ///< L = log(d / log d)
    double h_theory = 0.0;   ///< sigma_n / sqrt(L)
    long s_theory = 0;       ///< ceil(2^7 e L)
    long s = 0;              ///< min(s_theory, cap)
    bool capped = false;     ///< s_theory > cap
};

TuningRule tuning(long d, double sigma_n, long cap = 24);

} // namespace hodse
