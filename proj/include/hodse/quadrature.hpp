#pragma once

#include <functional>
#include <vector>

namespace hodse {

/// Gauss-Legendre rule on [-1,1].  Nodes/weights are generated once per
/// order by Newton iteration on the Legendre recurrence (machine accuracy).
struct GaussLegendre {
    std::vector<double> x; ///< nodes in (-1,1), ascending
    std::vector<double> w; ///< positive weights, sum = 2

    /// Cached rule for the given order.  Orders 8, 16 and 32 are the ones
    /// the library uses; other orders are computed on first use.
    static const GaussLegendre& rule(int order);
};

/// Integral of f over a single panel [a,b] with the given rule.
double gl_panel(const std::function<double(double)>& f, double a, double b,
                const GaussLegendre& rule);

/// Integral of f over consecutive panels defined by ascending breakpoints.
double integrate_breakpoints(const std::function<double(double)>& f,
                             const std::vector<double>& breakpoints,
                             const GaussLegendre& rule);

/// Options for the panel-doubling adaptive scheme.
struct AdaptiveOptions {
    /// Stop when successive totals differ by less than rel_tol*max(1,|I|).
    double rel_tol = 1e-11;
    int initial_panels = 4;      ///< uniform panels at the first level
    int max_level = 14;          ///< panel count doubles per level
    int gl_order = 16;
    /// Number of extra dyadic panels packed against each endpoint; use for
    /// integrable endpoint singularities (|t|^a with a > -1).
    int geometric_levels_left = 0;
    int geometric_levels_right = 0;
};

/// Adaptive integral of f over [a,b]: panels are refined dyadically, doubling
/// the uniform panel count per level until two successive totals agree to
/// rel_tol (relative to max(|I|, abs_floor)).  Throws numeric_error if the
/// doubling budget is exhausted without convergence.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, const AdaptiveOptions& opts = {});

/// Breakpoint vector for [a,b]: `uniform_panels` equal panels, after which
/// each point of `splits` (interior kinks) gets `geo_levels` dyadic panels
/// packed against it from both sides.
std::vector<double> make_breakpoints(double a, double b, int uniform_panels,
                                     const std::vector<double>& splits = {},
                                     int geo_levels = 0);

} // namespace hodse
