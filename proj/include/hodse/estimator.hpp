#pragma once

#include "hodse/functional.hpp"
#include "hodse/ustat.hpp"

#include <cstdint>
#include <vector>

namespace hodse {

/// Bias-corrected estimate f(x_bar) + sum_{k=2}^m <f^(k)(x_bar), u^(k)>/k!.
struct EstimateResult {
    enum class Path { dense, separable, bootstrap };

    double value = 0.0;
    double f_at_mean = 0.0;                ///< f(x_bar) (smoothed value when attached)
    int m = 0;                             ///< correction order used
    std::vector<double> per_order_terms;   ///< k = 2..m, each includes 1/k!
    Path path = Path::dense;
};

/// Exact expansion of one estimate around the true parameter:
/// estimate = f_true + sum_k s_k - remainder.
struct Decomposition {
    std::vector<double> s_k;  ///< k = 1..m; <f^(k)(theta), eps^(k)>/k!
    double remainder = 0.0;   ///< f_true + sum s_k - estimate
    double f_true = 0.0;      ///< f(theta) (smoothed value when attached)
    double estimate = 0.0;
};

/// Triangle-inequality majorant of |remainder|.
struct RemainderBound {
    double bound = 0.0;
    std::vector<double> components; ///< k = 0..m contributions
};

/// Main estimator.  Dispatches to the per-coordinate route for additive
/// models and to dense tensors otherwise (entry budget applies).
/// Requires m >= 1 and n >= m observations (the per-coordinate route
/// requires n >= m + 1).
EstimateResult hodse_estimate(const SampleMatrix& samples, const FunctionalModel& model,
                              int m);

/// Per-coordinate route: (1/d) sum_a { f(x_bar_a) + sum_k f^(k)(x_bar_a)
/// u_a^(k)/k! }, one U-statistic sweep shared by all coordinates.
EstimateResult separable_estimate(const SampleMatrix& samples, const FunctionalModel& model,
                                  int m);

/// Baseline f(x_bar) with the raw (unsmoothed) functional.
double plug_in_estimate(const SampleMatrix& samples, const FunctionalModel& model);

/// Monte Carlo resampling form: each draw picks m rows without replacement
/// (ordered); order-k terms use the first k drawn rows.  Draws come from a
/// counter-based stream, so results do not depend on scheduling.
EstimateResult bootstrap_estimate(const SampleMatrix& samples, const FunctionalModel& model,
                                  int m, long n_draws, std::uint64_t seed);

/// Exhaustive version of bootstrap_estimate over all ordered m-tuples of
/// distinct rows; equals hodse_estimate exactly (small n only).
EstimateResult bootstrap_estimate_exhaustive(const SampleMatrix& samples,
                                             const FunctionalModel& model, int m);

/// Expansion of the estimate around a known true parameter, built from the
/// raw noise eps_j = x_j - theta_true (not re-centered by x_bar).
Decomposition decompose(const SampleMatrix& samples, const FunctionalModel& model, int m,
                        const Eigen::VectorXd& theta_true);

/// Evaluates the remainder both ways for a 1-d model: directly through the
/// weighted-integral form sum_{k=0}^m (-1)^(m-k) (J^(m-k) D)(eps_bar)^(m-k)
/// eps^(k)/k!  with D(t) = f^(m)(x_bar + t(theta - x_bar)) - f^(m)(x_bar)
/// and J^a h = int_0^1 h(t)(1-t)^(a-1) dt / (a-1)!  (J^0 h = h(1)), and
/// indirectly as f_true + sum s_k - estimate.  Returns |direct - indirect|.
double verify_identity(const FunctionalModel& model_1d, double theta,
                       const SampleMatrix& samples, int m, double quad_tol = 1e-10);

/// holder_factor * sum_{k=0}^m |eps_bar|^(s-k) |eps^(k)|_HS / (Gamma(s-k+1) k!)
/// where eps^(0) = 1 and |.|_HS is the plain norm (absolute value in 1-d).
/// Requires m = ceil(s) - 1 and holder_factor >= 0.
RemainderBound remainder_bound(const SampleMatrix& samples, const Eigen::VectorXd& theta_true,
                               int m, double s, double holder_factor);

/// Default correction order: the tuned expansion size minus one, capped and
/// clamped to n - 1.  Requires n >= 3.
int default_order(long n, long d, double sigma_n, long cap = 24);

} // namespace hodse
