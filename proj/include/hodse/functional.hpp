#pragma once

#include "hodse/smoothing.hpp"
#include "hodse/spline.hpp"
#include "hodse/tensor.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hodse {

/// One-dimensional building block f0 for additive functionals and for the
/// closed-form 1-d test families.
enum class ScalarFamily {
    abs_value,   ///< |x|                (derivatives require smoothing)
    power,       ///< |x|^p, p in (0,1]  (derivatives require smoothing)
    square,      ///< x^2
    sine,        ///< sin(x)             (all derivatives closed-form)
    exponential, ///< exp(x)             (all derivatives closed-form)
    x_atan,      ///< x * atan(x)        (derivatives closed-form to order 5)
    table        ///< cubic-spline interpolant (derivatives to order 2)
};

struct ScalarSpec {
    ScalarFamily family = ScalarFamily::square;
    double p = 1.0;                ///< exponent for family == power
    double table_x0 = 0.0;         ///< table grid origin
    double table_dx = 0.0;         ///< table grid step
    std::vector<double> table_y;   ///< table values

    static ScalarSpec of(ScalarFamily f) {
        ScalarSpec s;
        s.family = f;
        return s;
    }
    static ScalarSpec abs_value() { return of(ScalarFamily::abs_value); }
    /// p must lie in (0, 1] (input_error otherwise, checked in the factory
    /// so an invalid exponent can never reach a model).
    static ScalarSpec power(double p);
    static ScalarSpec square() { return of(ScalarFamily::square); }
    static ScalarSpec sine() { return of(ScalarFamily::sine); }
    static ScalarSpec exponential() { return of(ScalarFamily::exponential); }
    static ScalarSpec x_atan() { return of(ScalarFamily::x_atan); }
    static ScalarSpec table(double x0, double dx, std::vector<double> y) {
        ScalarSpec s = of(ScalarFamily::table);
        s.table_x0 = x0;
        s.table_dx = dx;
        s.table_y = std::move(y);
        return s;
    }
};

/// A functional f : R^d -> R together with exact derivative access.
///
/// Three kinds:
///  - polynomial: finite multi-index expansion, derivatives by combinatorial
///    differentiation (exact, dense symmetric tensors);
///  - separable:  f(theta) = (1/d) sum_a f0(theta_a) with f0 a ScalarFamily;
///    derivative tensors are diagonal, accessed per coordinate;
///  - custom:     1-d closed-form families for identity and remainder tests.
///
/// Models are immutable after construction; all evaluation is const and
/// thread-safe.
class FunctionalModel {
public:
    enum class Kind { polynomial, separable, custom };

    /// Exact polynomial functional from a multi-index -> coefficient map.
    /// Each key is a length-d exponent vector.
    static FunctionalModel polynomial(std::map<std::vector<int>, double> coefficients,
                                      long d);

    /// Additive functional (1/d) sum_a f0(theta_a).  For abs_value/power a
    /// smoothing must be attached before any derivative query.
    static FunctionalModel separable(ScalarSpec f0, long d,
                                     std::shared_ptr<const SmoothedFunctional> smoothing = nullptr);

    /// 1-d closed-form family by name: "exp", "sin", or "xatan".
    static FunctionalModel custom_1d(const std::string& name);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] long dimension() const noexcept { return d_; }
    /// Largest derivative order answerable exactly (very large when unbounded).
    [[nodiscard]] int derivative_order_max() const noexcept { return order_max_; }
    [[nodiscard]] bool per_coordinate() const noexcept {
        return kind_ != Kind::polynomial;
    }
    [[nodiscard]] const std::shared_ptr<const SmoothedFunctional>& smoothing() const noexcept {
        return smoother_;
    }
    [[nodiscard]] const ScalarSpec& scalar_spec() const;

    /// f(theta).  For smoothed separable models this is the smoothed value
    /// f_h; use target_value for the raw target.
    [[nodiscard]] double eval(const Eigen::VectorXd& theta) const;

    /// The raw functional the estimator is judged against (ignores any
    /// attached smoothing).
    [[nodiscard]] double target_value(const Eigen::VectorXd& theta) const;

    /// Per-coordinate derivative f0^(k)(x)/d, k >= 1 (equals f^(k)'s diagonal
    /// entry).  For custom 1-d models d = 1, so this is f^(k)(x); 1-d
    /// polynomials differentiate directly too.
    /// Contract errors: k = 0, polynomial kind with d > 1, unsmoothed
    /// abs/power, table with k > 2, x_atan with k > 5.
    [[nodiscard]] double scalar_deriv(double x, int k) const;

    /// Batch of per-coordinate derivatives k = k_lo..k_hi at one point
    /// (shares frequency-node trigonometry for smoothed families).
    [[nodiscard]] std::vector<double> scalar_derivs(double x, int k_lo, int k_hi) const;

    /// Dense symmetric derivative tensor f^(k)(theta), all d^k entries.
    /// Separable/custom kinds emit a diagonal tensor.  Entry budget applies.
    [[nodiscard]] DenseTensor derivative_tensor(const Eigen::VectorXd& theta, int k) const;

    /// <f^(k)(theta), T> over all d^k entries; separable kinds contract the
    /// diagonal only (exact: off-diagonal derivative entries vanish).
    [[nodiscard]] double contract_with(const Eigen::VectorXd& theta, int k,
                                       const DenseTensor& t) const;

    /// Raw scalar value f0(x) (no smoothing, no 1/d).
    [[nodiscard]] double scalar_raw(double x) const;

private:
    FunctionalModel() = default;

    Kind kind_ = Kind::polynomial;
    long d_ = 0;
    int order_max_ = 0;

    // polynomial storage
    std::vector<std::pair<std::vector<int>, double>> terms_;
    int total_degree_ = 0;

    // separable / custom storage
    ScalarSpec spec_;
    std::shared_ptr<const SmoothedFunctional> smoother_;
    std::shared_ptr<const UniformCubicSpline> table_;

    [[nodiscard]] double poly_eval(const Eigen::VectorXd& theta) const;
    [[nodiscard]] double poly_partial(const Eigen::VectorXd& theta,
                                      const std::vector<int>& multiplicity) const;
    [[nodiscard]] double scalar_deriv_raw(double x, int k) const;
};

/// d x d noise covariance (per-observation convention).
struct CovarianceModel {
    Eigen::MatrixXd sigma;

    static CovarianceModel dense(Eigen::MatrixXd m);
    static CovarianceModel diagonal(const Eigen::VectorXd& diag);
    static CovarianceModel scaled_identity(long d, double value);

    /// Symmetry within 1e-12 of scale and eigenvalues >= -1e-10 * norm.
    void validate() const;
};

struct EffectiveRank {
    double sigma = 0.0; ///< spectral norm^(1/2): sigma^2 = top eigenvalue
    double r = 0.0;     ///< trace / top eigenvalue, in [1, d]
};

/// Spectral-norm scale and effective rank of a PSD covariance.
/// The all-zero matrix is refused (r undefined).
EffectiveRank effective_rank(const CovarianceModel& cov);

/// V_k = <f^(k)(theta), f^(k)(theta) x_1 Sigma ... x_k Sigma>.
/// Separable model + diagonal covariance uses the exact closed form
/// sum_a (f0^(k)(theta_a)/d)^2 Sigma_aa^k; otherwise dense tensors.
double v_k(const FunctionalModel& model, const Eigen::VectorXd& theta,
           const CovarianceModel& cov, int k);

/// Sampling variance of the k-th order term built from n observations:
/// C_{k,n} k! V_k / n^k, evaluated in log space (= V_k / binom(n, k)).
double predicted_var_s_k(long n, int k, double vk);

/// Best value found by projected power iteration with random restarts.
/// A lower bound on the true symmetric-tensor spectral norm; adequate for
/// plausibility checks at d <= 8, k <= 4.
double tensor_spectral_norm(const DenseTensor& t, int restarts = 20, int iters = 60,
                            std::uint64_t seed = 0x5eed);

struct VarianceTable {
    std::vector<double> v_k;       ///< k = 1..m
    std::vector<double> predicted; ///< C_{k,n} k! V_k / n^k
    std::vector<double> v_k_bound; ///< |f^(k)|_S^2 sigma^(2k) r^(k-1)
};

/// Variance quantities for k = 1..m.  Bounds use exact diagonal spectral
/// norms for separable kinds and power-iteration estimates for small dense
/// polynomial models.
VarianceTable variance_table(const FunctionalModel& model, const Eigen::VectorXd& theta,
                             const CovarianceModel& cov, long n, int m);

/// Grid-supremum estimate of the order-s smoothness constant of a 1-d model:
/// sup |f^(m)(x) - f^(m)(y)| / |x-y|^(s-m) over x != y in a uniform grid on
/// [lo, hi], m = ceil(s) - 1.
double holder_norm_1d(const FunctionalModel& model, double s, double lo, double hi,
                      int grid_n = 201);

} // namespace hodse
