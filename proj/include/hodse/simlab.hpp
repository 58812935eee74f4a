#pragma once

#include "hodse/estimator.hpp"
#include "hodse/functional.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hodse {

/// Mean-zero noise families, all scaled so that a coordinate of the
/// observation noise has variance n * sigma_n^2 * scale_a^2 — the sample
/// mean of n observations then has per-coordinate variance sigma_n^2.
struct NoiseModel {
    enum class Family { gaussian, rademacher, uniform, scaled_mixture, student_t };

    Family family = Family::gaussian;
    double sigma_n = 1.0;
    Eigen::VectorXd scales;   ///< optional per-coordinate multipliers (empty = 1)
    double student_df = 6.0;  ///< > 4
    /// Two-point variance mixture: sd factor sqrt(0.5) or sqrt(1.5), each
    /// with probability 1/2 (unit mean square).
    static constexpr double mixture_lo = 0.70710678118654752440;
    static constexpr double mixture_hi = 1.22474487139158904910;

    static NoiseModel gaussian(double sigma_n);
    static NoiseModel rademacher(double sigma_n);
    static NoiseModel uniform(double sigma_n);
    static NoiseModel scaled_mixture(double sigma_n);
    static NoiseModel student_t(double sigma_n, double df);
    static NoiseModel parse(const std::string& family, double sigma_n,
                            double student_df = 6.0);

    void validate(long d) const;
    /// True whether the sub-Gaussian product-moment conditions are known to
    /// hold (student_t runs are labeled outside-theory).
    [[nodiscard]] bool within_theory() const noexcept {
        return family != Family::student_t;
    }
    /// Per-observation noise covariance (diagonal).
    [[nodiscard]] CovarianceModel covariance(long n, long d) const;
};

/// n x d noise draw; rows are observations.  Deterministic in (seed, stream):
/// entries are generated row-major from one counter-based stream.
Eigen::MatrixXd sample_noise(const NoiseModel& model, long n, long d, std::uint64_t seed,
                             std::uint64_t stream = 0);

// ---------------------------------------------------------------------------
// Product-moment condition checker
// ---------------------------------------------------------------------------

enum class NoiseCheckMethod { closed_form, exhaustive, monte_carlo };

struct NoiseConditionItem {
    int k = 0;
    double moment = 0.0;   ///< E |n^-1 sum_j e'_j eps_j|^(2k) (or its estimate)
    double bound = 0.0;    ///< sigma_n^(2k) 2^(k-1) k!
    double margin = 0.0;   ///< bound - moment
    double ci_half = 0.0;  ///< 4 standard errors (monte_carlo only)
    bool pass = true;
};

struct NoiseConditionReport {
    NoiseCheckMethod method = NoiseCheckMethod::closed_form;
    std::vector<NoiseConditionItem> items; ///< k = 1..k_max
    bool all_pass = true;
};

/// Checks E|n^-1 sum_j e'_j eps_{j,a}|^(2k) <= sigma_n^(2k) 2^(k-1) k! for
/// k = 1..k_max, where e'_j are independent uniform signs.
///  - closed_form: gaussian ((2k-1)!! double factorial) and rademacher
///    (exact binomial sum) only;
///  - exhaustive: rademacher with n <= 12, enumerating all sign patterns;
///  - monte_carlo: any family; flags only violations beyond 4 standard errors.
NoiseConditionReport check_noise_condition(const NoiseModel& model, long n, int k_max,
                                           NoiseCheckMethod method, double tol = 0.0,
                                           long mc_draws = 200000, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

struct ThetaSpec {
    enum class Kind { zeros, constant, uniform, sparse };
    Kind kind = Kind::zeros;
    double c = 0.0;        ///< constant value
    double lo = 0.0;       ///< uniform lower bound
    double hi = 1.0;       ///< uniform upper bound
    long sparse_k = 1;     ///< number of nonzero leading coordinates
    double magnitude = 1.0;
};

/// Deterministic parameter vector (uniform kind uses its own fixed stream of
/// the given seed; sparse places `sparse_k` leading entries at `magnitude`).
Eigen::VectorXd make_theta(const ThetaSpec& spec, long d, std::uint64_t seed);

struct ExperimentConfig {
    explicit ExperimentConfig(FunctionalModel functional) : model(std::move(functional)) {}

    FunctionalModel model;            ///< the functional under study
    Eigen::VectorXd theta;            ///< true parameter
    NoiseModel noise;
    long n = 0;
    long replications = 1;
    std::uint64_t master_seed = 1;
    std::vector<std::string> estimators{"hodse", "plugin"}; ///< of plugin|hodse|bootstrap
    int m = 2;                        ///< correction order
    long bootstrap_draws = 1000;
    int threads = 1;
    bool with_decompose = true;       ///< collect per-order terms and remainders
    double overlay_alpha = 1.0;       ///< smoothness index for the rate overlay
    double overlay_c_alpha = 1.0;     ///< constant in front of the rate
    double overlay_holder = 0.0;      ///< smoothness factor for the tail term
};

struct EstimatorStats {
    std::string name;
    double bias = 0.0, variance = 0.0, mse = 0.0;
    double bias_se = 0.0, variance_se = 0.0, mse_se = 0.0; ///< leave-one-out
};

struct CltDiagnostics {
    double ks_distance = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0; ///< raw (normal -> 3)
};

struct Overlays {
    double bias_hd = 0.0;     ///< (1/d) sum_a (f0 - f_h)(theta_a)
    double kappa = 0.0;       ///< sum_k |f_h^(k)(theta)|_2^2 sigma_n^(2k) / ((d^2/2) k!)
    double error_bound = 0.0; ///< sqrt(bias^2 + kappa) + holder (2^3.5 sigma_n)^s / sqrt(s!)
    double rate = 0.0;        ///< c_alpha sigma_n^alpha / (log d)^(alpha/2)
};

struct ExperimentReport {
    long n = 0, d = 0;
    long replications_requested = 0, replications_completed = 0;
    int m = 0;
    double sigma_n = 0.0;
    double bandwidth = 0.0;   ///< 0 when the model has no smoothing attached
    double f_target = 0.0;    ///< raw f(theta)
    double f_smooth = 0.0;    ///< model value at theta (equals f_target unsmoothed)
    bool outside_theory = false;

    std::vector<EstimatorStats> stats;          ///< aligned with estimator_names
    std::vector<std::string> estimator_names;
    std::vector<std::vector<double>> estimates; ///< [estimator][replication]

    std::vector<double> var_s_emp;  ///< k = 1..m: empirical Var(k! s_k)
    std::vector<double> var_s_pred; ///< k = 1..m: C_{k,n} k! V_k / n^k
    std::vector<std::vector<double>> s_terms; ///< [k-1][replication]
    std::vector<double> remainders;           ///< [replication]

    double v1 = 0.0;
    bool clt_valid = false;
    CltDiagnostics clt;

    Overlays overlays;
    std::vector<std::string> failures; ///< one message per failed replication
};

/// Runs `replications` independent draws; replication r derives its streams
/// from (master_seed, r), so reports are a pure function of (config, seed)
/// regardless of the thread count.  Aborts (numeric_error) when more than 1%
/// of replications fail.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Standardizes errors by sqrt(v1/n) and compares with the standard normal:
/// two-sided Kolmogorov-Smirnov distance plus moment diagnostics.
CltDiagnostics clt_diagnostics(const std::vector<double>& errors, double v1, long n);

struct OverlayInputs {
    double sigma_n = 1.0;
    long n = 0;
    long d = 0;
    int s = 2;               ///< expansion size (correction order + 1)
    double holder_s = 0.0;   ///< smoothness factor of the tail term
    double alpha = 1.0;      ///< smoothness index in (0, 1]
    double c_alpha = 1.0;
};

/// Closed-form overlay values for a (possibly smoothed) additive model.
Overlays theoretical_overlays(const FunctionalModel& model, const Eigen::VectorXd& theta,
                              const OverlayInputs& in);

} // namespace hodse
