#include "hodse/simlab.hpp"

#include "hodse/errors.hpp"
#include "hodse/numeric.hpp"
#include "hodse/rng.hpp"
#include "hodse/smoothing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace hodse {

// ---------------------------------------------------------------------------
// Noise models
// ---------------------------------------------------------------------------

NoiseModel NoiseModel::gaussian(double sigma_n) {
    NoiseModel m;
    m.family = Family::gaussian;
    m.sigma_n = sigma_n;
    return m;
}

NoiseModel NoiseModel::rademacher(double sigma_n) {
    NoiseModel m;
    m.family = Family::rademacher;
    m.sigma_n = sigma_n;
    return m;
}

NoiseModel NoiseModel::uniform(double sigma_n) {
    NoiseModel m;
    m.family = Family::uniform;
    m.sigma_n = sigma_n;
    return m;
}

NoiseModel NoiseModel::scaled_mixture(double sigma_n) {
    NoiseModel m;
    m.family = Family::scaled_mixture;
    m.sigma_n = sigma_n;
    return m;
}

NoiseModel NoiseModel::student_t(double sigma_n, double df) {
    NoiseModel m;
    m.family = Family::student_t;
    m.sigma_n = sigma_n;
    m.student_df = df;
    return m;
}

NoiseModel NoiseModel::parse(const std::string& family, double sigma_n, double student_df) {
    if (family == "gaussian") return gaussian(sigma_n);
    if (family == "rademacher") return rademacher(sigma_n);
    if (family == "uniform") return uniform(sigma_n);
    if (family == "scaled-mixture" || family == "scaled_mixture") return scaled_mixture(sigma_n);
    if (family == "student-t" || family == "student_t") return student_t(sigma_n, student_df);
    throw input_error("unknown noise family '" + family + "'");
}

void NoiseModel::validate(long d) const {
    if (!(sigma_n > 0.0)) throw input_error("noise: sigma_n must be positive");
    if (scales.size() != 0 && scales.size() != d) {
        throw input_error("noise: per-coordinate scale length must match d");
    }
    for (long a = 0; a < scales.size(); ++a) {
        if (!(scales[a] > 0.0)) throw input_error("noise: scales must be positive");
    }
    if (family == Family::student_t && !(student_df > 4.0)) {
        throw input_error("noise: student-t needs more than 4 degrees of freedom");
    }
}

CovarianceModel NoiseModel::covariance(long n, long d) const {
    Eigen::VectorXd diag(d);
    for (long a = 0; a < d; ++a) {
        const double sc = scales.size() ? scales[a] : 1.0;
        diag[a] = static_cast<double>(n) * sigma_n * sigma_n * sc * sc;
    }
    return CovarianceModel::diagonal(diag);
}

Eigen::MatrixXd sample_noise(const NoiseModel& model, long n, long d, std::uint64_t seed,
                             std::uint64_t stream) {
    if (n < 1 || d < 1) throw input_error("sample_noise: need n >= 1 and d >= 1");
    model.validate(d);
    Rng rng(seed, stream);
    Eigen::MatrixXd out(n, d);
    const double base = std::sqrt(static_cast<double>(n)) * model.sigma_n;
    const double t_adjust = model.family == NoiseModel::Family::student_t
                                ? std::sqrt((model.student_df - 2.0) / model.student_df)
                                : 1.0;
    for (long j = 0; j < n; ++j) {
        for (long a = 0; a < d; ++a) {
            const double sd = base * (model.scales.size() ? model.scales[a] : 1.0);
            double v = 0.0;
            switch (model.family) {
            case NoiseModel::Family::gaussian:
                v = sd * rng.normal();
                break;
            case NoiseModel::Family::rademacher:
                v = sd * rng.rademacher();
                break;
            case NoiseModel::Family::uniform:
                v = sd * std::sqrt(3.0) * (2.0 * rng.uniform01() - 1.0);
                break;
            case NoiseModel::Family::scaled_mixture: {
                const double f = rng.uniform01() <= 0.5 ? NoiseModel::mixture_lo
                                                        : NoiseModel::mixture_hi;
                v = sd * f * rng.normal();
                break;
            }
            case NoiseModel::Family::student_t:
                v = sd * t_adjust * rng.student_t(static_cast<int>(model.student_df));
                break;
            }
            out(j, a) = v;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Product-moment condition checker
// ---------------------------------------------------------------------------

namespace {

double double_factorial_odd(int k) {
    // (2k-1)!!
    double v = 1.0;
    for (int i = 3; i <= 2 * k - 1; i += 2) v *= i;
    return v;
}

double factorial_d(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double log_choose(long n, long j) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(j) + 1.0) -
           std::lgamma(static_cast<double>(n - j) + 1.0);
}

/// E[(s_1 + ... + s_n)^(2k)] for independent uniform signs, exactly,
/// via the binomial distribution of the number of +1 entries.
double sign_sum_moment(long n, int k) {
    double max_e = -1e308;
    std::vector<double> es;
    es.reserve(static_cast<std::size_t>(n) + 1);
    for (long j = 0; j <= n; ++j) {
        const double diff = std::abs(static_cast<double>(n - 2 * j));
        if (diff == 0.0) continue;
        const double e = log_choose(n, j) + 2.0 * k * std::log(diff) -
                         static_cast<double>(n) * std::log(2.0);
        es.push_back(e);
        max_e = std::max(max_e, e);
    }
    if (es.empty()) return 0.0;
    CompensatedSum s;
    for (double e : es) s.add(std::exp(e - max_e));
    return std::exp(max_e) * s.value();
}

} // namespace

NoiseConditionReport check_noise_condition(const NoiseModel& model, long n, int k_max,
                                           NoiseCheckMethod method, double tol,
                                           long mc_draws, std::uint64_t seed) {
    if (n < 1 || k_max < 1) throw input_error("check_noise_condition: need n >= 1, k_max >= 1");
    model.validate(1);
    const double s2 = model.sigma_n * model.sigma_n;

    NoiseConditionReport rep;
    rep.method = method;

    std::vector<double> moments(static_cast<std::size_t>(k_max) + 1, 0.0);
    std::vector<double> ci(static_cast<std::size_t>(k_max) + 1, 0.0);

    switch (method) {
    case NoiseCheckMethod::closed_form:
        if (model.family == NoiseModel::Family::gaussian) {
            // n^-1 sum_j e'_j eps_j is exactly N(0, sigma_n^2) for any signs.
            for (int k = 1; k <= k_max; ++k) {
                moments[static_cast<std::size_t>(k)] = std::pow(s2, k) * double_factorial_odd(k);
            }
        } else if (model.family == NoiseModel::Family::rademacher) {
            // The product of two independent sign vectors is again a uniform
            // sign vector, so the statistic is sigma_n * (sum of n signs)/sqrt(n).
            for (int k = 1; k <= k_max; ++k) {
                moments[static_cast<std::size_t>(k)] =
                    std::pow(s2, k) * sign_sum_moment(n, k) /
                    std::pow(static_cast<double>(n), k);
            }
        } else {
            throw input_error("closed-form check covers gaussian and rademacher only");
        }
        break;
    case NoiseCheckMethod::exhaustive: {
        if (model.family != NoiseModel::Family::rademacher) {
            throw input_error("exhaustive check covers two-point (rademacher) noise only");
        }
        if (n > 12) throw input_error("exhaustive check limited to n <= 12");
        // Folding e' into the sign pattern, the statistic over all patterns is
        // sigma_n * (n - 2*popcount)/sqrt(n), each pattern equally likely.
        const long patterns = 1L << n;
        std::vector<CompensatedSum> acc(static_cast<std::size_t>(k_max) + 1);
        for (long p = 0; p < patterns; ++p) {
            const int pop = __builtin_popcountll(static_cast<unsigned long long>(p));
            const double y = model.sigma_n * static_cast<double>(n - 2 * pop) /
                             std::sqrt(static_cast<double>(n));
            const double y2 = y * y;
            double v = 1.0;
            for (int k = 1; k <= k_max; ++k) {
                v *= y2;
                acc[static_cast<std::size_t>(k)].add(v);
            }
        }
        for (int k = 1; k <= k_max; ++k) {
            moments[static_cast<std::size_t>(k)] =
                acc[static_cast<std::size_t>(k)].value() / static_cast<double>(patterns);
        }
        break;
    }
    case NoiseCheckMethod::monte_carlo: {
        if (mc_draws < 100) throw input_error("monte-carlo check needs at least 100 draws");
        std::vector<CompensatedSum> sum(static_cast<std::size_t>(k_max) + 1);
        std::vector<CompensatedSum> sum_sq(static_cast<std::size_t>(k_max) + 1);
        for (long t = 0; t < mc_draws; ++t) {
            const Eigen::MatrixXd eps = sample_noise(model, n, 1, seed, static_cast<std::uint64_t>(t));
            Rng sign_rng(seed ^ 0x51a77e57ULL, static_cast<std::uint64_t>(t));
            CompensatedSum dotp;
            for (long j = 0; j < n; ++j) dotp.add(sign_rng.rademacher() * eps(j, 0));
            const double y = dotp.value() / static_cast<double>(n);
            const double y2 = y * y;
            double v = 1.0;
            for (int k = 1; k <= k_max; ++k) {
                v *= y2;
                sum[static_cast<std::size_t>(k)].add(v);
                sum_sq[static_cast<std::size_t>(k)].add(v * v);
            }
        }
        for (int k = 1; k <= k_max; ++k) {
            const double mean = sum[static_cast<std::size_t>(k)].value() / mc_draws;
            const double var =
                std::max(0.0, sum_sq[static_cast<std::size_t>(k)].value() / mc_draws - mean * mean);
            moments[static_cast<std::size_t>(k)] = mean;
            ci[static_cast<std::size_t>(k)] = 4.0 * std::sqrt(var / mc_draws);
        }
        break;
    }
    }

    rep.all_pass = true;
    for (int k = 1; k <= k_max; ++k) {
        NoiseConditionItem item;
        item.k = k;
        item.moment = moments[static_cast<std::size_t>(k)];
        item.bound = std::pow(s2, k) * std::pow(2.0, k - 1) * factorial_d(k);
        item.ci_half = ci[static_cast<std::size_t>(k)];
        item.margin = item.bound - item.moment;
        // The roundoff allowance keeps exact-equality cases (e.g. the sign
        // family at k = 1, where the moment meets the bound) from flipping on
        // the last few ulps of the log-space evaluation.
        item.pass = item.moment <= item.bound * (1.0 + tol + 1e-12) + item.ci_half;
        rep.all_pass = rep.all_pass && item.pass;
        rep.items.push_back(item);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Parameter generators
// ---------------------------------------------------------------------------

Eigen::VectorXd make_theta(const ThetaSpec& spec, long d, std::uint64_t seed) {
    if (d < 1) throw input_error("make_theta: need d >= 1");
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    switch (spec.kind) {
    case ThetaSpec::Kind::zeros:
        break;
    case ThetaSpec::Kind::constant:
        theta.setConstant(spec.c);
        break;
    case ThetaSpec::Kind::uniform: {
        if (!(spec.hi >= spec.lo)) throw input_error("make_theta: uniform needs hi >= lo");
        Rng rng(seed, 0xA5A5);
        for (long a = 0; a < d; ++a) {
            theta[a] = spec.lo + (spec.hi - spec.lo) * rng.uniform01();
        }
        break;
    }
    case ThetaSpec::Kind::sparse: {
        if (spec.sparse_k < 0 || spec.sparse_k > d) {
            throw input_error("make_theta: sparse count out of range");
        }
        for (long a = 0; a < spec.sparse_k; ++a) theta[a] = spec.magnitude;
        break;
    }
    }
    return theta;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

CltDiagnostics clt_diagnostics(const std::vector<double>& errors, double v1, long n) {
    if (!(v1 > 0.0)) throw input_error("clt_diagnostics: v1 must be positive");
    if (n < 1) throw input_error("clt_diagnostics: need n >= 1");
    if (errors.empty()) throw input_error("clt_diagnostics: no errors supplied");

    const double scale = std::sqrt(static_cast<double>(n) / v1);
    std::vector<double> z(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) z[i] = errors[i] * scale;
    std::sort(z.begin(), z.end());

    const double r = static_cast<double>(z.size());
    CltDiagnostics out;
    double ks = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = normal_cdf(z[i]);
        ks = std::max(ks, std::max(cdf - static_cast<double>(i) / r,
                                   static_cast<double>(i + 1) / r - cdf));
    }
    out.ks_distance = ks;

    CompensatedSum s1;
    for (double v : z) s1.add(v);
    const double mean = s1.value() / r;
    CompensatedSum s2, s3, s4;
    for (double v : z) {
        const double c = v - mean;
        s2.add(c * c);
        s3.add(c * c * c);
        s4.add(c * c * c * c);
    }
    const double m2 = s2.value() / r;
    if (m2 > 0.0) {
        out.skewness = (s3.value() / r) / std::pow(m2, 1.5);
        out.kurtosis = (s4.value() / r) / (m2 * m2);
    }
    return out;
}

Overlays theoretical_overlays(const FunctionalModel& model, const Eigen::VectorXd& theta,
                              const OverlayInputs& in) {
    if (!model.per_coordinate()) {
        throw contract_error("theoretical_overlays: additive model required");
    }
    if (theta.size() != model.dimension()) {
        throw input_error("theoretical_overlays: theta dimension mismatch");
    }
    if (in.s < 2) throw contract_error("theoretical_overlays: need s >= 2");
    if (!(in.alpha > 0.0 && in.alpha <= 1.0)) {
        throw contract_error("theoretical_overlays: alpha must lie in (0, 1]");
    }
    if (in.d < 3) throw contract_error("theoretical_overlays: need d >= 3");
    const long d = model.dimension();

    Overlays ov;
    ov.bias_hd = model.target_value(theta) - model.eval(theta);

    CompensatedSum kappa;
    for (int k = 1; k <= in.s - 1; ++k) {
        CompensatedSum norm2;
        for (long a = 0; a < d; ++a) {
            const double raw = model.scalar_deriv(theta[a], k) * static_cast<double>(d);
            norm2.add(raw * raw);
        }
        kappa.add(norm2.value() * std::pow(in.sigma_n, 2 * k) * 2.0 /
                  (static_cast<double>(d) * static_cast<double>(d) * factorial_d(k)));
    }
    ov.kappa = kappa.value();

    const double tail =
        in.holder_s * std::exp(static_cast<double>(in.s) * std::log(std::pow(2.0, 3.5) * in.sigma_n) -
                               0.5 * std::lgamma(static_cast<double>(in.s) + 1.0));
    ov.error_bound = std::sqrt(ov.bias_hd * ov.bias_hd + ov.kappa) + tail;
    ov.rate = in.c_alpha * std::pow(in.sigma_n, in.alpha) /
              std::pow(std::log(static_cast<double>(in.d)), 0.5 * in.alpha);
    return ov;
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

namespace {

struct MomentStats {
    double bias = 0.0, variance = 0.0, mse = 0.0;
    double bias_se = 0.0, variance_se = 0.0, mse_se = 0.0;
};

/// Mean/variance/MSE of errors with leave-one-out standard errors.
MomentStats summarize_errors(const std::vector<double>& e) {
    MomentStats st;
    const long r = static_cast<long>(e.size());
    if (r == 0) return st;
    CompensatedSum cs1, cs2;
    for (double v : e) {
        cs1.add(v);
        cs2.add(v * v);
    }
    const double s1 = cs1.value(), s2 = cs2.value();
    const double rr = static_cast<double>(r);
    st.bias = s1 / rr;
    st.mse = s2 / rr;
    st.variance = r >= 2 ? std::max(0.0, (s2 - rr * st.bias * st.bias) / (rr - 1.0)) : 0.0;
    if (r < 3) return st;

    CompensatedSum jb, jv, jm, jb2, jv2, jm2;
    for (double v : e) {
        const double mb = (s1 - v) / (rr - 1.0);
        const double mm = (s2 - v * v) / (rr - 1.0);
        const double mv = std::max(0.0, (s2 - v * v - (rr - 1.0) * mb * mb) / (rr - 2.0));
        jb.add(mb);
        jv.add(mv);
        jm.add(mm);
        jb2.add(mb * mb);
        jv2.add(mv * mv);
        jm2.add(mm * mm);
    }
    const double f = (rr - 1.0) / rr;
    const auto jse = [&](const CompensatedSum& s, const CompensatedSum& sq) {
        const double mean = s.value() / rr;
        return std::sqrt(std::max(0.0, f * (sq.value() - rr * mean * mean)));
    };
    st.bias_se = jse(jb, jb2);
    st.variance_se = jse(jv, jv2);
    st.mse_se = jse(jm, jm2);
    return st;
}

double variance_of(const std::vector<double>& v) {
    const long r = static_cast<long>(v.size());
    if (r < 2) return 0.0;
    CompensatedSum s1, s2;
    for (double x : v) {
        s1.add(x);
        s2.add(x * x);
    }
    const double mean = s1.value() / static_cast<double>(r);
    return std::max(0.0, (s2.value() - static_cast<double>(r) * mean * mean) /
                             (static_cast<double>(r) - 1.0));
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    const long d = config.model.dimension();
    if (config.theta.size() != d) throw input_error("run_experiment: theta dimension mismatch");
    if (config.replications < 1) throw input_error("run_experiment: need replications >= 1");
    if (config.n < 1) throw input_error("run_experiment: need n >= 1");
    config.noise.validate(d);
    if (config.estimators.empty()) throw input_error("run_experiment: no estimators requested");
    for (const std::string& est : config.estimators) {
        if (est != "plugin" && est != "hodse" && est != "bootstrap") {
            throw input_error("run_experiment: unknown estimator '" + est +
                              "' (want plugin|hodse|bootstrap)");
        }
    }

    const long r_total = config.replications;
    const std::size_t n_est = config.estimators.size();
    const bool want_decompose =
        config.with_decompose &&
        std::find(config.estimators.begin(), config.estimators.end(), "hodse") !=
            config.estimators.end();

    ExperimentReport rep;
    rep.n = config.n;
    rep.d = d;
    rep.replications_requested = r_total;
    rep.m = config.m;
    rep.sigma_n = config.noise.sigma_n;
    rep.bandwidth = config.model.smoothing() ? config.model.smoothing()->bandwidth() : 0.0;
    rep.f_target = config.model.target_value(config.theta);
    rep.f_smooth = config.model.eval(config.theta);
    rep.outside_theory = !config.noise.within_theory();
    rep.estimator_names = config.estimators;
    rep.estimates.assign(n_est, std::vector<double>(static_cast<std::size_t>(r_total), 0.0));
    if (want_decompose) {
        rep.s_terms.assign(static_cast<std::size_t>(config.m),
                           std::vector<double>(static_cast<std::size_t>(r_total), 0.0));
        rep.remainders.assign(static_cast<std::size_t>(r_total), 0.0);
    }

    std::vector<std::string> rep_failure(static_cast<std::size_t>(r_total));

    const auto run_one = [&](long r) {
        try {
            const Eigen::MatrixXd noise =
                sample_noise(config.noise, config.n, d, config.master_seed,
                             static_cast<std::uint64_t>(r));
            const Eigen::MatrixXd samples = noise.rowwise() + config.theta.transpose();
            for (std::size_t e = 0; e < n_est; ++e) {
                const std::string& name = config.estimators[e];
                double value = 0.0;
                if (name == "plugin") {
                    value = plug_in_estimate(samples, config.model);
                } else if (name == "hodse") {
                    value = hodse_estimate(samples, config.model, config.m).value;
                } else {
                    const std::uint64_t seed_b =
                        config.master_seed +
                        0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(r) + 1);
                    value = bootstrap_estimate(samples, config.model, config.m,
                                               config.bootstrap_draws, seed_b)
                                .value;
                }
                rep.estimates[e][static_cast<std::size_t>(r)] = value;
            }
            if (want_decompose) {
                const Decomposition dec =
                    decompose(samples, config.model, config.m, config.theta);
                for (int k = 1; k <= config.m; ++k) {
                    rep.s_terms[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(r)] =
                        dec.s_k[static_cast<std::size_t>(k) - 1];
                }
                rep.remainders[static_cast<std::size_t>(r)] = dec.remainder;
            }
        } catch (const error& ex) {
            rep_failure[static_cast<std::size_t>(r)] = ex.what();
        }
    };

    const int threads = std::max(1, config.threads);
    if (threads == 1 || r_total == 1) {
        for (long r = 0; r < r_total; ++r) run_one(r);
    } else {
        std::atomic<long> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const long r = next.fetch_add(1);
                    if (r >= r_total) return;
                    run_one(r);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Merge in replication order: drop failed replications, abort on > 1%.
    std::vector<long> ok_reps;
    for (long r = 0; r < r_total; ++r) {
        if (rep_failure[static_cast<std::size_t>(r)].empty()) {
            ok_reps.push_back(r);
        } else {
            rep.failures.push_back("replication " + std::to_string(r) + ": " +
                                   rep_failure[static_cast<std::size_t>(r)]);
        }
    }
    rep.replications_completed = static_cast<long>(ok_reps.size());
    if (static_cast<double>(rep.failures.size()) > 0.01 * static_cast<double>(r_total)) {
        throw numeric_error("run_experiment: " + std::to_string(rep.failures.size()) + " of " +
                            std::to_string(r_total) + " replications failed (first: " +
                            rep.failures.front() + ")");
    }

    // Compact estimate tables to completed replications.
    if (rep.replications_completed != r_total) {
        for (std::size_t e = 0; e < n_est; ++e) {
            std::vector<double> kept;
            kept.reserve(ok_reps.size());
            for (long r : ok_reps) kept.push_back(rep.estimates[e][static_cast<std::size_t>(r)]);
            rep.estimates[e] = std::move(kept);
        }
        if (want_decompose) {
            for (auto& col : rep.s_terms) {
                std::vector<double> kept;
                kept.reserve(ok_reps.size());
                for (long r : ok_reps) kept.push_back(col[static_cast<std::size_t>(r)]);
                col = std::move(kept);
            }
            std::vector<double> kept;
            kept.reserve(ok_reps.size());
            for (long r : ok_reps) kept.push_back(rep.remainders[static_cast<std::size_t>(r)]);
            rep.remainders = std::move(kept);
        }
    }

    // Error statistics per estimator.
    for (std::size_t e = 0; e < n_est; ++e) {
        std::vector<double> errors(rep.estimates[e].size());
        for (std::size_t i = 0; i < errors.size(); ++i) {
            errors[i] = rep.estimates[e][i] - rep.f_target;
        }
        const MomentStats st = summarize_errors(errors);
        EstimatorStats es;
        es.name = config.estimators[e];
        es.bias = st.bias;
        es.variance = st.variance;
        es.mse = st.mse;
        es.bias_se = st.bias_se;
        es.variance_se = st.variance_se;
        es.mse_se = st.mse_se;
        rep.stats.push_back(es);
    }

    const CovarianceModel cov = config.noise.covariance(config.n, d);

    // Per-order variance diagnostics (empirical Var(k! s_k) vs prediction).
    if (want_decompose) {
        for (int k = 1; k <= config.m; ++k) {
            const double kfact = factorial_d(k);
            std::vector<double> scaled(rep.s_terms[static_cast<std::size_t>(k) - 1]);
            for (double& v : scaled) v *= kfact;
            rep.var_s_emp.push_back(variance_of(scaled));
            double pred = std::numeric_limits<double>::quiet_NaN();
            try {
                pred = predicted_var_s_k(config.n, k, v_k(config.model, config.theta, cov, k));
            } catch (const error&) {
            }
            rep.var_s_pred.push_back(pred);
        }
    }

    // CLT diagnostics on the bias-corrected estimator when V_1 > 0.
    rep.clt_valid = false;
    try {
        rep.v1 = v_k(config.model, config.theta, cov, 1);
    } catch (const error&) {
        rep.v1 = 0.0;
    }
    std::size_t clt_source = n_est;
    for (std::size_t e = 0; e < n_est; ++e) {
        if (config.estimators[e] == "hodse") clt_source = e;
    }
    if (clt_source == n_est) clt_source = 0;
    if (rep.v1 > 0.0 && !rep.estimates[clt_source].empty()) {
        std::vector<double> errors(rep.estimates[clt_source].size());
        for (std::size_t i = 0; i < errors.size(); ++i) {
            errors[i] = rep.estimates[clt_source][i] - rep.f_target;
        }
        rep.clt = clt_diagnostics(errors, rep.v1, config.n);
        rep.clt_valid = true;
    }

    // Closed-form overlays where the additive theory applies.
    try {
        OverlayInputs oi;
        oi.sigma_n = config.noise.sigma_n;
        oi.n = config.n;
        oi.d = d;
        oi.s = config.m + 1;
        oi.holder_s = config.overlay_holder;
        oi.alpha = config.overlay_alpha;
        oi.c_alpha = config.overlay_c_alpha;
        rep.overlays = theoretical_overlays(config.model, config.theta, oi);
    } catch (const error&) {
        rep.overlays = Overlays{};
    }

    return rep;
}

} // namespace hodse
