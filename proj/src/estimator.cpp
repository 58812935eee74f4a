#include "hodse/estimator.hpp"

#include "hodse/errors.hpp"
#include "hodse/numeric.hpp"
#include "hodse/quadrature.hpp"
#include "hodse/rng.hpp"
#include "hodse/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hodse {

namespace {

void require_shapes(const SampleMatrix& samples, const FunctionalModel& model) {
    if (samples.cols() != model.dimension()) {
        throw input_error("sample has " + std::to_string(samples.cols()) +
                          " columns but the model expects " +
                          std::to_string(model.dimension()));
    }
    if (samples.rows() < 1) throw input_error("sample has no rows");
}

/// Order feasibility.  The dense path needs every u-statistic order k <= m to
/// have at least k observations (n >= m); the per-coordinate path additionally
/// reserves one observation, n >= m+1.
void require_order(long n, int m, bool per_coordinate_path = false) {
    if (m < 1) throw contract_error("correction order m must be >= 1");
    if (per_coordinate_path) {
        if (n < static_cast<long>(m) + 1) {
            throw contract_error("per-coordinate expansion of order " + std::to_string(m) +
                                 " requires n >= m+1 = " + std::to_string(m + 1) +
                                 " observations, got n = " + std::to_string(n));
        }
    } else if (n < static_cast<long>(m)) {
        throw contract_error("correction order " + std::to_string(m) +
                             " exceeds the sample size n = " + std::to_string(n) +
                             " (need n >= m here, and n >= m+1 on the per-coordinate path)");
    }
}

double factorial_d(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

std::vector<double> column_vector(const Eigen::MatrixXd& m, long a) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (long j = 0; j < m.rows(); ++j) v[static_cast<std::size_t>(j)] = m(j, a);
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// Main estimator
// ---------------------------------------------------------------------------

EstimateResult separable_estimate(const SampleMatrix& samples, const FunctionalModel& model,
                                  int m) {
    if (!model.per_coordinate()) {
        throw contract_error("separable_estimate: model has no per-coordinate form");
    }
    require_shapes(samples, model);
    require_order(samples.rows(), m, true);

    const CenteredSample cs = center(samples);
    const UStatSet us = compute_ustats(cs, m, false);
    const long d = model.dimension();

    EstimateResult r;
    r.path = EstimateResult::Path::separable;
    r.m = m;
    r.f_at_mean = model.eval(cs.means);

    std::vector<CompensatedSum> acc(m >= 2 ? static_cast<std::size_t>(m - 1)
                                           : std::size_t{0});
    for (long a = 0; a < d; ++a) {
        if (m < 2) break;
        const std::vector<double> derivs = model.scalar_derivs(cs.means[a], 2, m);
        for (int k = 2; k <= m; ++k) {
            acc[static_cast<std::size_t>(k) - 2].add(
                derivs[static_cast<std::size_t>(k) - 2] * us.per_coordinate(k - 1, a));
        }
    }
    CompensatedSum total;
    total.add(r.f_at_mean);
    for (int k = 2; k <= m; ++k) {
        const double term = acc[static_cast<std::size_t>(k) - 2].value() / factorial_d(k);
        r.per_order_terms.push_back(term);
        total.add(term);
    }
    r.value = total.value();
    return r;
}

EstimateResult hodse_estimate(const SampleMatrix& samples, const FunctionalModel& model,
                              int m) {
    if (model.per_coordinate()) return separable_estimate(samples, model, m);
    require_shapes(samples, model);
    require_order(samples.rows(), m);

    const CenteredSample cs = center(samples);
    const UStatSet us = compute_ustats(cs, m, true);

    EstimateResult r;
    r.path = EstimateResult::Path::dense;
    r.m = m;
    r.f_at_mean = model.eval(cs.means);
    CompensatedSum total;
    total.add(r.f_at_mean);
    for (int k = 2; k <= m; ++k) {
        const double term = model.contract_with(cs.means, k,
                                                us.dense[static_cast<std::size_t>(k) - 1]) /
                            factorial_d(k);
        r.per_order_terms.push_back(term);
        total.add(term);
    }
    r.value = total.value();
    return r;
}

double plug_in_estimate(const SampleMatrix& samples, const FunctionalModel& model) {
    require_shapes(samples, model);
    return model.target_value(center(samples).means);
}

// ---------------------------------------------------------------------------
// Bootstrap forms
// ---------------------------------------------------------------------------

namespace {

struct BootstrapContext {
    const FunctionalModel& model;
    const CenteredSample& cs;
    int m;
    // per-coordinate derivative rows c[k-2][a] = f^(k)'s diagonal at x_bar
    std::vector<std::vector<double>> diag_derivs;
    // dense derivative tensors at x_bar for k = 2..m
    std::vector<DenseTensor> tensors;

    BootstrapContext(const FunctionalModel& model_, const CenteredSample& cs_, int m_)
        : model(model_), cs(cs_), m(m_) {
        const long d = model.dimension();
        if (model.per_coordinate()) {
            if (m >= 2) {
                diag_derivs.assign(static_cast<std::size_t>(m - 1),
                                   std::vector<double>(static_cast<std::size_t>(d)));
                for (long a = 0; a < d; ++a) {
                    const std::vector<double> derivs = model.scalar_derivs(cs.means[a], 2, m);
                    for (int k = 2; k <= m; ++k) {
                        diag_derivs[static_cast<std::size_t>(k) - 2][static_cast<std::size_t>(a)] =
                            derivs[static_cast<std::size_t>(k) - 2];
                    }
                }
            }
        } else {
            for (int k = 2; k <= m; ++k) {
                tensors.push_back(model.derivative_tensor(cs.means, k));
            }
        }
    }

    /// Adds the per-order contributions of one ordered tuple of rows to acc.
    void accumulate(const std::vector<long>& rows, std::vector<CompensatedSum>& acc) const {
        const long d = model.dimension();
        if (model.per_coordinate()) {
            thread_local std::vector<double> prod;
            prod.assign(static_cast<std::size_t>(d), 1.0);
            for (int k = 1; k <= m; ++k) {
                const long row = rows[static_cast<std::size_t>(k) - 1];
                CompensatedSum term;
                for (long a = 0; a < d; ++a) {
                    prod[static_cast<std::size_t>(a)] *= cs.centered(row, a);
                    if (k >= 2) {
                        term.add(diag_derivs[static_cast<std::size_t>(k) - 2]
                                            [static_cast<std::size_t>(a)] *
                                 prod[static_cast<std::size_t>(a)]);
                    }
                }
                if (k >= 2) acc[static_cast<std::size_t>(k) - 2].add(term.value());
            }
        } else {
            thread_local std::vector<std::vector<double>> pts;
            pts.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(d)));
            for (int i = 0; i < m; ++i) {
                for (long a = 0; a < d; ++a) {
                    pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] =
                        cs.centered(rows[static_cast<std::size_t>(i)], a);
                }
            }
            std::vector<const double*> ptrs;
            for (int k = 2; k <= m; ++k) {
                ptrs.clear();
                for (int i = 0; i < k; ++i) ptrs.push_back(pts[static_cast<std::size_t>(i)].data());
                acc[static_cast<std::size_t>(k) - 2].add(
                    tensors[static_cast<std::size_t>(k) - 2].contract_rank1(ptrs));
            }
        }
    }
};

long rand_below(Rng& rng, long limit) {
    const double u = rng.uniform01();
    long v = static_cast<long>(u * static_cast<double>(limit));
    if (v >= limit) v = limit - 1;
    return v;
}

EstimateResult finish_bootstrap(const BootstrapContext& ctx,
                                const std::vector<CompensatedSum>& acc, double draws) {
    EstimateResult r;
    r.path = EstimateResult::Path::bootstrap;
    r.m = ctx.m;
    r.f_at_mean = ctx.model.eval(ctx.cs.means);
    CompensatedSum total;
    total.add(r.f_at_mean);
    for (int k = 2; k <= ctx.m; ++k) {
        const double term = acc[static_cast<std::size_t>(k) - 2].value() /
                            (draws * factorial_d(k));
        r.per_order_terms.push_back(term);
        total.add(term);
    }
    r.value = total.value();
    return r;
}

} // namespace

EstimateResult bootstrap_estimate(const SampleMatrix& samples, const FunctionalModel& model,
                                  int m, long n_draws, std::uint64_t seed) {
    require_shapes(samples, model);
    require_order(samples.rows(), m);
    if (n_draws < 1) throw input_error("bootstrap_estimate: n_draws must be >= 1");

    const CenteredSample cs = center(samples);
    const BootstrapContext ctx(model, cs, m);
    const long n = samples.rows();

    std::vector<CompensatedSum> acc(m >= 2 ? static_cast<std::size_t>(m - 1)
                                           : std::size_t{0});
    std::vector<long> pool(static_cast<std::size_t>(n));
    std::vector<long> rows(static_cast<std::size_t>(m));
    for (long t = 0; t < n_draws; ++t) {
        Rng rng(seed, static_cast<std::uint64_t>(t));
        for (long j = 0; j < n; ++j) pool[static_cast<std::size_t>(j)] = j;
        for (int i = 0; i < m; ++i) {
            const long j = i + rand_below(rng, n - i);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            rows[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
        }
        ctx.accumulate(rows, acc);
    }
    return finish_bootstrap(ctx, acc, static_cast<double>(n_draws));
}

EstimateResult bootstrap_estimate_exhaustive(const SampleMatrix& samples,
                                             const FunctionalModel& model, int m) {
    require_shapes(samples, model);
    require_order(samples.rows(), m);
    const long n = samples.rows();
    double tuples = 1.0;
    for (int i = 0; i < m; ++i) tuples *= static_cast<double>(n - i);
    if (tuples > 1e6) {
        throw capacity_error("exhaustive bootstrap would enumerate " + std::to_string(tuples) +
                             " tuples; use the Monte Carlo form");
    }

    const CenteredSample cs = center(samples);
    const BootstrapContext ctx(model, cs, m);
    std::vector<CompensatedSum> acc(m >= 2 ? static_cast<std::size_t>(m - 1)
                                           : std::size_t{0});
    std::vector<long> rows(static_cast<std::size_t>(m));
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    long count = 0;
    const std::function<void(int)> recurse = [&](int depth) {
        if (depth == m) {
            ctx.accumulate(rows, acc);
            ++count;
            return;
        }
        for (long j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            used[static_cast<std::size_t>(j)] = true;
            rows[static_cast<std::size_t>(depth)] = j;
            recurse(depth + 1);
            used[static_cast<std::size_t>(j)] = false;
        }
    };
    recurse(0);
    return finish_bootstrap(ctx, acc, static_cast<double>(count));
}

// ---------------------------------------------------------------------------
// Expansion around the true parameter
// ---------------------------------------------------------------------------

Decomposition decompose(const SampleMatrix& samples, const FunctionalModel& model, int m,
                        const Eigen::VectorXd& theta_true) {
    require_shapes(samples, model);
    require_order(samples.rows(), m);
    if (theta_true.size() != model.dimension()) {
        throw input_error("decompose: theta dimension mismatch");
    }

    const Eigen::MatrixXd eps = samples.rowwise() - theta_true.transpose();
    Decomposition dec;
    dec.estimate = hodse_estimate(samples, model, m).value;
    dec.f_true = model.eval(theta_true);

    const long d = model.dimension();
    std::vector<CompensatedSum> acc(static_cast<std::size_t>(m));
    if (model.per_coordinate()) {
        for (long a = 0; a < d; ++a) {
            const std::vector<double> raw = ustat_scalar_raw(column_vector(eps, a), m);
            const std::vector<double> derivs = model.scalar_derivs(theta_true[a], 1, m);
            for (int k = 1; k <= m; ++k) {
                acc[static_cast<std::size_t>(k) - 1].add(
                    derivs[static_cast<std::size_t>(k) - 1] * raw[static_cast<std::size_t>(k) - 1]);
            }
        }
    } else {
        for (int k = 1; k <= m; ++k) {
            const DenseTensor t = ustat_tensor_raw(eps, k);
            acc[static_cast<std::size_t>(k) - 1].add(model.contract_with(theta_true, k, t));
        }
    }
    CompensatedSum recon;
    recon.add(dec.f_true);
    for (int k = 1; k <= m; ++k) {
        const double sk = acc[static_cast<std::size_t>(k) - 1].value() / factorial_d(k);
        dec.s_k.push_back(sk);
        recon.add(sk);
    }
    recon.add(-dec.estimate);
    dec.remainder = recon.value();
    return dec;
}

double verify_identity(const FunctionalModel& model_1d, double theta,
                       const SampleMatrix& samples, int m, double quad_tol) {
    if (model_1d.dimension() != 1) throw contract_error("verify_identity: model must be 1-d");
    require_shapes(samples, model_1d);
    require_order(samples.rows(), m);
    if (!(quad_tol > 0.0)) throw contract_error("verify_identity: quad_tol must be positive");

    Eigen::VectorXd theta_v(1);
    theta_v[0] = theta;
    const Decomposition dec = decompose(samples, model_1d, m, theta_v);
    const double indirect = dec.remainder;

    const double x_bar = center(samples).means[0];
    const double eps_bar = x_bar - theta;
    const std::vector<double> raw =
        ustat_scalar_raw(column_vector((samples.array() - theta).matrix(), 0), m);

    const double fm_at_mean = model_1d.scalar_deriv(x_bar, m);
    const auto delta = [&](double t) {
        return model_1d.scalar_deriv(x_bar + t * (theta - x_bar), m) - fm_at_mean;
    };

    AdaptiveOptions opts;
    opts.rel_tol = quad_tol;
    opts.gl_order = 2;
    opts.initial_panels = 1;

    CompensatedSum direct;
    for (int k = 0; k <= m; ++k) {
        const int alpha = m - k;
        double j_val = 0.0;
        if (alpha == 0) {
            j_val = delta(1.0);
        } else {
            j_val = integrate_adaptive(
                        [&](double t) { return delta(t) * std::pow(1.0 - t, alpha - 1); }, 0.0,
                        1.0, opts) /
                    factorial_d(alpha - 1);
        }
        const double eps_k = k == 0 ? 1.0 : raw[static_cast<std::size_t>(k) - 1];
        const double sign = (alpha % 2 == 0) ? 1.0 : -1.0;
        direct.add(sign * j_val * std::pow(eps_bar, alpha) * eps_k / factorial_d(k));
    }
    return std::abs(direct.value() - indirect);
}

RemainderBound remainder_bound(const SampleMatrix& samples, const Eigen::VectorXd& theta_true,
                               int m, double s, double holder_factor) {
    if (samples.cols() != theta_true.size()) {
        throw input_error("remainder_bound: theta dimension mismatch");
    }
    require_order(samples.rows(), m);
    if (m != static_cast<int>(std::ceil(s)) - 1) {
        throw contract_error("remainder_bound: m must equal ceil(s) - 1");
    }
    if (!(holder_factor >= 0.0)) {
        throw contract_error("remainder_bound: smoothness factor must be >= 0");
    }

    const Eigen::MatrixXd eps = samples.rowwise() - theta_true.transpose();
    const Eigen::VectorXd eps_bar = eps.colwise().mean();
    const double nb = eps_bar.norm();
    const long d = samples.cols();

    std::vector<double> hs(static_cast<std::size_t>(m) + 1, 1.0); // hs[0] = 1
    if (d == 1) {
        const std::vector<double> raw = ustat_scalar_raw(column_vector(eps, 0), m);
        for (int k = 1; k <= m; ++k) {
            hs[static_cast<std::size_t>(k)] = std::abs(raw[static_cast<std::size_t>(k) - 1]);
        }
    } else {
        for (int k = 1; k <= m; ++k) {
            const DenseTensor t = ustat_tensor_raw(eps, k);
            double sq = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) sq += t[i] * t[i];
            hs[static_cast<std::size_t>(k)] = std::sqrt(sq);
        }
    }

    RemainderBound rb;
    CompensatedSum total;
    for (int k = 0; k <= m; ++k) {
        const double comp = holder_factor * std::pow(nb, s - k) * hs[static_cast<std::size_t>(k)] /
                            (std::tgamma(s - k + 1.0) * factorial_d(k));
        rb.components.push_back(comp);
        total.add(comp);
    }
    rb.bound = total.value();
    return rb;
}

int default_order(long n, long d, double sigma_n, long cap) {
    if (n < 3) throw contract_error("default_order: need n >= 3");
    // The tuning rule is defined for d >= 3; smaller dimensions reuse the
    // d = 3 value.
    const TuningRule t = tuning(std::max<long>(d, 3), sigma_n, cap);
    const long m = std::min<long>(t.s - 1, n - 1);
    return static_cast<int>(m);
}

} // namespace hodse
