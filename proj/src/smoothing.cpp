#include "hodse/smoothing.hpp"

#include "hodse/errors.hpp"
#include "hodse/numeric.hpp"
#include "hodse/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hodse {

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;
constexpr double inv_sqrt_2pi = 0.39894228040143267793994605993438;

} // namespace

// ---------------------------------------------------------------------------
// Kernel tabulation shared by every consumer of a profile.
// ---------------------------------------------------------------------------

struct KernelTable {
    static constexpr double y_max = 1e3;
    static constexpr double dy = 0.05;

    std::mutex mu;
    std::atomic<bool> built{false};
    UniformCubicSpline k_spline; ///< K on [0, y_max]
    KernelAudit audit;

    void ensure(const FrequencyProfile& profile);
};

void KernelTable::ensure(const FrequencyProfile& profile) {
    if (built.load(std::memory_order_acquire)) return;
    std::lock_guard<std::mutex> lock(mu);
    if (built.load(std::memory_order_relaxed)) return;

    const std::size_t grid_n = static_cast<std::size_t>(y_max / dy + 0.5) + 1;
    std::vector<double> kv(grid_n, 0.0);

    // Shared frequency nodes: K(y_i) = sum_w W_w cos(zeta_w y_i), swept over
    // the uniform y-grid with a rotation recurrence per node (no per-point
    // trig).  256 panels resolve cos(y_max * zeta) comfortably.
    {
        const GaussLegendre& rule = GaussLegendre::rule(16);
        const int panels = 256;
        for (int pnl = 0; pnl < panels; ++pnl) {
            const double a = static_cast<double>(pnl) / panels;
            const double b = static_cast<double>(pnl + 1) / panels;
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                const double zeta = mid + half * rule.x[q];
                const double w = 2.0 * inv_sqrt_2pi * half * rule.w[q] * profile.Q(zeta);
                // cos(zeta * (y + dy)) via rotation by zeta*dy.
                const double cd = std::cos(zeta * dy), sd = std::sin(zeta * dy);
                double c = 1.0, s = 0.0;
                for (std::size_t i = 0; i < grid_n; ++i) {
                    kv[i] += w * c;
                    const double cn = c * cd - s * sd;
                    s = s * cd + c * sd;
                    c = cn;
                }
            }
        }
    }
    k_spline = UniformCubicSpline(0.0, dy, std::move(kv));

    // Self-check the table against the independent adaptive route.
    for (double probe : {0.0, 1.7, 10.3, 333.3, 997.4}) {
        const double direct = kernel_eval(profile, probe, 0);
        if (std::abs(k_spline(probe) - direct) > 1e-8) {
            throw numeric_error("kernel tabulation disagrees with direct quadrature at y = " +
                                std::to_string(probe));
        }
    }

    // Audit integrals by quadrature of the tabulated kernel.  Panels of
    // width 0.5 resolve the kernel's oscillation; for the absolute-value
    // integrands, panels are split at bracketed sign changes first.
    const GaussLegendre& rule8 = GaussLegendre::rule(8);
    const auto k_of = [this](double y) { return k_spline(y); };
    std::vector<double> bps;
    {
        const double w = 0.5;
        double y = 0.0;
        bps.push_back(0.0);
        while (y < y_max - 1e-12) {
            const double y2 = std::min(y + w, y_max);
            double f1 = k_of(y), f2 = k_of(y2);
            if (f1 == 0.0) f1 = k_of(y + 1e-9);
            if ((f1 < 0.0) != (f2 < 0.0) && f1 != 0.0 && f2 != 0.0) {
                double lo = y, hi = y2;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if ((k_of(mid) < 0.0) == (f1 < 0.0)) lo = mid; else hi = mid;
                }
                bps.push_back(0.5 * (lo + hi));
            }
            bps.push_back(y2);
            y = y2;
        }
    }
    CompensatedSum kabs, kabs_m1, ksigned_m1;
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
        kabs.add(gl_panel([&](double y) { return std::abs(k_of(y)); }, bps[i], bps[i + 1], rule8));
        kabs_m1.add(gl_panel([&](double y) { return y * std::abs(k_of(y)); }, bps[i], bps[i + 1], rule8));
        ksigned_m1.add(gl_panel([&](double y) { return y * k_of(y); }, bps[i], bps[i + 1], rule8));
    }
    // Total mass through the exact transform identity
    //   int_{-Y}^{Y} K = 4 (2 pi)^{-1/2} int_0^1 Q(z) sin(Y z)/z dz,
    // which avoids accumulating table-interpolation error over the long
    // oscillatory tail; beyond Y the kernel decays like y^-4, so the
    // neglected remainder is O(1e-11) at Y = 1000.
    {
        AdaptiveOptions mass_opts;
        mass_opts.rel_tol = 1e-12;
        mass_opts.initial_panels = 4 + static_cast<int>(y_max / 3.0);
        audit.integral = 4.0 * inv_sqrt_2pi *
                         integrate_adaptive(
                             [&](double z) {
                                 const double sc = z == 0.0 ? y_max : std::sin(y_max * z) / z;
                                 return profile.Q(z) * sc;
                             },
                             0.0, 1.0, mass_opts);
    }
    audit.abs_integral = 2.0 * kabs.value();
    audit.abs_moment1 = 2.0 * kabs_m1.value();
    audit.signed_abs_moment = 2.0 * ksigned_m1.value();
    audit.k_at_zero = k_spline(0.0);

    built.store(true, std::memory_order_release);
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

FrequencyProfile default_profile() {
    FrequencyProfile pr;
    pr.Q = [](double z) {
        if (std::abs(z) > 1.0) return 0.0;
        const double u = 1.0 - z * z;
        return inv_sqrt_2pi * u * u * u;
    };
    pr.Q1 = [](double z) {
        if (std::abs(z) > 1.0) return 0.0;
        const double z2 = z * z;
        return inv_sqrt_2pi * z * (-6.0 + 12.0 * z2 - 6.0 * z2 * z2);
    };
    pr.Q2 = [](double z) {
        if (std::abs(z) > 1.0) return 0.0;
        const double z2 = z * z;
        return inv_sqrt_2pi * (-6.0 + 36.0 * z2 - 30.0 * z2 * z2);
    };
    pr.table = std::make_shared<KernelTable>();

    // Audit the profile conditions numerically.
    AdaptiveOptions opts;
    opts.rel_tol = 1e-13;
    const auto integral = [&](const std::function<double(double)>& f) {
        return integrate_adaptive(f, -1.0, 1.0, opts);
    };
    ProfileAudit& a = pr.audit;
    a.q_at_zero = pr.Q(0.0);
    a.l1_q = integral([&](double z) { return std::abs(pr.Q(z)); });
    a.l2_q = std::sqrt(integral([&](double z) { const double v = pr.Q(z); return v * v; }));
    a.l2_q1 = std::sqrt(integral([&](double z) { const double v = pr.Q1(z); return v * v; }));
    a.l2_q2 = std::sqrt(integral([&](double z) { const double v = pr.Q2(z); return v * v; }));
    const double sqrt_2_over_pi = std::sqrt(2.0 / M_PI);
    const double sqrt_2pi = std::sqrt(two_pi);
    a.c1 = std::max(sqrt_2_over_pi * a.l1_q,
                    sqrt_2pi * std::max({a.l2_q, a.l2_q1, a.l2_q2}));
    a.conditions_ok = std::abs(a.q_at_zero - inv_sqrt_2pi) <= 1e-12 &&
                      a.l1_q <= a.c1 / sqrt_2_over_pi + 1e-12 &&
                      std::max(a.l2_q, a.l2_q2) <= a.c1 / sqrt_2pi + 1e-12;
    return pr;
}

double kernel_eval(const FrequencyProfile& profile, double x, int j) {
    if (j < 0 || j > 12) {
        throw contract_error("kernel_eval: derivative order must be in [0, 12]");
    }
    const double phase = 0.5 * M_PI * j;
    AdaptiveOptions opts;
    opts.rel_tol = 1e-12;
    opts.initial_panels = 4 + static_cast<int>(std::min(std::abs(x), 2e4) / 3.0);
    const auto f = [&](double z) {
        return profile.Q(z) * std::pow(z, j) * std::cos(z * x + phase);
    };
    return 2.0 * inv_sqrt_2pi * integrate_adaptive(f, 0.0, 1.0, opts);
}

KernelAudit kernel_audit(const FrequencyProfile& profile) {
    if (!profile.table) throw contract_error("kernel_audit: profile has no table holder");
    profile.table->ensure(profile);
    return profile.table->audit;
}

// ---------------------------------------------------------------------------
// SmoothedFunctional
// ---------------------------------------------------------------------------

SmoothedFunctional::SmoothedFunctional(FrequencyProfile profile, double h, double p,
                                       int max_order)
    : profile_(std::move(profile)), h_(h), p_(p), max_order_(max_order) {
    if (!(h > 0.0)) throw contract_error("SmoothedFunctional: bandwidth must be positive");
    if (!(p > 0.0 && p <= 1.0)) {
        throw contract_error("SmoothedFunctional: exponent p must lie in (0, 1]");
    }
    if (max_order < 1) throw contract_error("SmoothedFunctional: max_order must be >= 1");
    if (!profile_.table) throw contract_error("SmoothedFunctional: profile has no table holder");
    cp_ = std::sqrt(2.0 / M_PI) * std::tgamma(p + 1.0) * std::sin(0.5 * M_PI * p);
}

void SmoothedFunctional::build_level(int idx) const {
    // Caller holds build_mutex_ and idx == built_levels_.
    const GaussLegendre& rule = GaussLegendre::rule(16);
    const double L = 1.0 / h_;
    const int uniform_panels = 4 << idx;
    constexpr int geo = 12;

    auto lv = std::make_shared<FreqLevel>();
    std::vector<double> edges;
    edges.reserve(static_cast<std::size_t>(uniform_panels) + geo + 1);
    const double w0 = L / uniform_panels;
    edges.push_back(0.0);
    for (int g = geo; g >= 1; --g) edges.push_back(w0 * std::ldexp(1.0, -g));
    for (int i = 1; i <= uniform_panels; ++i) edges.push_back(w0 * i);

    const std::size_t n_nodes = (edges.size() - 1) * rule.x.size();
    lv->zeta.reserve(n_nodes);
    std::vector<double> base;
    base.reserve(n_nodes);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const double mid = 0.5 * (edges[e] + edges[e + 1]);
        const double half = 0.5 * (edges[e + 1] - edges[e]);
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            const double zeta = mid + half * rule.x[q];
            lv->zeta.push_back(zeta);
            base.push_back(2.0 * cp_ * half * rule.w[q] * profile_.Q(h_ * zeta));
        }
    }
    lv->wk.assign(static_cast<std::size_t>(max_order_), {});
    lv->sum_abs.assign(static_cast<std::size_t>(max_order_), 0.0);
    for (int k = 1; k <= max_order_; ++k) {
        auto& wk = lv->wk[static_cast<std::size_t>(k) - 1];
        wk.resize(lv->zeta.size());
        double mass = 0.0;
        const double expo = static_cast<double>(k) - 1.0 - p_;
        for (std::size_t i = 0; i < wk.size(); ++i) {
            wk[i] = base[i] * std::pow(lv->zeta[i], expo);
            mass += std::abs(wk[i]);
        }
        lv->sum_abs[static_cast<std::size_t>(k) - 1] = mass;
    }
    levels_[static_cast<std::size_t>(idx)] = std::move(lv);
    built_levels_.store(idx + 1, std::memory_order_release);
}

const SmoothedFunctional::FreqLevel& SmoothedFunctional::level(int idx) const {
    if (idx >= max_levels) throw numeric_error("frequency quadrature refinement exhausted");
    int built = built_levels_.load(std::memory_order_acquire);
    if (idx < built) return *levels_[static_cast<std::size_t>(idx)];
    std::lock_guard<std::mutex> lock(build_mutex_);
    built = built_levels_.load(std::memory_order_relaxed);
    while (built <= idx) {
        build_level(built);
        built = built_levels_.load(std::memory_order_relaxed);
    }
    return *levels_[static_cast<std::size_t>(idx)];
}

std::vector<double> SmoothedFunctional::deriv_batch(double x, int k_lo, int k_hi) const {
    if (k_lo < 1 || k_hi < k_lo || k_hi > max_order_) {
        throw contract_error("deriv_batch: need 1 <= k_lo <= k_hi <= max_order");
    }
    if (std::abs(x) / h_ > oscillation_guard) {
        throw numeric_error("frequency route refused: |x|/h = " +
                            std::to_string(std::abs(x) / h_) + " exceeds the oscillation guard " +
                            std::to_string(oscillation_guard));
    }

    thread_local std::vector<double> cbuf, sbuf;
    const auto eval_level = [&](const FreqLevel& lv, double* out) {
        const std::size_t n = lv.zeta.size();
        cbuf.resize(n);
        sbuf.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            cbuf[i] = std::cos(x * lv.zeta[i]);
            sbuf[i] = std::sin(x * lv.zeta[i]);
        }
        for (int k = k_lo; k <= k_hi; ++k) {
            const auto& w = lv.wk[static_cast<std::size_t>(k) - 1];
            const int md = k & 3;
            const double* trig = (md == 1 || md == 3) ? sbuf.data() : cbuf.data();
            const double sign = (md == 1 || md == 2) ? 1.0 : -1.0;
            CompensatedSum acc;
            for (std::size_t i = 0; i < n; ++i) acc.add(w[i] * trig[i]);
            out[k - k_lo] = sign * acc.value();
        }
    };

    const double cycles = std::abs(x) * (1.0 / h_) / two_pi;
    int lvl = 0;
    while ((4 << lvl) < cycles && lvl < max_levels - 2) ++lvl;

    const int nk = k_hi - k_lo + 1;
    std::vector<double> coarse(static_cast<std::size_t>(nk)), fine(static_cast<std::size_t>(nk));
    eval_level(level(lvl), coarse.data());
    for (; lvl + 1 < max_levels; ++lvl) {
        eval_level(level(lvl + 1), fine.data());
        bool ok = true;
        const FreqLevel& lf = *levels_[static_cast<std::size_t>(lvl + 1)];
        for (int k = k_lo; k <= k_hi; ++k) {
            const double mass = lf.sum_abs[static_cast<std::size_t>(k) - 1];
            const double delta = std::abs(fine[static_cast<std::size_t>(k - k_lo)] -
                                          coarse[static_cast<std::size_t>(k - k_lo)]);
            if (delta > 1e-10 * (mass + std::abs(fine[static_cast<std::size_t>(k - k_lo)]))) {
                ok = false;
                break;
            }
        }
        if (ok) return fine;
        coarse.swap(fine);
    }
    throw numeric_error("frequency-route quadrature did not converge");
}

double SmoothedFunctional::deriv(double x, int k) const {
    if (k < 0) throw contract_error("deriv: order must be >= 0");
    if (k == 0) return eval(x);
    if (k > max_order_) {
        throw contract_error("deriv: order " + std::to_string(k) +
                             " exceeds the configured maximum " + std::to_string(max_order_));
    }
    return deriv_batch(x, k, k)[0];
}

double SmoothedFunctional::eval_abs(double x) const {
    {
        std::lock_guard<std::mutex> lock(abs_mutex_);
        if (!abs_table_) {
            profile_.table->ensure(profile_);
            const UniformCubicSpline& ks = profile_.table->k_spline;
            const double dy = KernelTable::dy;
            const std::size_t n = static_cast<std::size_t>(KernelTable::y_max / dy + 0.5) + 1;
            // Backward-accumulate A(X) = int_X^Y K and B(X) = int_X^Y y K(y),
            // then G = B - X A.  G''= K, so G is as smooth as the kernel.
            const GaussLegendre& rule = GaussLegendre::rule(8);
            std::vector<double> g(n, 0.0);
            CompensatedSum acc_a, acc_b;
            for (std::size_t i = n - 1; i >= 1; --i) {
                const double xi = (static_cast<double>(i) - 1.0) * dy;
                acc_a.add(gl_panel([&](double y) { return ks(y); }, xi, xi + dy, rule));
                acc_b.add(gl_panel([&](double y) { return y * ks(y); }, xi, xi + dy, rule));
                g[i - 1] = acc_b.value() - xi * acc_a.value();
            }
            abs_table_ = std::make_shared<const UniformCubicSpline>(0.0, dy, std::move(g));
        }
    }
    const double big_x = std::abs(x) / h_;
    if (big_x >= KernelTable::y_max) return std::abs(x);
    return std::abs(x) + 2.0 * h_ * (*abs_table_)(big_x);
}

double SmoothedFunctional::eval_pow(double x) const {
    profile_.table->ensure(profile_);
    const UniformCubicSpline& ks = profile_.table->k_spline;
    const double y_top = std::min(y_max_, KernelTable::y_max);
    const double kink = std::abs(x) / h_;
    std::vector<double> splits;
    if (kink > 0.0 && kink < y_top) splits.push_back(kink);
    const auto bps = make_breakpoints(0.0, y_top, 2000, splits, 24);
    const GaussLegendre& rule = GaussLegendre::rule(8);
    const double ax = std::abs(x);
    const auto f = [&](double y) {
        const double k = ks(y);
        const double lo = std::abs(ax - h_ * y);
        const double hi = ax + h_ * y;
        return k * (std::pow(lo, p_) + std::pow(hi, p_));
    };
    return integrate_breakpoints(f, bps, rule);
}

double SmoothedFunctional::eval(double x) const {
    if (p_ == 1.0) return eval_abs(x);
    return eval_pow(x);
}

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

TuningRule tuning(long d, double sigma_n, long cap) {
    if (d < 3) throw contract_error("tuning: dimension must be >= 3");
    if (!(sigma_n > 0.0)) throw contract_error("tuning: sigma_n must be positive");
    if (cap < 3) throw contract_error("tuning: cap must be >= 3");
    TuningRule t;
    const double dd = static_cast<double>(d);
    t.log_ratio = std::log(dd / std::log(dd));
    t.h_theory = sigma_n / std::sqrt(t.log_ratio);
    t.s_theory = static_cast<long>(std::ceil(128.0 * M_E * t.log_ratio));
    t.s = std::min(t.s_theory, cap);
    t.capped = t.s_theory > cap;
    return t;
}

} // namespace hodse
