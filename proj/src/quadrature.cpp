#include "hodse/quadrature.hpp"

#include "hodse/errors.hpp"
#include "hodse/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace hodse {

namespace {

GaussLegendre build_rule(int order) {
    if (order < 2) throw contract_error("GaussLegendre: order must be >= 2");
    GaussLegendre rule;
    rule.x.resize(order);
    rule.w.resize(order);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on the three-term recurrence.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    return rule;
}

} // namespace

const GaussLegendre& GaussLegendre::rule(int order) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
    return it->second;
}

double gl_panel(const std::function<double(double)>& f, double a, double b,
                const GaussLegendre& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    CompensatedSum acc;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
        acc.add(rule.w[i] * f(mid + half * rule.x[i]));
    }
    return half * acc.value();
}

double integrate_breakpoints(const std::function<double(double)>& f,
                             const std::vector<double>& breakpoints,
                             const GaussLegendre& rule) {
    CompensatedSum acc;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        acc.add(gl_panel(f, breakpoints[i], breakpoints[i + 1], rule));
    }
    return acc.value();
}

std::vector<double> make_breakpoints(double a, double b, int uniform_panels,
                                     const std::vector<double>& splits,
                                     int geo_levels) {
    if (!(b > a)) throw contract_error("make_breakpoints: need b > a");
    std::vector<double> bps;
    bps.reserve(static_cast<std::size_t>(uniform_panels) + 1);
    for (int i = 0; i <= uniform_panels; ++i) {
        bps.push_back(a + (b - a) * static_cast<double>(i) / uniform_panels);
    }
    for (double s : splits) {
        if (!(s > a && s < b)) continue;
        const double w = (b - a) / uniform_panels;
        for (int j = 1; j <= geo_levels; ++j) {
            const double off = w * std::ldexp(1.0, -j);
            if (s - off > a) bps.push_back(s - off);
            if (s + off < b) bps.push_back(s + off);
        }
        bps.push_back(s);
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    return bps;
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, const AdaptiveOptions& opts) {
    if (!(b >= a)) throw contract_error("integrate_adaptive: need b >= a");
    if (b == a) return 0.0;
    const GaussLegendre& rule = GaussLegendre::rule(opts.gl_order);

    auto level_value = [&](int level) {
        const int panels = opts.initial_panels << level;
        std::vector<double> bps;
        bps.reserve(static_cast<std::size_t>(panels) + 1 +
                    opts.geometric_levels_left + opts.geometric_levels_right);
        const double w = (b - a) / panels;
        // Dyadic packing against an endpoint handles integrable singularities.
        for (int j = opts.geometric_levels_left; j >= 1; --j) {
            bps.push_back(a + w * std::ldexp(1.0, -j));
        }
        bps.insert(bps.begin(), a);
        for (int i = 1; i <= panels; ++i) bps.push_back(a + w * i);
        if (opts.geometric_levels_right > 0) {
            bps.pop_back();
            for (int j = 1; j <= opts.geometric_levels_right; ++j) {
                bps.push_back(b - w * std::ldexp(1.0, -j));
            }
            std::sort(bps.begin(), bps.end());
            bps.push_back(b);
        }
        return integrate_breakpoints(f, bps, rule);
    };

    double prev = level_value(0);
    for (int level = 1; level <= opts.max_level; ++level) {
        const double cur = level_value(level);
        if (std::abs(cur - prev) <= opts.rel_tol * std::max(1.0, std::abs(cur))) {
            return cur;
        }
        prev = cur;
    }
    throw numeric_error("integrate_adaptive: panel doubling did not converge");
}

} // namespace hodse
