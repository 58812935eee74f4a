#include <doctest.h>

#include "hodse/errors.hpp"
#include "hodse/smoothing.hpp"

#include <cmath>
#include <vector>

using namespace hodse;

namespace {
constexpr double pi = 3.14159265358979323846;
const FrequencyProfile& shared_profile() {
    static FrequencyProfile p = default_profile();
    return p;
}
} // namespace

TEST_CASE("profile window: closed-form norms and audited conditions") {
    const FrequencyProfile& p = shared_profile();
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * pi);
    CHECK(p.Q(0.0) == doctest::Approx(inv_sqrt_2pi).epsilon(1e-14));
    CHECK(p.Q(1.0) == doctest::Approx(0.0));
    CHECK(p.Q(-0.5) == doctest::Approx(p.Q(0.5)).epsilon(1e-14));

    CHECK(p.audit.q_at_zero == doctest::Approx(inv_sqrt_2pi).epsilon(1e-12));
    // integral of (1-z^2)^3 over [-1,1] is 32/35; the window is nonnegative.
    CHECK(p.audit.l1_q == doctest::Approx((32.0 / 35.0) * inv_sqrt_2pi).epsilon(1e-10));
    // integral of (1-z^2)^6 over [-1,1] is 2*46080/135135.
    const double l2sq = (2.0 * 46080.0 / 135135.0) / (2.0 * pi);
    CHECK(p.audit.l2_q * p.audit.l2_q == doctest::Approx(l2sq).epsilon(1e-10));
    CHECK(p.audit.conditions_ok);
    CHECK(p.audit.c1 == doctest::Approx(5.4089872302625).epsilon(1e-9));
}

TEST_CASE("kernel evaluation: symmetry, center value, derivative consistency") {
    const FrequencyProfile& p = shared_profile();
    // K(0) = 2 (2pi)^(-1/2) int_0^1 Q = (2/pi) * (16/35) ... = 16/(35 pi).
    CHECK(kernel_eval(p, 0.0) == doctest::Approx(16.0 / (35.0 * pi)).epsilon(1e-12));
    CHECK(kernel_eval(p, 1.3) == doctest::Approx(kernel_eval(p, -1.3)).epsilon(1e-12));
    CHECK(kernel_eval(p, 0.0, 1) == doctest::Approx(0.0).epsilon(1e-12));

    const double x = 0.7, step = 1e-5;
    const double fd = (kernel_eval(p, x + step) - kernel_eval(p, x - step)) / (2.0 * step);
    CHECK(kernel_eval(p, x, 1) == doctest::Approx(fd).epsilon(1e-7));

    CHECK_THROWS_AS((void)kernel_eval(p, 0.0, 13), contract_error);
}

TEST_CASE("kernel audit integrals: unit mass and frozen moments") {
    const KernelAudit a = kernel_audit(shared_profile());
    CHECK(std::abs(a.integral - 1.0) <= 1e-8);
    CHECK(a.k_at_zero == doctest::Approx(16.0 / (35.0 * pi)).epsilon(1e-8));
    CHECK(a.abs_integral == doctest::Approx(1.029367569346294).epsilon(1e-6));
    CHECK(a.abs_moment1 == doctest::Approx(2.320816976510082).epsilon(1e-6));
    CHECK(a.signed_abs_moment == doctest::Approx(2.037183293851407).epsilon(1e-6));
    CHECK(a.abs_integral >= 1.0);
    CHECK(a.abs_moment1 >= a.signed_abs_moment);
}

TEST_CASE("smoothed absolute value: center value and global bias bound") {
    const FrequencyProfile& p = shared_profile();
    const KernelAudit a = kernel_audit(p);
    const double h = 0.37;
    SmoothedFunctional f(p, h, 1.0, 8);
    // f_h(0) = h * int |y| K(y) dy for f0(x) = |x|.
    CHECK(f.eval(0.0) == doctest::Approx(h * a.signed_abs_moment).epsilon(1e-8));
    CHECK(f.eval(2.0) == doctest::Approx(f.eval(-2.0)).epsilon(1e-12));

    const double c1 = p.audit.c1;
    for (int i = 0; i <= 80; ++i) {
        const double x = -4.0 + 0.1 * i;
        CHECK(std::abs(f.eval(x) - std::abs(x)) <= c1 * h);
    }
}

TEST_CASE("smoothed square root: bias shrinks like the bandwidth power") {
    const FrequencyProfile& p = shared_profile();
    const double h = 0.3, pexp = 0.5;
    SmoothedFunctional f(p, h, pexp, 6);
    // C_p = sqrt(2/pi) Gamma(p+1) sin(pi p/2) equals exactly 1/2 at p = 1/2.
    CHECK(f.cp() == doctest::Approx(0.5).epsilon(1e-12));
    const double c1 = p.audit.c1;
    for (int i = 0; i <= 60; ++i) {
        const double x = -3.0 + 0.1 * i;
        CHECK(std::abs(f.eval(x) - std::pow(std::abs(x), pexp)) <= c1 * std::pow(h, pexp));
    }
}

TEST_CASE("second derivative of the smoothed absolute value is twice the scaled kernel") {
    const FrequencyProfile& p = shared_profile();
    const double h = 0.3;
    SmoothedFunctional f(p, h, 1.0, 8);
    for (double x : {0.0, 0.13, 0.7, 2.1}) {
        const double lhs = f.deriv(x, 2);
        const double rhs = 2.0 * kernel_eval(p, x / h) / h;
        CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
    }
    // Odd function: first derivative vanishes at the origin.
    CHECK(std::abs(f.deriv(0.0, 1)) <= 1e-10);
    CHECK(f.deriv(0.5, 1) == doctest::Approx(-f.deriv(-0.5, 1)).epsilon(1e-10));
}

TEST_CASE("batch derivatives match single evaluations and stay finite at high order") {
    const FrequencyProfile& p = shared_profile();
    SmoothedFunctional f(p, 0.45, 1.0, 16);
    const double x = 0.8;
    const std::vector<double> batch = f.deriv_batch(x, 1, 15);
    REQUIRE(batch.size() == 15);
    for (int k = 1; k <= 15; ++k) {
        const double single = f.deriv(x, k);
        CHECK(std::isfinite(single));
        CHECK(batch[static_cast<std::size_t>(k - 1)] ==
              doctest::Approx(single).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)f.deriv(0.1, 17), contract_error);
    CHECK_THROWS_AS((void)f.deriv(1e5 * 0.45, 2), numeric_error);
}

TEST_CASE("smoothed functional rejects invalid parameters") {
    const FrequencyProfile& p = shared_profile();
    CHECK_THROWS_AS(SmoothedFunctional(p, -0.1, 1.0), contract_error);
    CHECK_THROWS_AS(SmoothedFunctional(p, 0.3, 0.0), contract_error);
    CHECK_THROWS_AS(SmoothedFunctional(p, 0.3, 1.2), contract_error);
}

TEST_CASE("bandwidth and order tuning at the reference dimension") {
    const TuningRule t = tuning(1024, 1.0, 24);
    const double L = std::log(1024.0 / std::log(1024.0));
    CHECK(t.log_ratio == doctest::Approx(L).epsilon(1e-14));
    CHECK(t.h_theory == doctest::Approx(1.0 / std::sqrt(L)).epsilon(1e-14));
    CHECK(t.h_theory == doctest::Approx(0.4474193).epsilon(1e-6));
    CHECK(t.s_theory == 1739);
    CHECK(t.s == 24);
    CHECK(t.capped);

    const TuningRule t16 = tuning(1024, 1.0, 16);
    CHECK(t16.s == 16);

    // sigma_n scales the bandwidth linearly and leaves the order alone.
    const TuningRule t2 = tuning(1024, 2.0, 24);
    CHECK(t2.h_theory == doctest::Approx(2.0 * t.h_theory).epsilon(1e-14));
    CHECK(t2.s_theory == t.s_theory);

    CHECK_THROWS_AS((void)tuning(2, 1.0), contract_error);
    CHECK_THROWS_AS((void)tuning(100, 0.0), contract_error);
    CHECK_THROWS_AS((void)tuning(100, 1.0, 2), contract_error);
}
