#include <doctest.h>

#include "hodse/numeric.hpp"
#include "hodse/quadrature.hpp"
#include "hodse/rng.hpp"
#include "hodse/spline.hpp"

#include <cmath>
#include <vector>

using namespace hodse;

TEST_CASE("compensated summation survives catastrophic cancellation") {
    CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == doctest::Approx(1.0).epsilon(1e-15));

    CompensatedSum tenths;
    for (int i = 0; i < 10; ++i) tenths.add(0.1);
    CHECK(std::abs(tenths.value() - 1.0) <= 1e-15);
}

TEST_CASE("log factorial ratios match direct products") {
    CHECK(log_factorial(5) == doctest::Approx(std::log(120.0)).epsilon(1e-14));
    CHECK(log_factorial(0) == doctest::Approx(0.0));
    // n(n-1)...(n-k+1) for n=10, k=3 is 720.
    CHECK(log_falling_factorial(10, 3) == doctest::Approx(std::log(720.0)).epsilon(1e-14));
    CHECK(log_falling_factorial(7, 0) == doctest::Approx(0.0));
    CHECK(log_falling_factorial(7, 7) == doctest::Approx(log_factorial(7)).epsilon(1e-14));
}

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(normal_cdf(-1.96) == doctest::Approx(1.0 - 0.9750021048517795).epsilon(1e-9));
    CHECK(normal_cdf(6.0) > 0.999999999);
}

TEST_CASE("random streams are deterministic and independent") {
    Rng a(42, 7), b(42, 7), c(42, 8);
    bool all_equal = true, any_differs = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.uniform01(), vb = b.uniform01(), vc = c.uniform01();
        all_equal = all_equal && (va == vb);
        any_differs = any_differs || (va != vc);
        CHECK(va > 0.0);
        CHECK(va <= 1.0);
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("normal and sign draws have the right first moments") {
    Rng rng(2024, 0);
    const int n = 40000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.03));

    int plus = 0;
    for (int i = 0; i < n; ++i) {
        const double r = rng.rademacher();
        CHECK((r == 1.0 || r == -1.0));
        if (r > 0) ++plus;
    }
    CHECK(std::abs(plus - n / 2) < 4 * std::sqrt(n / 4.0));
}

TEST_CASE("quadrature rule basics") {
    const GaussLegendre& r16 = GaussLegendre::rule(16);
    double wsum = 0.0;
    for (std::size_t i = 0; i < r16.w.size(); ++i) {
        wsum += r16.w[i];
        CHECK(r16.x[i] == doctest::Approx(-r16.x[r16.x.size() - 1 - i]).epsilon(1e-14));
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));

    const double cubic = gl_panel([](double x) { return x * x * x; }, 0.0, 1.0, r16);
    CHECK(cubic == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("adaptive integration reaches tight tolerances") {
    AdaptiveOptions opts;
    opts.rel_tol = 1e-12;
    const double pi_val = integrate_adaptive(
        [](double x) { return 4.0 / (1.0 + x * x); }, 0.0, 1.0, opts);
    CHECK(pi_val == doctest::Approx(3.14159265358979324).epsilon(1e-12));

    opts.initial_panels = 16;
    const double osc = integrate_adaptive([](double x) { return std::sin(x); }, 0.0,
                                          10.0 * 3.14159265358979324, opts);
    CHECK(std::abs(osc) < 1e-9);
}

TEST_CASE("breakpoint integration handles interior kinks") {
    const auto f = [](double x) { return std::abs(x - 0.5); };
    const double v = integrate_breakpoints(f, make_breakpoints(0.0, 1.0, 4, {0.5}, 0),
                                           GaussLegendre::rule(8));
    CHECK(v == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("cubic spline interpolates a smooth function") {
    const double x0 = 0.0, dx = 0.01;
    const int n = 700;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = std::sin(x0 + dx * i);
    UniformCubicSpline s(x0, dx, y);
    for (double probe : {0.777, 1.5, 3.333, 5.0}) {
        CHECK(s(probe) == doctest::Approx(std::sin(probe)).epsilon(1e-8));
        CHECK(s.derivative(probe, 1) == doctest::Approx(std::cos(probe)).epsilon(1e-4));
    }
}
