#include "hodse/ustat.hpp"

#include "hodse/errors.hpp"
#include "hodse/numeric.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace hodse {

namespace {

void check_centered(const double* y, int n, const char* who) {
    CompensatedSum s;
    double scale = 0.0;
    for (int j = 0; j < n; ++j) {
        s.add(y[j]);
        scale = std::max(scale, std::abs(y[j]));
    }
    // Wide enough for data centered by a plain mean subtraction, far below
    // any genuinely un-centered column.
    const double tol = 1e3 * n * eps * scale;
    if (std::abs(s.value()) > tol) {
        std::ostringstream msg;
        msg.precision(3);
        msg << who << ": input is not centered (column sum " << std::scientific << s.value()
            << " exceeds tolerance " << tol << "); call center() first";
        throw contract_error(msg.str());
    }
}

std::vector<double> scalar_ustats_impl(const double* y, int n, int m) {
    if (m < 1) throw contract_error("degenerate_ustat_scalar: m must be >= 1");
    if (n < m) {
        throw contract_error("degenerate_ustat_scalar: need n >= m (got n = " +
                             std::to_string(n) + ", m = " + std::to_string(m) + ")");
    }
    // Streaming elementary symmetric polynomials, e_0 = 1.
    std::vector<double> e(static_cast<std::size_t>(m) + 1, 0.0);
    e[0] = 1.0;
    for (int j = 0; j < n; ++j) {
        const double yj = y[j];
        const int top = std::min(j + 1, m);
        for (int k = top; k >= 1; --k) {
            e[static_cast<std::size_t>(k)] += yj * e[static_cast<std::size_t>(k) - 1];
        }
    }
    std::vector<double> u(static_cast<std::size_t>(m));
    for (int k = 1; k <= m; ++k) {
        // k! (n-k)!/n! = 1/binom(n,k), in log space.
        const double log_ratio = log_factorial(k) + std::lgamma(static_cast<double>(n - k) + 1.0) -
                                 std::lgamma(static_cast<double>(n) + 1.0);
        u[static_cast<std::size_t>(k) - 1] = e[static_cast<std::size_t>(k)] * std::exp(log_ratio);
    }
    return u;
}

} // namespace

CenteredSample center(const SampleMatrix& samples) {
    const int n = static_cast<int>(samples.rows());
    const int d = static_cast<int>(samples.cols());
    if (n < 1 || d < 1) throw contract_error("center: sample must be non-empty");
    CenteredSample out;
    out.means.resize(d);
    out.centered.resize(n, d);
    for (int a = 0; a < d; ++a) {
        const double* col = samples.col(a).data();
        double lo = col[0], hi = col[0];
        CompensatedSum s;
        for (int j = 0; j < n; ++j) {
            s.add(col[j]);
            lo = std::min(lo, col[j]);
            hi = std::max(hi, col[j]);
        }
        if (lo == hi) {
            // Constant column: mean is the constant, residuals exactly zero.
            out.means(a) = lo;
            out.centered.col(a).setZero();
            continue;
        }
        const double mean = s.value() / n;
        out.means(a) = mean;
        for (int j = 0; j < n; ++j) out.centered(j, a) = col[j] - mean;
    }
    return out;
}

std::vector<double> elementary_symmetric(const std::vector<double>& values, int m) {
    if (m < 1) throw contract_error("elementary_symmetric: m must be >= 1");
    std::vector<double> e(static_cast<std::size_t>(m) + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double yj = values[j];
        const int top = std::min(static_cast<int>(j) + 1, m);
        for (int k = top; k >= 1; --k) {
            e[static_cast<std::size_t>(k)] += yj * e[static_cast<std::size_t>(k) - 1];
        }
    }
    return std::vector<double>(e.begin() + 1, e.end());
}

std::vector<double> degenerate_ustat_scalar(const std::vector<double>& values, int m) {
    const int n = static_cast<int>(values.size());
    if (n < 1) throw contract_error("degenerate_ustat_scalar: empty input");
    check_centered(values.data(), n, "degenerate_ustat_scalar");
    return scalar_ustats_impl(values.data(), n, m);
}

std::vector<double> ustat_scalar_raw(const std::vector<double>& values, int m) {
    const int n = static_cast<int>(values.size());
    if (n < 1) throw contract_error("ustat_scalar_raw: empty input");
    return scalar_ustats_impl(values.data(), n, m);
}

DenseTensor ustat_tensor_raw(const SampleMatrix& rows, int k) {
    const int n = static_cast<int>(rows.rows());
    const int d = static_cast<int>(rows.cols());
    if (k < 1) throw contract_error("ustat_tensor_raw: k must be >= 1");
    if (n < k) throw contract_error("ustat_tensor_raw: need n >= k");
    DenseTensor result(d, k); // budget-checked: d^k entries

    // Block power-sum tensors PS_b[a_1..a_b] = sum_j prod_i y(j, a_i) for the
    // block sizes that occur among the partitions of {1..k}.
    std::vector<DenseTensor> power(static_cast<std::size_t>(k) + 1);
    for (int b = 1; b <= k; ++b) {
        DenseTensor ps(d, b);
        for_each_multi_index(d, b, [&](const int* ix) {
            CompensatedSum s;
            for (int j = 0; j < n; ++j) {
                double prod = 1.0;
                for (int i = 0; i < b; ++i) prod *= rows(j, ix[i]);
                s.add(prod);
            }
            ps.at(ix) = s.value();
        });
        power[static_cast<std::size_t>(b)] = std::move(ps);
    }

    const auto partitions = set_partitions(k);
    const double inv_falling = std::exp(-log_falling_factorial(n, k));
    std::vector<int> sub(static_cast<std::size_t>(k));
    for_each_multi_index(d, k, [&](const int* ix) {
        CompensatedSum entry;
        for (const auto& part : partitions) {
            double prod = part.moebius;
            for (const auto& block : part.blocks) {
                const int b = static_cast<int>(block.size());
                for (int i = 0; i < b; ++i) sub[static_cast<std::size_t>(i)] = ix[block[static_cast<std::size_t>(i)]];
                prod *= power[static_cast<std::size_t>(b)].at(sub.data());
            }
            entry.add(prod);
        }
        result.at(ix) = entry.value() * inv_falling;
    });
    return result;
}

DenseTensor degenerate_ustat_tensor(const CenteredSample& sample, int k) {
    const int n = static_cast<int>(sample.centered.rows());
    const int d = static_cast<int>(sample.centered.cols());
    for (int a = 0; a < d; ++a) {
        check_centered(sample.centered.col(a).data(), n, "degenerate_ustat_tensor");
    }
    return ustat_tensor_raw(sample.centered, k);
}

namespace {

void check_tuple_budget(int n, int k, const char* who) {
    const double tuples = std::pow(static_cast<double>(n), k);
    if (tuples > 1e7) {
        throw capacity_error(std::string(who) + ": n^k = " + std::to_string(tuples) +
                             " tuples exceeds the enumeration budget of 1e7");
    }
}

/// Visit every ordered k-tuple of distinct indices in 0..n-1.
template <typename Fn>
void for_each_distinct_tuple(int n, int k, Fn&& fn) {
    std::vector<int> tuple(static_cast<std::size_t>(k));
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::function<void(int)> rec = [&](int depth) {
        if (depth == k) {
            fn(tuple.data());
            return;
        }
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            used[static_cast<std::size_t>(j)] = 1;
            tuple[static_cast<std::size_t>(depth)] = j;
            rec(depth + 1);
            used[static_cast<std::size_t>(j)] = 0;
        }
    };
    rec(0);
}

} // namespace

double brute_force_ustat_scalar(const std::vector<double>& values, int k) {
    const int n = static_cast<int>(values.size());
    if (k < 1) throw contract_error("brute_force_ustat_scalar: k must be >= 1");
    if (n < k) throw contract_error("brute_force_ustat_scalar: need n >= k");
    check_tuple_budget(n, k, "brute_force_ustat_scalar");
    CompensatedSum s;
    for_each_distinct_tuple(n, k, [&](const int* tuple) {
        double prod = 1.0;
        for (int i = 0; i < k; ++i) prod *= values[static_cast<std::size_t>(tuple[i])];
        s.add(prod);
    });
    return s.value() * std::exp(-log_falling_factorial(n, k));
}

DenseTensor brute_force_ustat_tensor(const SampleMatrix& rows, int k) {
    const int n = static_cast<int>(rows.rows());
    const int d = static_cast<int>(rows.cols());
    if (k < 1) throw contract_error("brute_force_ustat_tensor: k must be >= 1");
    if (n < k) throw contract_error("brute_force_ustat_tensor: need n >= k");
    check_tuple_budget(n, k, "brute_force_ustat_tensor");
    DenseTensor acc(d, k);
    for_each_distinct_tuple(n, k, [&](const int* tuple) {
        for_each_multi_index(d, k, [&](const int* ix) {
            double prod = 1.0;
            for (int i = 0; i < k; ++i) prod *= rows(tuple[i], ix[i]);
            acc.at(ix) += prod;
        });
    });
    const double inv_falling = std::exp(-log_falling_factorial(n, k));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] *= inv_falling;
    return acc;
}

double counting_constant(int k, int n) {
    if (k < 1 || n < k) throw contract_error("counting_constant: need 1 <= k <= n");
    return std::exp(k * std::log(static_cast<double>(n)) - log_falling_factorial(n, k));
}

CountingConstants counting_constants(int n, int m) {
    if (m < 1 || n < m) throw contract_error("counting_constants: need 1 <= m <= n");
    CountingConstants out;
    out.n = n;
    out.value.reserve(static_cast<std::size_t>(m));
    out.bound.reserve(static_cast<std::size_t>(m));
    for (int k = 1; k <= m; ++k) {
        out.value.push_back(counting_constant(k, n));
        out.bound.push_back(std::exp(static_cast<double>(k - 1) * k / n));
    }
    return out;
}

UStatSet compute_ustats(const CenteredSample& sample, int m, bool with_dense) {
    const int n = static_cast<int>(sample.centered.rows());
    const int d = static_cast<int>(sample.centered.cols());
    if (m < 1) throw contract_error("compute_ustats: m must be >= 1");
    if (n < m) throw contract_error("compute_ustats: need n >= m");
    UStatSet set;
    set.n = n;
    set.m = m;
    set.per_coordinate.resize(m, d);
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int a = 0; a < d; ++a) {
        for (int j = 0; j < n; ++j) col[static_cast<std::size_t>(j)] = sample.centered(j, a);
        check_centered(col.data(), n, "compute_ustats");
        const auto u = scalar_ustats_impl(col.data(), n, m);
        for (int k = 1; k <= m; ++k) set.per_coordinate(k - 1, a) = u[static_cast<std::size_t>(k) - 1];
    }
    if (with_dense) {
        set.dense.reserve(static_cast<std::size_t>(m));
        for (int k = 1; k <= m; ++k) set.dense.push_back(ustat_tensor_raw(sample.centered, k));
    }
    return set;
}

} // namespace hodse
