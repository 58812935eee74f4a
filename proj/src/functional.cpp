#include "hodse/functional.hpp"

#include "hodse/errors.hpp"
#include "hodse/numeric.hpp"
#include "hodse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hodse {

namespace {

constexpr int unbounded_order = 1'000'000;

double falling(double e, int r) {
    double v = 1.0;
    for (int i = 0; i < r; ++i) v *= (e - i);
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

ScalarSpec ScalarSpec::power(double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw input_error("power exponent must lie in (0, 1]");
    }
    ScalarSpec s = of(ScalarFamily::power);
    s.p = p;
    return s;
}

FunctionalModel FunctionalModel::polynomial(std::map<std::vector<int>, double> coefficients,
                                            long d) {
    if (d < 1) throw contract_error("polynomial model: dimension must be >= 1");
    FunctionalModel m;
    m.kind_ = Kind::polynomial;
    m.d_ = d;
    m.order_max_ = unbounded_order;
    for (auto& [exps, coeff] : coefficients) {
        if (static_cast<long>(exps.size()) != d) {
            throw input_error("polynomial model: exponent vector length != dimension");
        }
        int deg = 0;
        for (int e : exps) {
            if (e < 0) throw input_error("polynomial model: negative exponent");
            deg += e;
        }
        if (coeff == 0.0) continue;
        m.total_degree_ = std::max(m.total_degree_, deg);
        m.terms_.emplace_back(exps, coeff);
    }
    return m;
}

FunctionalModel FunctionalModel::separable(ScalarSpec f0, long d,
                                           std::shared_ptr<const SmoothedFunctional> smoothing) {
    if (d < 1) throw contract_error("separable model: dimension must be >= 1");
    FunctionalModel m;
    m.kind_ = Kind::separable;
    m.d_ = d;
    m.spec_ = std::move(f0);
    m.smoother_ = std::move(smoothing);
    switch (m.spec_.family) {
    case ScalarFamily::abs_value:
    case ScalarFamily::power:
        if (m.spec_.family == ScalarFamily::power &&
            !(m.spec_.p > 0.0 && m.spec_.p <= 1.0)) {
            throw contract_error("separable model: power exponent must lie in (0, 1]");
        }
        if (m.smoother_) {
            const double want = m.spec_.family == ScalarFamily::abs_value ? 1.0 : m.spec_.p;
            if (std::abs(m.smoother_->exponent() - want) > 1e-12) {
                throw contract_error("separable model: smoothing exponent does not match f0");
            }
            m.order_max_ = m.smoother_->max_order();
        } else {
            m.order_max_ = 0; // evaluation only; derivative queries are refused
        }
        break;
    case ScalarFamily::square:
    case ScalarFamily::sine:
    case ScalarFamily::exponential:
        m.order_max_ = unbounded_order;
        break;
    case ScalarFamily::x_atan:
        m.order_max_ = 5;
        break;
    case ScalarFamily::table:
        if (m.spec_.table_y.size() < 4 || !(m.spec_.table_dx > 0.0)) {
            throw input_error("separable model: table needs >= 4 values and positive step");
        }
        m.table_ = std::make_shared<const UniformCubicSpline>(
            m.spec_.table_x0, m.spec_.table_dx, m.spec_.table_y);
        m.order_max_ = 2;
        break;
    }
    return m;
}

FunctionalModel FunctionalModel::custom_1d(const std::string& name) {
    ScalarSpec spec;
    if (name == "exp") {
        spec = ScalarSpec::exponential();
    } else if (name == "sin") {
        spec = ScalarSpec::sine();
    } else if (name == "xatan") {
        spec = ScalarSpec::x_atan();
    } else {
        throw input_error("custom_1d: unknown family '" + name + "' (want exp|sin|xatan)");
    }
    FunctionalModel m = separable(spec, 1);
    m.kind_ = Kind::custom;
    return m;
}

const ScalarSpec& FunctionalModel::scalar_spec() const {
    if (kind_ == Kind::polynomial) {
        throw contract_error("scalar_spec: polynomial models have no scalar family");
    }
    return spec_;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double FunctionalModel::poly_eval(const Eigen::VectorXd& theta) const {
    CompensatedSum acc;
    for (const auto& [exps, coeff] : terms_) {
        double v = coeff;
        for (long a = 0; a < d_; ++a) {
            for (int e = 0; e < exps[static_cast<std::size_t>(a)]; ++e) v *= theta[a];
        }
        acc.add(v);
    }
    return acc.value();
}

double FunctionalModel::scalar_raw(double x) const {
    switch (spec_.family) {
    case ScalarFamily::abs_value: return std::abs(x);
    case ScalarFamily::power: return std::pow(std::abs(x), spec_.p);
    case ScalarFamily::square: return x * x;
    case ScalarFamily::sine: return std::sin(x);
    case ScalarFamily::exponential: return std::exp(x);
    case ScalarFamily::x_atan: return x * std::atan(x);
    case ScalarFamily::table: return (*table_)(x);
    }
    throw contract_error("scalar_raw: unreachable family");
}

double FunctionalModel::eval(const Eigen::VectorXd& theta) const {
    if (theta.size() != d_) throw input_error("eval: argument dimension mismatch");
    if (kind_ == Kind::polynomial) return poly_eval(theta);
    CompensatedSum acc;
    for (long a = 0; a < d_; ++a) {
        acc.add(smoother_ ? smoother_->eval(theta[a]) : scalar_raw(theta[a]));
    }
    return acc.value() / static_cast<double>(d_);
}

double FunctionalModel::target_value(const Eigen::VectorXd& theta) const {
    if (theta.size() != d_) throw input_error("target_value: argument dimension mismatch");
    if (kind_ == Kind::polynomial) return poly_eval(theta);
    CompensatedSum acc;
    for (long a = 0; a < d_; ++a) acc.add(scalar_raw(theta[a]));
    return acc.value() / static_cast<double>(d_);
}

// ---------------------------------------------------------------------------
// Derivatives
// ---------------------------------------------------------------------------

double FunctionalModel::scalar_deriv_raw(double x, int k) const {
    switch (spec_.family) {
    case ScalarFamily::abs_value:
    case ScalarFamily::power:
        if (!smoother_) {
            throw contract_error("derivative query on unsmoothed |x|^p: attach a smoothing first");
        }
        return smoother_->deriv(x, k);
    case ScalarFamily::square:
        if (k == 1) return 2.0 * x;
        if (k == 2) return 2.0;
        return 0.0;
    case ScalarFamily::sine:
        return std::sin(x + 0.5 * M_PI * k);
    case ScalarFamily::exponential:
        return std::exp(x);
    case ScalarFamily::x_atan: {
        const double q = 1.0 + x * x;
        switch (k) {
        case 1: return std::atan(x) + x / q;
        case 2: return 2.0 / (q * q);
        case 3: return -8.0 * x / (q * q * q);
        case 4: return -8.0 * (1.0 - 5.0 * x * x) / (q * q * q * q);
        case 5: return 48.0 * x * (3.0 - 5.0 * x * x) / (q * q * q * q * q);
        default:
            throw contract_error("x*atan(x) derivatives are available to order 5 only");
        }
    }
    case ScalarFamily::table:
        if (k > 2) {
            throw contract_error("table models refuse derivative orders above 2");
        }
        return table_->derivative(x, k);
    }
    throw contract_error("scalar_deriv_raw: unreachable family");
}

double FunctionalModel::scalar_deriv(double x, int k) const {
    if (k < 1) throw contract_error("scalar_deriv: order must be >= 1");
    if (kind_ == Kind::polynomial) {
        if (d_ != 1) {
            throw contract_error("scalar_deriv: polynomial models use dense tensors");
        }
        Eigen::VectorXd theta(1);
        theta << x;
        return poly_partial(theta, {k});
    }
    return scalar_deriv_raw(x, k) / static_cast<double>(d_);
}

std::vector<double> FunctionalModel::scalar_derivs(double x, int k_lo, int k_hi) const {
    if (kind_ == Kind::polynomial) {
        if (d_ != 1) {
            throw contract_error("scalar_derivs: polynomial models use dense tensors");
        }
        if (k_lo < 1 || k_hi < k_lo) {
            throw contract_error("scalar_derivs: need 1 <= k_lo <= k_hi");
        }
        std::vector<double> v(static_cast<std::size_t>(k_hi - k_lo + 1));
        for (int k = k_lo; k <= k_hi; ++k) {
            v[static_cast<std::size_t>(k - k_lo)] = scalar_deriv(x, k);
        }
        return v;
    }
    if (k_lo < 1 || k_hi < k_lo) throw contract_error("scalar_derivs: need 1 <= k_lo <= k_hi");
    const double inv_d = 1.0 / static_cast<double>(d_);
    if ((spec_.family == ScalarFamily::abs_value || spec_.family == ScalarFamily::power) &&
        smoother_) {
        std::vector<double> v = smoother_->deriv_batch(x, k_lo, k_hi);
        for (double& t : v) t *= inv_d;
        return v;
    }
    std::vector<double> v(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (int k = k_lo; k <= k_hi; ++k) {
        v[static_cast<std::size_t>(k - k_lo)] = scalar_deriv_raw(x, k) * inv_d;
    }
    return v;
}

double FunctionalModel::poly_partial(const Eigen::VectorXd& theta,
                                     const std::vector<int>& multiplicity) const {
    CompensatedSum acc;
    for (const auto& [exps, coeff] : terms_) {
        double v = coeff;
        for (long a = 0; a < d_ && v != 0.0; ++a) {
            const int e = exps[static_cast<std::size_t>(a)];
            const int r = multiplicity[static_cast<std::size_t>(a)];
            if (r > e) {
                v = 0.0;
                break;
            }
            v *= falling(e, r);
            for (int i = 0; i < e - r; ++i) v *= theta[a];
        }
        acc.add(v);
    }
    return acc.value();
}

DenseTensor FunctionalModel::derivative_tensor(const Eigen::VectorXd& theta, int k) const {
    if (theta.size() != d_) throw input_error("derivative_tensor: argument dimension mismatch");
    if (k < 1) throw contract_error("derivative_tensor: order must be >= 1");
    DenseTensor t(static_cast<int>(d_), k);
    if (kind_ == Kind::polynomial) {
        if (k > total_degree_) return t;
        std::vector<int> mult(static_cast<std::size_t>(d_), 0);
        for_each_multi_index(static_cast<int>(d_), k, [&](const int* idx) {
            std::fill(mult.begin(), mult.end(), 0);
            for (int i = 0; i < k; ++i) ++mult[static_cast<std::size_t>(idx[i])];
            t.at(idx) = poly_partial(theta, mult);
        });
        return t;
    }
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (long a = 0; a < d_; ++a) {
        std::fill(idx.begin(), idx.end(), static_cast<int>(a));
        t.at(idx.data()) = scalar_deriv(theta[a], k);
    }
    return t;
}

double FunctionalModel::contract_with(const Eigen::VectorXd& theta, int k,
                                      const DenseTensor& t) const {
    if (t.dim() != d_ || t.order() != k) {
        throw input_error("contract_with: tensor shape does not match model/order");
    }
    if (kind_ == Kind::polynomial) {
        if (k > total_degree_) return 0.0;
        return derivative_tensor(theta, k).dot(t);
    }
    CompensatedSum acc;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (long a = 0; a < d_; ++a) {
        std::fill(idx.begin(), idx.end(), static_cast<int>(a));
        acc.add(scalar_deriv(theta[a], k) * t.at(idx.data()));
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Covariance
// ---------------------------------------------------------------------------

CovarianceModel CovarianceModel::dense(Eigen::MatrixXd m) {
    CovarianceModel c;
    c.sigma = std::move(m);
    c.validate();
    return c;
}

CovarianceModel CovarianceModel::diagonal(const Eigen::VectorXd& diag) {
    CovarianceModel c;
    c.sigma = diag.asDiagonal();
    c.validate();
    return c;
}

CovarianceModel CovarianceModel::scaled_identity(long d, double value) {
    if (d < 1) throw contract_error("covariance: dimension must be >= 1");
    CovarianceModel c;
    c.sigma = value * Eigen::MatrixXd::Identity(d, d);
    c.validate();
    return c;
}

namespace {

bool matrix_is_diagonal(const Eigen::MatrixXd& m) {
    for (long i = 0; i < m.rows(); ++i) {
        for (long j = 0; j < m.cols(); ++j) {
            if (i != j && m(i, j) != 0.0) return false;
        }
    }
    return true;
}

} // namespace

void CovarianceModel::validate() const {
    if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
        throw input_error("covariance: matrix must be square and non-empty");
    }
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw input_error("covariance: matrix is not symmetric");
    }
    if (matrix_is_diagonal(sigma)) {
        for (long i = 0; i < sigma.rows(); ++i) {
            if (sigma(i, i) < -1e-10 * scale) {
                throw input_error("covariance: negative diagonal entry");
            }
        }
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, top)) {
        throw input_error("covariance: matrix is not positive semidefinite");
    }
}

EffectiveRank effective_rank(const CovarianceModel& cov) {
    cov.validate();
    double top = 0.0;
    if (matrix_is_diagonal(cov.sigma)) {
        top = cov.sigma.diagonal().maxCoeff();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.sigma, Eigen::EigenvaluesOnly);
        top = es.eigenvalues().maxCoeff();
    }
    if (!(top > 0.0)) {
        throw contract_error("effective_rank: zero covariance has no defined rank ratio");
    }
    EffectiveRank er;
    er.sigma = std::sqrt(top);
    er.r = cov.sigma.trace() / top;
    return er;
}

// ---------------------------------------------------------------------------
// Variance quantities
// ---------------------------------------------------------------------------

namespace {

/// out[i_1..i_k] = sum_j in[.., j at position `mode`, ..] * sigma(j, i_mode).
DenseTensor mode_multiply(const DenseTensor& in, const Eigen::MatrixXd& sigma, int mode) {
    DenseTensor out(in.dim(), in.order());
    const int d = in.dim();
    const int k = in.order();
    std::vector<int> src(static_cast<std::size_t>(k));
    for_each_multi_index(d, k, [&](const int* idx) {
        std::copy(idx, idx + k, src.begin());
        CompensatedSum acc;
        for (int j = 0; j < d; ++j) {
            src[static_cast<std::size_t>(mode)] = j;
            acc.add(in.at(src.data()) * sigma(j, idx[mode]));
        }
        out.at(idx) = acc.value();
    });
    return out;
}

} // namespace

double v_k(const FunctionalModel& model, const Eigen::VectorXd& theta,
           const CovarianceModel& cov, int k) {
    if (k < 1) throw contract_error("v_k: order must be >= 1");
    if (cov.sigma.rows() != model.dimension()) {
        throw input_error("v_k: covariance dimension does not match model");
    }
    cov.validate();
    if (model.per_coordinate() && matrix_is_diagonal(cov.sigma)) {
        CompensatedSum acc;
        for (long a = 0; a < model.dimension(); ++a) {
            const double c = model.scalar_deriv(theta[a], k);
            acc.add(c * c * std::pow(cov.sigma(a, a), k));
        }
        return acc.value();
    }
    DenseTensor t = model.derivative_tensor(theta, k);
    DenseTensor m = t;
    for (int mode = 0; mode < k; ++mode) m = mode_multiply(m, cov.sigma, mode);
    return t.dot(m);
}

double predicted_var_s_k(long n, int k, double vk) {
    if (k < 1 || static_cast<long>(k) > n) {
        throw contract_error("predicted_var_s_k: need 1 <= k <= n");
    }
    // C_{k,n} k! / n^k = k! (n-k)! / n! = 1 / binom(n, k), in log space.
    return vk * std::exp(log_factorial(k) - log_falling_factorial(n, k));
}

double tensor_spectral_norm(const DenseTensor& t, int restarts, int iters,
                            std::uint64_t seed) {
    const int d = t.dim();
    const int k = t.order();
    if (k == 1) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            s += t.at(&i) * t.at(&i);
        }
        return std::sqrt(s);
    }
    double best = 0.0;
    std::vector<double> u(static_cast<std::size_t>(d)), g(static_cast<std::size_t>(d));
    for (int r = 0; r < restarts; ++r) {
        Rng rng(seed, static_cast<std::uint64_t>(r));
        double nrm = 0.0;
        for (auto& v : u) {
            v = rng.normal();
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        for (auto& v : u) v /= nrm;
        for (int it = 0; it < iters; ++it) {
            std::fill(g.begin(), g.end(), 0.0);
            for_each_multi_index(d, k, [&](const int* idx) {
                const double tv = t.at(idx);
                if (tv == 0.0) return;
                double prod = tv;
                for (int pos = 1; pos < k; ++pos) {
                    prod *= u[static_cast<std::size_t>(idx[pos])];
                }
                g[static_cast<std::size_t>(idx[0])] += prod;
            });
            double val = 0.0, gn = 0.0;
            for (int i = 0; i < d; ++i) {
                val += g[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
                gn += g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
            }
            best = std::max(best, std::abs(val));
            gn = std::sqrt(gn);
            if (gn < 1e-300) break;
            for (int i = 0; i < d; ++i) u[static_cast<std::size_t>(i)] =
                g[static_cast<std::size_t>(i)] / gn;
        }
    }
    return best;
}

VarianceTable variance_table(const FunctionalModel& model, const Eigen::VectorXd& theta,
                             const CovarianceModel& cov, long n, int m) {
    if (m < 1) throw contract_error("variance_table: need m >= 1");
    VarianceTable table;
    const EffectiveRank er = effective_rank(cov);
    const double lam = er.sigma * er.sigma;
    for (int k = 1; k <= m; ++k) {
        const double vk = v_k(model, theta, cov, k);
        table.v_k.push_back(vk);
        table.predicted.push_back(predicted_var_s_k(n, k, vk));
        double norm_k = std::numeric_limits<double>::quiet_NaN();
        if (model.per_coordinate()) {
            if (k == 1) {
                double s = 0.0;
                for (long a = 0; a < model.dimension(); ++a) {
                    const double c = model.scalar_deriv(theta[a], k);
                    s += c * c;
                }
                norm_k = std::sqrt(s);
            } else {
                double s = 0.0;
                for (long a = 0; a < model.dimension(); ++a) {
                    s = std::max(s, std::abs(model.scalar_deriv(theta[a], k)));
                }
                norm_k = s;
            }
        } else if (model.dimension() <= 8 && k <= 4) {
            norm_k = tensor_spectral_norm(model.derivative_tensor(theta, k));
        }
        table.v_k_bound.push_back(norm_k * norm_k * std::pow(lam, k) *
                                  std::pow(er.r, k - 1));
    }
    return table;
}

double holder_norm_1d(const FunctionalModel& model, double s, double lo, double hi,
                      int grid_n) {
    if (model.dimension() != 1) throw contract_error("holder_norm_1d: model must be 1-d");
    if (!(s > 0.0)) throw contract_error("holder_norm_1d: smoothness must be positive");
    if (grid_n < 2 || !(hi > lo)) throw contract_error("holder_norm_1d: bad grid");
    const int m = static_cast<int>(std::ceil(s)) - 1;
    std::vector<double> x(static_cast<std::size_t>(grid_n)), g(static_cast<std::size_t>(grid_n));
    for (int i = 0; i < grid_n; ++i) {
        x[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (grid_n - 1);
        g[static_cast<std::size_t>(i)] =
            m == 0 ? model.scalar_raw(x[static_cast<std::size_t>(i)])
                   : model.scalar_deriv(x[static_cast<std::size_t>(i)], m);
    }
    const double expo = s - m;
    double sup = 0.0;
    for (int i = 0; i < grid_n; ++i) {
        for (int j = i + 1; j < grid_n; ++j) {
            const double num = std::abs(g[static_cast<std::size_t>(i)] -
                                        g[static_cast<std::size_t>(j)]);
            const double den = std::pow(x[static_cast<std::size_t>(j)] -
                                        x[static_cast<std::size_t>(i)], expo);
            sup = std::max(sup, num / den);
        }
    }
    return sup;
}

} // namespace hodse
