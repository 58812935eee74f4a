// Command-line front end: estimate | simulate | kernel | validate.
//
// Exit codes: 0 success, 1 validation failure or unexpected error,
// 2 input/parse error, 3 contract violation, 4 numeric failure.

#include "hodse/errors.hpp"
#include "hodse/estimator.hpp"
#include "hodse/functional.hpp"
#include "hodse/numeric.hpp"
#include "hodse/rng.hpp"
#include "hodse/simlab.hpp"
#include "hodse/smoothing.hpp"
#include "hodse/textio.hpp"
#include "hodse/ustat.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

namespace {

using hodse::input_error;
using json = nlohmann::json;

int env_threads_default() {
    const char* raw = std::getenv("HODSE_THREADS");
    if (!raw || !*raw) return 0;
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || v < 1 || v > 1024) {
        throw input_error(std::string("HODSE_THREADS='") + raw +
                          "' is not a valid thread count");
    }
    return static_cast<int>(v);
}

json finite_or_null(double v) {
    if (std::isfinite(v)) return json(v);
    return json();  // null
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open output file '" + path + "'");
    out << content;
    if (!out) throw input_error("failed writing output file '" + path + "'");
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateOptions {
    std::string data_path;
    std::string functional;
    int order = 2;
    double bandwidth = 0.0;
    std::string out_path;
};

int cmd_estimate(const EstimateOptions& opt) {
    const hodse::SampleMatrix samples = hodse::read_csv_file(opt.data_path);
    const hodse::FunctionalDescription desc = hodse::parse_functional(opt.functional);
    const hodse::FunctionalModel model = hodse::build_functional(
        desc, samples.cols(), opt.bandwidth, std::max(opt.order, 2));
    const hodse::EstimateResult res = hodse::hodse_estimate(samples, model, opt.order);

    const double h = model.smoothing() ? model.smoothing()->bandwidth() : 0.0;
    const char* path_name = res.path == hodse::EstimateResult::Path::dense ? "dense" : "separable";

    std::cout.precision(17);
    std::cout << "value = " << res.value << '\n'
              << "f_at_mean = " << res.f_at_mean << '\n'
              << "m = " << res.m << '\n'
              << "h = " << h << '\n'
              << "path = " << path_name << '\n';
    for (std::size_t i = 0; i < res.per_order_terms.size(); ++i) {
        std::cout << "term[" << (i + 2) << "] = " << res.per_order_terms[i] << '\n';
    }

    if (!opt.out_path.empty()) {
        json j;
        j["value"] = res.value;
        j["f_at_mean"] = res.f_at_mean;
        j["m"] = res.m;
        j["h"] = h;
        j["path"] = path_name;
        j["per_order_terms"] = res.per_order_terms;
        write_text_file(opt.out_path, j.dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::string config_path;
    std::string out_dir = ".";
    int threads_flag = 0;   // 0 = not given
    long seed_flag = -1;    // < 0 = not given
};

int cmd_simulate(const SimulateOptions& opt) {
    hodse::ConfigMap cfg = hodse::ConfigMap::parse_file(opt.config_path);

    const std::string func_text = cfg.require_string("model.functional");
    const long d = cfg.get_long("model.d", 0);
    if (d < 1) throw input_error("config: model.d must be a positive integer");
    const std::string bw_text = cfg.get_string("model.bandwidth", "");

    hodse::NoiseModel noise = hodse::NoiseModel::parse(
        cfg.get_string("noise.family", "gaussian"), cfg.get_double("noise.sigma_n", 1.0),
        cfg.get_double("noise.student_df", 6.0));

    hodse::ThetaSpec tspec;
    const std::string tkind = cfg.get_string("theta.kind", "zeros");
    if (tkind == "zeros") {
        tspec.kind = hodse::ThetaSpec::Kind::zeros;
    } else if (tkind == "constant") {
        tspec.kind = hodse::ThetaSpec::Kind::constant;
        tspec.c = cfg.get_double("theta.c", 0.0);
    } else if (tkind == "uniform") {
        tspec.kind = hodse::ThetaSpec::Kind::uniform;
        tspec.lo = cfg.get_double("theta.lo", -1.0);
        tspec.hi = cfg.get_double("theta.hi", 1.0);
    } else if (tkind == "sparse") {
        tspec.kind = hodse::ThetaSpec::Kind::sparse;
        tspec.sparse_k = cfg.get_long("theta.sparse_k", 1);
        tspec.magnitude = cfg.get_double("theta.magnitude", 1.0);
    } else {
        throw input_error("config: theta.kind '" + tkind +
                          "' not recognized (zeros|constant|uniform|sparse)");
    }

    const long n = cfg.get_long("run.n", 0);
    if (n < 1) throw input_error("config: run.n must be a positive integer");
    const long replications = cfg.get_long("run.replications", 100);
    long seed = cfg.get_long("run.seed", 1);
    if (opt.seed_flag >= 0) seed = opt.seed_flag;
    const long order_cap = cfg.get_long("run.order_cap", 16);

    const std::string m_text = cfg.get_string("run.m", "2");
    int m = 0;
    if (m_text == "auto") {
        m = hodse::default_order(n, d, noise.sigma_n, order_cap);
    } else {
        char* end = nullptr;
        const long v = std::strtol(m_text.c_str(), &end, 10);
        if (end == m_text.c_str() || *end != '\0' || v < 1) {
            throw input_error("config: run.m must be 'auto' or a positive integer");
        }
        m = static_cast<int>(v);
    }

    double bandwidth = 0.0;
    if (bw_text == "auto") {
        bandwidth = hodse::tuning(std::max(d, 3L), noise.sigma_n, order_cap).h_theory;
    } else if (!bw_text.empty()) {
        char* end = nullptr;
        bandwidth = std::strtod(bw_text.c_str(), &end);
        if (end == bw_text.c_str() || *end != '\0' || bandwidth < 0.0) {
            throw input_error("config: model.bandwidth must be 'auto' or a number >= 0");
        }
    }

    const hodse::FunctionalDescription desc = hodse::parse_functional(func_text);
    hodse::ExperimentConfig ec(hodse::build_functional(
        desc, d, bandwidth, std::max(m, 2)));
    {
        std::vector<std::string> ests;
        std::stringstream ss(cfg.get_string("run.estimators", "hodse,plugin"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t b = item.find_first_not_of(" \t");
            std::size_t e = item.find_last_not_of(" \t");
            if (b == std::string::npos) continue;
            ests.push_back(item.substr(b, e - b + 1));
        }
        ec.estimators = std::move(ests);
    }
    ec.m = m;
    ec.n = n;
    ec.replications = replications;
    ec.master_seed = static_cast<std::uint64_t>(seed);
    ec.bootstrap_draws = cfg.get_long("run.bootstrap_draws", 1000);
    ec.with_decompose = cfg.get_bool("run.with_decompose", true);
    ec.overlay_alpha = cfg.get_double("overlay.alpha", 1.0);
    ec.overlay_c_alpha = cfg.get_double("overlay.c_alpha", 1.0);
    ec.overlay_holder = cfg.get_double("overlay.holder", 0.0);

    int threads = cfg.get_long("run.threads", 0) > 0
                      ? static_cast<int>(cfg.get_long("run.threads", 0))
                      : 1;
    const int env_threads = env_threads_default();
    if (env_threads > 0) threads = env_threads;
    if (opt.threads_flag > 0) threads = opt.threads_flag;
    ec.threads = threads;

    cfg.finish();

    const bool needs_derivatives =
        ec.with_decompose ||
        std::find(ec.estimators.begin(), ec.estimators.end(), "hodse") != ec.estimators.end() ||
        std::find(ec.estimators.begin(), ec.estimators.end(), "bootstrap") != ec.estimators.end();
    if (!desc.is_polynomial && (desc.scalar_name == "abs" || desc.scalar_name == "pow") &&
        bandwidth <= 0.0 && desc.bandwidth <= 0.0 && needs_derivatives) {
        throw input_error(
            "config: sep:" + desc.scalar_name +
            " needs a bandwidth (model.bandwidth = auto or a positive number) for "
            "derivative-based estimators");
    }
    ec.theta = hodse::make_theta(tspec, d, ec.master_seed);
    ec.noise = noise;

    const hodse::ExperimentReport rep = hodse::run_experiment(ec);

    // JSON report (keys sorted by the object representation).
    json j;
    j["schema_version"] = 1;
    j["n"] = rep.n;
    j["d"] = rep.d;
    j["m"] = rep.m;
    j["sigma_n"] = rep.sigma_n;
    j["bandwidth"] = rep.bandwidth;
    j["replications"] = {{"requested", rep.replications_requested},
                         {"completed", rep.replications_completed}};
    j["f_target"] = rep.f_target;
    j["f_smooth"] = rep.f_smooth;
    j["outside_theory"] = rep.outside_theory;
    {
        json arr = json::array();
        for (const auto& st : rep.stats) {
            json e;
            e["name"] = st.name;
            e["bias"] = finite_or_null(st.bias);
            e["bias_se"] = finite_or_null(st.bias_se);
            e["variance"] = finite_or_null(st.variance);
            e["variance_se"] = finite_or_null(st.variance_se);
            e["mse"] = finite_or_null(st.mse);
            e["mse_se"] = finite_or_null(st.mse_se);
            arr.push_back(e);
        }
        j["estimators"] = arr;
    }
    {
        json arr = json::array();
        for (std::size_t k = 0; k < rep.var_s_emp.size(); ++k) {
            json e;
            e["k"] = k + 1;
            e["empirical"] = finite_or_null(rep.var_s_emp[k]);
            e["predicted"] = finite_or_null(rep.var_s_pred[k]);
            arr.push_back(e);
        }
        j["variance_terms"] = arr;
    }
    j["v1"] = finite_or_null(rep.v1);
    j["clt"] = {{"valid", rep.clt_valid},
                {"ks_distance", finite_or_null(rep.clt.ks_distance)},
                {"skewness", finite_or_null(rep.clt.skewness)},
                {"kurtosis", finite_or_null(rep.clt.kurtosis)}};
    j["overlays"] = {{"bias_hd", finite_or_null(rep.overlays.bias_hd)},
                     {"kappa", finite_or_null(rep.overlays.kappa)},
                     {"error_bound", finite_or_null(rep.overlays.error_bound)},
                     {"rate", finite_or_null(rep.overlays.rate)}};
    j["failures"] = rep.failures;
    write_text_file(opt.out_dir + "/report.json", j.dump(2) + "\n");

    // Per-replication estimates as CSV.
    {
        std::vector<std::string> columns;
        columns.push_back("rep");
        for (const auto& name : rep.estimator_names) columns.push_back(name);
        std::vector<std::vector<double>> rows;
        const std::size_t r_done = rep.estimates.empty() ? 0 : rep.estimates[0].size();
        rows.reserve(r_done);
        for (std::size_t r = 0; r < r_done; ++r) {
            std::vector<double> row;
            row.push_back(static_cast<double>(r));
            for (const auto& col : rep.estimates) row.push_back(col[r]);
            rows.push_back(std::move(row));
        }
        std::ostringstream csv;
        csv.precision(17);
        hodse::write_csv_table(csv, columns, rows);
        write_text_file(opt.out_dir + "/estimates.csv", csv.str());
    }

    std::cout.precision(10);
    for (const auto& st : rep.stats) {
        std::cout << st.name << ": bias=" << st.bias << " (se " << st.bias_se << ")"
                  << " var=" << st.variance << " mse=" << st.mse << " (se " << st.mse_se << ")"
                  << " R=" << rep.replications_completed << '\n';
    }
    if (!rep.failures.empty()) {
        std::cout << "failed replications: " << rep.failures.size() << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// kernel
// ---------------------------------------------------------------------------

struct KernelOptions {
    std::string profile = "default";
    double bandwidth = 1.0;
    double p = 1.0;
    std::string grid = "-5:5:201";
    std::string orders = "1,2";
    std::string out_path;
};

int cmd_kernel(const KernelOptions& opt) {
    if (opt.profile != "default") {
        throw input_error("unknown frequency profile '" + opt.profile + "'");
    }
    if (!(opt.bandwidth > 0.0)) throw input_error("kernel: bandwidth must be positive");
    if (!(opt.p > 0.0 && opt.p <= 1.0)) throw input_error("kernel: p must lie in (0, 1]");

    double lo = 0.0, hi = 0.0;
    long count = 0;
    {
        std::stringstream ss(opt.grid);
        std::string a, b, c;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c)) {
            throw input_error("kernel: grid must be lo:hi:count");
        }
        char* end = nullptr;
        lo = std::strtod(a.c_str(), &end);
        if (end == a.c_str() || *end) throw input_error("kernel: bad grid lower bound '" + a + "'");
        hi = std::strtod(b.c_str(), &end);
        if (end == b.c_str() || *end) throw input_error("kernel: bad grid upper bound '" + b + "'");
        count = std::strtol(c.c_str(), &end, 10);
        if (end == c.c_str() || *end || count < 2 || count > 100000) {
            throw input_error("kernel: grid count out of range");
        }
        if (!(hi > lo)) throw input_error("kernel: grid needs hi > lo");
    }

    std::vector<int> orders;
    {
        std::stringstream ss(opt.orders);
        std::string item;
        while (std::getline(ss, item, ',')) {
            char* end = nullptr;
            const long k = std::strtol(item.c_str(), &end, 10);
            if (end == item.c_str() || *end || k < 1 || k > 24) {
                throw input_error("kernel: derivative order '" + item + "' out of range [1, 24]");
            }
            orders.push_back(static_cast<int>(k));
        }
    }
    int max_order = 2;
    for (int k : orders) max_order = std::max(max_order, k);

    const hodse::FrequencyProfile profile = hodse::default_profile();
    const hodse::SmoothedFunctional sf(profile, opt.bandwidth, opt.p, max_order);

    std::vector<std::string> columns;
    columns.push_back("x");
    columns.push_back("K_h");
    columns.push_back("f_h");
    for (int k : orders) columns.push_back("f_h_" + std::to_string(k));

    long warnings = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        std::vector<double> row;
        row.push_back(x);
        try {
            row.push_back(hodse::kernel_eval(profile, x / opt.bandwidth) / opt.bandwidth);
        } catch (const hodse::error&) {
            row.push_back(nan);
            ++warnings;
        }
        try {
            row.push_back(sf.eval(x));
        } catch (const hodse::error&) {
            row.push_back(nan);
            ++warnings;
        }
        for (int k : orders) {
            try {
                row.push_back(sf.deriv(x, k));
            } catch (const hodse::error&) {
                row.push_back(nan);
                ++warnings;
            }
        }
        rows.push_back(std::move(row));
    }

    std::ostringstream csv;
    hodse::write_csv_table(csv, columns, rows);
    if (opt.out_path.empty()) {
        std::cout << csv.str();
    } else {
        write_text_file(opt.out_path, csv.str());
    }
    if (warnings > 0) {
        std::cerr << "kernel: " << warnings << " cell(s) failed to evaluate; reported as NaN\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidateOptions {
    bool fast = false;
    long seed = 1;
};

struct Suite {
    std::string name;
    bool fast;
    std::function<std::string()> run;  // empty string = pass, else failure detail
};

std::string suite_ustat_oracle(long seed) {
    hodse::Rng rng(static_cast<std::uint64_t>(seed), 101);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform(0.0, 6.999));
        std::vector<double> values(static_cast<std::size_t>(n));
        for (double& v : values) v = rng.uniform(-1.0, 1.0);
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= n;
        for (double& v : values) v -= mean;
        const int m = std::min(n, 4);
        const std::vector<double> fast_path = hodse::degenerate_ustat_scalar(values, m);
        for (int k = 1; k <= m; ++k) {
            const double brute = hodse::brute_force_ustat_scalar(values, k);
            const double diff = std::abs(fast_path[static_cast<std::size_t>(k) - 1] - brute);
            if (diff > 1e-10 * std::max(1.0, std::abs(brute))) {
                return "scalar mismatch at n=" + std::to_string(n) + " k=" + std::to_string(k);
            }
        }
    }
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform(0.0, 3.999));
        const int d = 1 + static_cast<int>(rng.uniform(0.0, 2.999));
        const int k = 1 + static_cast<int>(rng.uniform(0.0, 2.999));
        if (n < k) continue;
        hodse::SampleMatrix rows(n, d);
        for (int i = 0; i < n; ++i) {
            for (int a = 0; a < d; ++a) rows(i, a) = rng.uniform(-1.0, 1.0);
        }
        const hodse::CenteredSample cs = hodse::center(rows);
        const hodse::DenseTensor fast_t = hodse::degenerate_ustat_tensor(cs, k);
        const hodse::DenseTensor brute_t = hodse::brute_force_ustat_tensor(cs.centered, k);
        for (std::size_t i = 0; i < fast_t.size(); ++i) {
            const double diff = std::abs(fast_t.data()[i] - brute_t.data()[i]);
            if (diff > 1e-10 * std::max(1.0, std::abs(brute_t.data()[i]))) {
                return "tensor mismatch at n=" + std::to_string(n) + " d=" + std::to_string(d) +
                       " k=" + std::to_string(k);
            }
        }
    }
    // Degeneracy guard: un-centered input must be rejected.
    try {
        hodse::degenerate_ustat_scalar({1.0, 2.0, 3.0}, 2);
        return "un-centered input was not rejected";
    } catch (const hodse::contract_error&) {
    }
    return {};
}

std::string suite_identity(long seed) {
    for (const char* name : {"exp", "sin"}) {
        const hodse::FunctionalModel model = hodse::FunctionalModel::custom_1d(name);
        hodse::Rng rng(static_cast<std::uint64_t>(seed), 202);
        for (int rep = 0; rep < 5; ++rep) {
            const double theta = rng.uniform(-0.5, 0.5);
            hodse::SampleMatrix samples(10, 1);
            for (int j = 0; j < 10; ++j) samples(j, 0) = theta + 0.3 * rng.normal();
            for (int m : {2, 3}) {
                const double resid = hodse::verify_identity(model, theta, samples, m);
                if (!(resid <= 1e-8)) {
                    return std::string(name) + ": residual " + std::to_string(resid) +
                           " at m=" + std::to_string(m);
                }
            }
        }
    }
    return {};
}

std::string suite_counting_bound(long) {
    for (int n = 1; n <= 60; ++n) {
        for (int k = 1; k <= n; ++k) {
            const double c = hodse::counting_constant(k, n);
            const double cap = std::exp(static_cast<double>(k - 1) * k / n);
            if (!(c >= 1.0 - 1e-12) || !(c <= cap * (1.0 + 1e-12))) {
                return "C(" + std::to_string(k) + "," + std::to_string(n) + ") = " +
                       std::to_string(c) + " outside [1, exp((k-1)k/n)]";
            }
        }
    }
    return {};
}

std::string suite_noise_condition(long seed) {
    const auto g = hodse::check_noise_condition(hodse::NoiseModel::gaussian(1.3), 50, 6,
                                                hodse::NoiseCheckMethod::closed_form);
    if (!g.all_pass) return "gaussian closed-form bound violated";
    const auto rex = hodse::check_noise_condition(hodse::NoiseModel::rademacher(0.8), 8, 4,
                                                  hodse::NoiseCheckMethod::exhaustive);
    if (!rex.all_pass) return "two-point exhaustive bound violated";
    const auto rcf = hodse::check_noise_condition(hodse::NoiseModel::rademacher(0.8), 8, 4,
                                                  hodse::NoiseCheckMethod::closed_form);
    for (std::size_t i = 0; i < rex.items.size(); ++i) {
        if (std::abs(rex.items[i].moment - rcf.items[i].moment) > 1e-12) {
            return "closed form disagrees with enumeration at k=" +
                   std::to_string(rex.items[i].k);
        }
    }
    const auto mc = hodse::check_noise_condition(hodse::NoiseModel::uniform(1.0), 30, 3,
                                                 hodse::NoiseCheckMethod::monte_carlo, 0.0, 20000,
                                                 static_cast<std::uint64_t>(seed));
    if (!mc.all_pass) return "uniform monte-carlo bound violated";
    return {};
}

std::string suite_kernel(long) {
    const hodse::FrequencyProfile profile = hodse::default_profile();
    const hodse::KernelAudit audit = hodse::kernel_audit(profile);
    if (!(std::abs(audit.integral - 1.0) <= 1e-8)) {
        return "kernel does not integrate to 1 (got " + std::to_string(audit.integral) + ")";
    }
    const double h = 0.3;
    const hodse::SmoothedFunctional sf(profile, h, 1.0, 2);
    for (double x : {0.0, 0.13, 0.7, 2.1}) {
        const double lhs = sf.deriv(x, 2);
        const double rhs = 2.0 * hodse::kernel_eval(profile, x / h) / h;
        if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(rhs))) {
            return "second derivative vs kernel mismatch at x=" + std::to_string(x);
        }
    }
    return {};
}

std::string suite_variance(long seed) {
    hodse::ExperimentConfig ec(
        hodse::FunctionalModel::separable(hodse::ScalarSpec::square(), 3));
    ec.theta = Eigen::Vector3d(0.5, 1.0, -0.7);
    ec.noise = hodse::NoiseModel::gaussian(0.4);
    ec.n = 20;
    ec.replications = 4000;
    ec.master_seed = static_cast<std::uint64_t>(seed);
    ec.estimators = {"hodse"};
    ec.m = 2;
    ec.with_decompose = true;
    const hodse::ExperimentReport rep = hodse::run_experiment(ec);
    for (std::size_t k = 0; k < rep.var_s_emp.size(); ++k) {
        const double emp = rep.var_s_emp[k];
        const double pred = rep.var_s_pred[k];
        if (!std::isfinite(pred)) return "missing variance prediction";
        if (std::abs(emp - pred) > 0.25 * pred) {
            return "order " + std::to_string(k + 1) + ": empirical " + std::to_string(emp) +
                   " vs predicted " + std::to_string(pred);
        }
    }
    return {};
}

std::string suite_clt(long seed) {
    hodse::ExperimentConfig ec(
        hodse::FunctionalModel::separable(hodse::ScalarSpec::square(), 10));
    ec.theta = Eigen::VectorXd::Constant(10, 1.0);
    ec.noise = hodse::NoiseModel::gaussian(1.0);
    ec.n = 200;
    ec.replications = 800;
    ec.master_seed = static_cast<std::uint64_t>(seed);
    ec.estimators = {"hodse"};
    ec.m = 2;
    ec.with_decompose = false;
    const hodse::ExperimentReport rep = hodse::run_experiment(ec);
    if (!rep.clt_valid) return "normal limit diagnostics unavailable";
    if (!(rep.clt.ks_distance <= 0.08)) {
        return "KS distance " + std::to_string(rep.clt.ks_distance) + " > 0.08";
    }
    return {};
}

int cmd_validate(const ValidateOptions& opt) {
    std::vector<Suite> suites = {
        {"ustat-oracle", true, [&] { return suite_ustat_oracle(opt.seed); }},
        {"expansion-identity", true, [&] { return suite_identity(opt.seed); }},
        {"counting-bound", true, [&] { return suite_counting_bound(opt.seed); }},
        {"noise-condition", true, [&] { return suite_noise_condition(opt.seed); }},
        {"kernel", false, [&] { return suite_kernel(opt.seed); }},
        {"variance-law", false, [&] { return suite_variance(opt.seed); }},
        {"normal-limit", false, [&] { return suite_clt(opt.seed); }},
    };
    int failures = 0;
    for (const auto& s : suites) {
        if (opt.fast && !s.fast) {
            std::cout << "SKIP " << s.name << '\n';
            continue;
        }
        std::string detail;
        try {
            detail = s.run();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (detail.empty()) {
            std::cout << "PASS " << s.name << '\n';
        } else {
            std::cout << "FAIL " << s.name << ": " << detail << '\n';
            ++failures;
        }
    }
    std::cout << (failures == 0 ? "all suites passed" : std::to_string(failures) + " suite(s) failed")
              << '\n';
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Bias-corrected functional estimation: high-order expansions over "
        "degenerate U-statistics with kernel-smoothed non-smooth targets"};
    app.set_help_flag("--help", "Print help and exit");
    app.require_subcommand(1);

    EstimateOptions est;
    CLI::App* c_est = app.add_subcommand("estimate", "Estimate f(theta) from a CSV sample");
    c_est->set_help_flag("--help", "Print help and exit");
    c_est->add_option("data", est.data_path, "CSV file, rows = observations, columns = coordinates")
        ->required();
    c_est->add_option("--functional,-f", est.functional,
                      "Functional description, e.g. poly:x^2, sep:abs:h=0.5, sep:pow:0.5")
        ->required();
    c_est->add_option("--order,-m", est.order, "Expansion order (default 2)");
    c_est->add_option("--bandwidth,-h", est.bandwidth, "Smoothing bandwidth override");
    c_est->add_option("--out", est.out_path, "Write the estimate record as JSON here");

    SimulateOptions sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "Run a replication campaign from a config file");
    c_sim->set_help_flag("--help", "Print help and exit");
    c_sim->add_option("config", sim.config_path, "Flat key=value config file")->required();
    c_sim->add_option("--out", sim.out_dir, "Output directory (default .)");
    c_sim->add_option("--threads", sim.threads_flag, "Worker threads (default HODSE_THREADS or config)");
    c_sim->add_option("--seed", sim.seed_flag, "Master seed override");

    KernelOptions ker;
    CLI::App* c_ker = app.add_subcommand("kernel", "Tabulate the kernel and smoothed functionals");
    c_ker->set_help_flag("--help", "Print help and exit");
    c_ker->add_option("--profile", ker.profile, "Frequency profile name (default)");
    c_ker->add_option("--bandwidth,-h", ker.bandwidth, "Bandwidth (default 1.0)");
    c_ker->add_option("--p", ker.p, "Exponent of |x|^p in (0, 1] (default 1)");
    c_ker->add_option("--grid", ker.grid, "Grid as lo:hi:count (default -5:5:201)");
    c_ker->add_option("--orders", ker.orders, "Comma-separated derivative orders (default 1,2)");
    c_ker->add_option("--out", ker.out_path, "Output CSV file (default stdout)");

    ValidateOptions val;
    CLI::App* c_val = app.add_subcommand("validate", "Run the reduced-scale self-check suites");
    c_val->set_help_flag("--help", "Print help and exit");
    c_val->add_flag("--fast", val.fast, "Run only the sub-second suites");
    c_val->add_option("--seed", val.seed, "Suite seed (default 1)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_est->parsed()) return cmd_estimate(est);
        if (c_sim->parsed()) return cmd_simulate(sim);
        if (c_ker->parsed()) return cmd_kernel(ker);
        if (c_val->parsed()) return cmd_validate(val);
        std::cerr << "error: no subcommand selected\n";
        return 1;
    } catch (const hodse::input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const hodse::contract_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const hodse::numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const hodse::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
