#pragma once

#include "hodse/tensor.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace hodse {

/// Observations are rows, coordinates are columns (n x d).
using SampleMatrix = Eigen::MatrixXd;

/// A sample together with its per-column compensated means removed.
struct CenteredSample {
    Eigen::VectorXd means;   ///< column means (compensated summation)
    SampleMatrix centered;   ///< x_j - mean, per column; constant columns are exactly zero
};

/// Degenerate U-statistics of one sample.
/// per_coordinate(k-1, a) holds the order-k statistic of column a, for
/// k = 1..m.  Dense tensors (cross-coordinate) are filled only on request.
struct UStatSet {
    int n = 0;
    int m = 0;
    Eigen::MatrixXd per_coordinate;            ///< m x d
    std::vector<DenseTensor> dense;            ///< dense[k-1] has order k; empty if not requested
};

/// The combinatorial constants C_{k,n} = n^k (n-k)!/n! together with their
/// exponential bound exp((k-1)k/n).
struct CountingConstants {
    int n = 0;
    std::vector<double> value; ///< C_{k,n}, k = 1..m
    std::vector<double> bound; ///< exp((k-1)k/n), k = 1..m
};

/// Remove per-column means.  Means use compensated summation; a column whose
/// entries are all identical centers to exact zeros.
CenteredSample center(const SampleMatrix& samples);

/// Elementary symmetric polynomials e_1..e_m of `values`, via the standard
/// one-pass O(n*m) streaming recurrence e_k += y * e_{k-1} (descending k).
std::vector<double> elementary_symmetric(const std::vector<double>& values, int m);

/// Order-1..m degenerate U-statistics of a *centered* scalar sample:
///   u_k = k! * e_k * (n-k)!/n!   (the factorial ratio evaluated in log space).
/// Preconditions: 1 <= m <= n; |sum(values)| <= 1e3*n*eps*max|values|
/// (throws contract_error for un-centered input).
std::vector<double> degenerate_ustat_scalar(const std::vector<double>& values, int m);

/// Same formula without the centering precondition.  The combinatorial
/// identity holds for arbitrary values; this entry point exists for noise
/// diagnostics where the deviations are taken about the true parameter
/// rather than the sample mean.
std::vector<double> ustat_scalar_raw(const std::vector<double>& values, int m);

/// Dense order-k degenerate U-statistic tensor of (possibly centered) rows,
/// via the set-partition inclusion-exclusion over block power-sum tensors
/// with partition-lattice Moebius weights.  Budget: d^k <= 1e7 entries
/// (capacity_error beyond it, suggesting the per-coordinate path).
DenseTensor ustat_tensor_raw(const SampleMatrix& rows, int k);

/// Dense tensor of a centered sample; checks the centering precondition on
/// every column first (same tolerance as the scalar op).
DenseTensor degenerate_ustat_tensor(const CenteredSample& sample, int k);

/// Literal enumeration oracle: the average of products over all ordered
/// k-tuples of distinct row indices.  Budget n^k <= 1e7 tuples.
double brute_force_ustat_scalar(const std::vector<double>& values, int k);
DenseTensor brute_force_ustat_tensor(const SampleMatrix& rows, int k);

/// C_{k,n} = n^k (n-k)!/n!, evaluated in log space.
double counting_constant(int k, int n);

/// C_{k,n} and bounds for k = 1..m.
CountingConstants counting_constants(int n, int m);

/// Per-coordinate statistics of a centered sample for orders 1..m, plus the
/// dense tensors when `with_dense` is set.
UStatSet compute_ustats(const CenteredSample& sample, int m, bool with_dense = false);

} // namespace hodse
