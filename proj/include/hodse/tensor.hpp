#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hodse {

/// Dense symmetric-order-k tensor over R^d, stored flat in row-major order:
/// entry (a_1,...,a_k) lives at ((a_1*d + a_2)*d + ...)*d + a_k.
/// Sizes are budget-checked at construction (capacity_error beyond the cap).
class DenseTensor {
public:
    DenseTensor() = default;
    DenseTensor(int dim, int order, double entry_budget = default_entry_budget);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] double* data() noexcept { return data_.data(); }
    [[nodiscard]] const double* data() const noexcept { return data_.data(); }

    double& operator[](std::size_t flat) noexcept { return data_[flat]; }
    double operator[](std::size_t flat) const noexcept { return data_[flat]; }

    /// Flat offset of a multi-index (idx has length order()).
    [[nodiscard]] std::size_t offset(const int* idx) const noexcept {
        std::size_t off = 0;
        for (int i = 0; i < order_; ++i) off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx[i]);
        return off;
    }

    double& at(const int* idx) noexcept { return data_[offset(idx)]; }
    [[nodiscard]] double at(const int* idx) const noexcept { return data_[offset(idx)]; }

    /// Full contraction with another tensor of identical shape.
    [[nodiscard]] double dot(const DenseTensor& other) const;

    /// Contraction with the rank-1 tensor v_1 (x) ... (x) v_k, where vectors[i]
    /// has length dim().
    [[nodiscard]] double contract_rank1(const std::vector<const double*>& vectors) const;

    /// d^k as a size_t, or capacity_error if it exceeds entry_budget.
    static std::size_t checked_size(int dim, int order, double entry_budget);

    static constexpr double default_entry_budget = 1e7;

private:
    int dim_ = 0;
    int order_ = 0;
    std::vector<double> data_;
};

/// One set partition of {0,...,k-1} together with its partition-lattice
/// Moebius weight  prod_B (-1)^(|B|-1) (|B|-1)!.
struct SetPartition {
    std::vector<std::vector<int>> blocks;
    double moebius = 1.0;
};

/// All set partitions of {0,...,k-1} (Bell(k) of them), enumerated via
/// restricted growth strings.  k is expected to stay small (<= 12).
std::vector<SetPartition> set_partitions(int k);

/// Odometer loop over all d^k multi-indices; fn receives a pointer to k ints.
void for_each_multi_index(int dim, int order,
                          const std::function<void(const int*)>& fn);

} // namespace hodse
