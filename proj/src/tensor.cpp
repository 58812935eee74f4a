#include "hodse/tensor.hpp"

#include "hodse/errors.hpp"
#include "hodse/numeric.hpp"

#include <cmath>
#include <string>

namespace hodse {

std::size_t DenseTensor::checked_size(int dim, int order, double entry_budget) {
    if (dim < 1) throw contract_error("DenseTensor: dim must be >= 1");
    if (order < 0) throw contract_error("DenseTensor: order must be >= 0");
    const double entries = std::pow(static_cast<double>(dim), order);
    if (entries > entry_budget) {
        throw capacity_error(
            "dense tensor with d^k = " + std::to_string(entries) +
            " entries exceeds the budget of " + std::to_string(entry_budget) +
            "; use the per-coordinate (separable) path instead");
    }
    return static_cast<std::size_t>(entries + 0.5);
}

DenseTensor::DenseTensor(int dim, int order, double entry_budget)
    : dim_(dim), order_(order), data_(checked_size(dim, order, entry_budget), 0.0) {}

double DenseTensor::dot(const DenseTensor& other) const {
    if (other.dim_ != dim_ || other.order_ != order_) {
        throw contract_error("DenseTensor::dot: shape mismatch");
    }
    CompensatedSum acc;
    for (std::size_t i = 0; i < data_.size(); ++i) acc.add(data_[i] * other.data_[i]);
    return acc.value();
}

double DenseTensor::contract_rank1(const std::vector<const double*>& vectors) const {
    if (static_cast<int>(vectors.size()) != order_) {
        throw contract_error("DenseTensor::contract_rank1: need one vector per mode");
    }
    CompensatedSum acc;
    for_each_multi_index(dim_, order_, [&](const int* ix) {
        double prod = data_[offset(ix)];
        for (int i = 0; i < order_; ++i) prod *= vectors[static_cast<std::size_t>(i)][ix[i]];
        acc.add(prod);
    });
    return acc.value();
}

std::vector<SetPartition> set_partitions(int k) {
    if (k < 1) throw contract_error("set_partitions: k must be >= 1");
    if (k > 12) throw capacity_error("set_partitions: k > 12 not supported");
    std::vector<SetPartition> out;
    // Restricted growth strings: a[0] = 0, a[i] <= max(a[0..i-1]) + 1.
    std::vector<int> a(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int i, int max_used) {
        if (i == k) {
            SetPartition part;
            part.blocks.assign(static_cast<std::size_t>(max_used) + 1, {});
            for (int j = 0; j < k; ++j) part.blocks[static_cast<std::size_t>(a[static_cast<std::size_t>(j)])].push_back(j);
            double mu = 1.0;
            for (const auto& block : part.blocks) {
                const std::size_t b = block.size();
                double fact = 1.0;
                for (std::size_t t = 2; t + 1 <= b; ++t) fact *= static_cast<double>(t);
                // (-1)^(b-1) * (b-1)!
                mu *= ((b % 2 == 1) ? 1.0 : -1.0) * fact;
            }
            part.moebius = mu;
            out.push_back(std::move(part));
            return;
        }
        for (int v = 0; v <= max_used + 1; ++v) {
            a[static_cast<std::size_t>(i)] = v;
            rec(i + 1, std::max(max_used, v));
        }
    };
    a[0] = 0;
    rec(1, 0);
    return out;
}

void for_each_multi_index(int dim, int order,
                          const std::function<void(const int*)>& fn) {
    if (order == 0) {
        fn(nullptr);
        return;
    }
    std::vector<int> idx(static_cast<std::size_t>(order), 0);
    while (true) {
        fn(idx.data());
        int pos = order - 1;
        while (pos >= 0) {
            if (++idx[static_cast<std::size_t>(pos)] < dim) break;
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
}

} // namespace hodse
