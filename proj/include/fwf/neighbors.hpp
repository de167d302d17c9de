#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fwf/signal_gen.hpp"

namespace fwf {

struct Neighbor {
    std::size_t index;
    double distance;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact Euclidean K-nearest-neighbor index (kd-tree).
///
/// Results are sorted by distance, ties broken by ascending point index, so a
/// query returns exactly what an exhaustive scan would. The index keeps its own
/// reordered copy of the points and is immutable once built; concurrent
/// queries are safe.
class NeighborIndex {
public:
    explicit NeighborIndex(const RowMatrix& points, std::size_t leaf_size = 16);

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }

    std::vector<Neighbor> query(std::span<const double> q, std::size_t k) const;

private:
    struct Node {
        std::uint32_t begin;
        std::uint32_t end;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t split_dim = 0;
        double split_value = 0.0;
    };
    struct Candidate {
        double dist2;
        std::size_t index;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end, const RowMatrix& points,
                       std::vector<std::uint32_t>& perm);
    void search(std::int32_t node, const double* q, std::size_t k,
                std::vector<Candidate>& heap) const;

    std::size_t count_;
    std::size_t dim_;
    std::size_t leaf_size_;
    std::vector<double> data_;          // points in tree order, row-major
    std::vector<std::size_t> original_;  // tree slot -> original row
    std::vector<Node> nodes_;
};

/// Squared Euclidean distance, accumulated in coordinate order.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace fwf
