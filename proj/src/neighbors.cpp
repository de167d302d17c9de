#include "fwf/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "fwf/errors.hpp"

namespace fwf {

namespace {

inline double sq_dist(const double* a, const double* b, std::size_t dim) noexcept {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    return sq_dist(a.data(), b.data(), std::min(a.size(), b.size()));
}

NeighborIndex::NeighborIndex(const RowMatrix& points, std::size_t leaf_size)
    : count_(static_cast<std::size_t>(points.rows())),
      dim_(static_cast<std::size_t>(points.cols())),
      leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    if (count_ == 0) throw ParameterError("cannot build a neighbor index over zero points");
    if (dim_ == 0) throw DimensionError("neighbor index points must have dimension >= 1");
    if (count_ > std::numeric_limits<std::uint32_t>::max() / 2) {
        throw ParameterError("too many points for the neighbor index");
    }
    std::vector<std::uint32_t> perm(count_);
    std::iota(perm.begin(), perm.end(), 0u);
    nodes_.reserve(2 * count_ / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(count_), points, perm);

    data_.resize(count_ * dim_);
    original_.resize(count_);
    for (std::size_t slot = 0; slot < count_; ++slot) {
        const auto row = static_cast<Eigen::Index>(perm[slot]);
        std::copy_n(points.data() + row * points.cols(), dim_, data_.data() + slot * dim_);
        original_[slot] = perm[slot];
    }
}

std::int32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end, const RowMatrix& points,
                                  std::vector<std::uint32_t>& perm) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    std::size_t best_dim = 0;
    double best_spread = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::uint32_t s = begin; s < end; ++s) {
            const double v = points(perm[s], static_cast<Eigen::Index>(j));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = j;
        }
    }
    if (best_spread == 0.0) return id;  // all points identical: keep as one leaf

    const std::uint32_t mid = begin + (end - begin) / 2;
    const auto col = static_cast<Eigen::Index>(best_dim);
    std::nth_element(perm.begin() + begin, perm.begin() + mid, perm.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points(a, col) < points(b, col); });
    const double split = points(perm[mid], col);

    const std::int32_t left = build(begin, mid, points, perm);
    const std::int32_t right = build(mid, end, points, perm);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.left = left;
    node.right = right;
    node.split_dim = static_cast<std::uint32_t>(best_dim);
    node.split_value = split;
    return id;
}

namespace {

struct ByDistanceThenIndex {
    template <typename C>
    bool operator()(const C& a, const C& b) const noexcept {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
};

}  // namespace

void NeighborIndex::search(std::int32_t id, const double* q, std::size_t k,
                           std::vector<Candidate>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const ByDistanceThenIndex less;
    if (node.left < 0) {
        for (std::uint32_t s = node.begin; s < node.end; ++s) {
            const Candidate c{sq_dist(q, data_.data() + std::size_t{s} * dim_, dim_), original_[s]};
            if (heap.size() < k) {
                heap.push_back(c);
                std::push_heap(heap.begin(), heap.end(), less);
            } else if (less(c, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), less);
                heap.back() = c;
                std::push_heap(heap.begin(), heap.end(), less);
            }
        }
        return;
    }
    const double diff = q[node.split_dim] - node.split_value;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    // Equality must still descend: a tied distance with a lower index may sit there.
    if (heap.size() < k || diff * diff <= heap.front().dist2) search(far, q, k, heap);
}

std::vector<Neighbor> NeighborIndex::query(std::span<const double> q, std::size_t k) const {
    if (q.size() != dim_) {
        throw DimensionError(fmt::format("query has length {} but index dimension is {}", q.size(), dim_));
    }
    if (k == 0) throw ParameterError("K must be at least 1");
    if (k > count_) {
        throw ParameterError(fmt::format("K = {} exceeds the {} indexed points", k, count_));
    }
    std::vector<Candidate> heap;
    heap.reserve(k + 1);
    search(0, q.data(), k, heap);
    std::sort_heap(heap.begin(), heap.end(), ByDistanceThenIndex{});
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    for (const auto& c : heap) out.push_back({c.index, std::sqrt(c.dist2)});
    return out;
}

}  // namespace fwf
