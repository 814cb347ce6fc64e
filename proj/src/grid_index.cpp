#include "radseg/grid_index.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace radseg
{

GridIndex::GridIndex(std::span<const Detection> points, double cell_xy, double cell_t)
    // slightly inflated cells keep points at exactly the query radius within
    // adjacent cells despite rounding in the division
    : cell_xy_(cell_xy * (1.0 + 1e-9)), cell_t_(cell_t * (1.0 + 1e-9)), time_binned_(cell_t > 0.0)
{
    if (!(cell_xy > 0.0) || !std::isfinite(cell_xy))
        throw std::invalid_argument("grid cell size must be positive");

    std::vector<Key> keys;
    keys.reserve(points.size());
    for (const Detection& d : points)
        keys.push_back(key_of(d));

    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        const Key& ka = keys[a];
        const Key& kb = keys[b];
        if (ka.t != kb.t)
            return ka.t < kb.t;
        if (ka.x != kb.x)
            return ka.x < kb.x;
        return ka.y < kb.y;
    });

    cells_.reserve(points.size());
    std::uint32_t begin = 0;
    for (std::uint32_t k = 1; k <= order_.size(); ++k)
    {
        if (k == order_.size() || !(keys[order_[k]] == keys[order_[begin]]))
        {
            cells_.emplace(keys[order_[begin]], std::make_pair(begin, k));
            begin = k;
        }
    }
}

} // namespace radseg
