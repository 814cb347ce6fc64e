#pragma once

#include "radseg/types.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace radseg
{

/// Uniform bucket grid over (x, y) and optionally time.
///
/// Every pair of points closer than cell_xy in x and y (and closer than
/// cell_t in time, when time binning is on) lands in adjacent cells, so the
/// 3x3 (or 3x3x3) neighborhood of a query holds all candidates. Candidates are
/// visited cell by cell in a fixed order, ascending index within a cell.
class GridIndex
{
public:
    /// cell_t <= 0 disables time binning.
    GridIndex(std::span<const Detection> points, double cell_xy, double cell_t = 0.0);

    template <typename Fn>
    void for_each_candidate(const Detection& query, Fn&& fn) const
    {
        const Key c = key_of(query);
        const int t_lo = time_binned_ ? -1 : 0;
        const int t_hi = time_binned_ ? 1 : 0;
        for (int dt = t_lo; dt <= t_hi; ++dt)
        {
            for (int dx = -1; dx <= 1; ++dx)
            {
                for (int dy = -1; dy <= 1; ++dy)
                {
                    const auto it = cells_.find(Key{c.x + dx, c.y + dy, c.t + dt});
                    if (it == cells_.end())
                        continue;
                    for (std::uint32_t k = it->second.first; k < it->second.second; ++k)
                        fn(order_[k]);
                }
            }
        }
    }

    std::size_t size() const { return order_.size(); }

private:
    struct Key
    {
        std::int64_t x;
        std::int64_t y;
        std::int64_t t;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash
    {
        std::size_t operator()(const Key& k) const noexcept
        {
            std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
            h ^= static_cast<std::uint64_t>(k.y) + 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
            h ^= static_cast<std::uint64_t>(k.t) + 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
            return static_cast<std::size_t>(h);
        }
    };

    Key key_of(const Detection& d) const
    {
        const auto bin = [](double v, double cell) { return static_cast<std::int64_t>(std::floor(v / cell)); };
        return Key{bin(d.x, cell_xy_), bin(d.y, cell_xy_), time_binned_ ? bin(d.time, cell_t_) : 0};
    }

    double cell_xy_;
    double cell_t_;
    bool time_binned_;
    std::vector<std::size_t> order_;
    std::unordered_map<Key, std::pair<std::uint32_t, std::uint32_t>, KeyHash> cells_;
};

} // namespace radseg
