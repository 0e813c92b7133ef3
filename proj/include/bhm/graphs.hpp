#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bhm {

// Labeled graphs on n vertices are edge bitmasks over the C(n,2) pairs in
// the fixed order (0,1),(0,2),(1,2),(0,3),...
inline std::vector<std::pair<int, int>> edge_order(int n) {
    std::vector<std::pair<int, int>> e;
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < j; ++i) e.emplace_back(i, j);
    return e;
}

inline bool edge_mask_connected(std::uint32_t mask, int n,
                                const std::vector<std::pair<int, int>>& edges) {
    if (n == 1) return true;
    std::uint32_t reach = 1;  // vertex bitset, start from vertex 0
    for (;;) {
        std::uint32_t next = reach;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            if (!(mask >> k & 1)) continue;
            auto [i, j] = edges[k];
            if (next >> i & 1) next |= 1u << j;
            if (next >> j & 1) next |= 1u << i;
        }
        if (next == reach) break;
        reach = next;
    }
    return reach == (1u << n) - 1;
}

// Streams every connected labeled graph on n vertices exactly once, as an
// edge mask, by brute-force filtering of all 2^C(n,2) graphs.
inline void connected_graphs(int n, const std::function<void(std::uint32_t)>& emit,
                             int n_limit = 8) {
    if (n < 1 || n > n_limit)
        throw std::invalid_argument("connected_graphs: n out of range");
    auto edges = edge_order(n);
    const std::uint64_t total = 1ull << edges.size();
    for (std::uint64_t mask = 0; mask < total; ++mask)
        if (edge_mask_connected(static_cast<std::uint32_t>(mask), n, edges))
            emit(static_cast<std::uint32_t>(mask));
}

inline std::uint64_t count_connected_graphs(int n, int n_limit = 8) {
    std::uint64_t count = 0;
    connected_graphs(n, [&](std::uint32_t) { ++count; }, n_limit);
    return count;
}

}  // namespace bhm
