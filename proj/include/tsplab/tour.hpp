#pragma once

#include <vector>

#include "tsplab/error.hpp"

namespace tsplab {

/// Permutation of node ids plus its inverse. position[order[i]] == i.
struct Tour {
    std::vector<int> order;
    std::vector<int> position;

    int n() const { return static_cast<int>(order.size()); }
    int succ(int v) const { return order[(position[v] + 1) % order.size()]; }
    int pred(int v) const { return order[(position[v] + order.size() - 1) % order.size()]; }

    static Tour from_order(std::vector<int> order) {
        Tour t;
        t.position.assign(order.size(), -1);
        for (std::size_t i = 0; i < order.size(); ++i) {
            int v = order[i];
            require(v >= 0 && v < static_cast<int>(order.size()) && t.position[v] == -1,
                    ErrorKind::invalid_argument, "tour: not a permutation");
            t.position[v] = static_cast<int>(i);
        }
        t.order = std::move(order);
        return t;
    }

    bool valid() const {
        if (order.size() != position.size()) return false;
        for (std::size_t i = 0; i < order.size(); ++i) {
            int v = order[i];
            if (v < 0 || v >= static_cast<int>(order.size())) return false;
            if (position[v] != static_cast<int>(i)) return false;
        }
        return true;
    }
};

} // namespace tsplab
