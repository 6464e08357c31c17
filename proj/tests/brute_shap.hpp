#pragma once

#include <bit>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "hyperdet/tree.hpp"

namespace testutil {

// Conditional expectation of the tree output given the `known` features:
// known features follow the instance, unknown ones average both children by
// training cover. This is the game whose Shapley values path-dependent
// TreeSHAP computes.
inline double cover_walk(const hyperdet::Tree& tree, std::span<const double> x,
                         const std::set<int>& known, std::int32_t node = 0) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) return n.value;
    if (known.count(n.feature) != 0) {
        const bool left = x[static_cast<std::size_t>(n.feature)] < n.threshold;
        return cover_walk(tree, x, known, left ? n.left : n.right);
    }
    const double wl = tree.nodes[static_cast<std::size_t>(n.left)].cover;
    const double wr = tree.nodes[static_cast<std::size_t>(n.right)].cover;
    return (wl * cover_walk(tree, x, known, n.left) + wr * cover_walk(tree, x, known, n.right)) /
           (wl + wr);
}

// Shapley values by direct enumeration: phi_f = sum over subsets S of the
// other players of |S|!(m-|S|-1)!/m! * (v(S+f) - v(S)). Only features the tree
// actually splits on participate; the rest are null players and keep zero.
inline std::vector<double> brute_shap(const hyperdet::Tree& tree, std::span<const double> x,
                                      std::size_t n_features) {
    std::set<int> used_set;
    for (const auto& n : tree.nodes) {
        if (!n.is_leaf()) used_set.insert(n.feature);
    }
    const std::vector<int> used(used_set.begin(), used_set.end());
    const std::size_t m = used.size();
    std::vector<double> phi(n_features, 0.0);
    if (m == 0) return phi;

    const std::uint32_t masks = 1u << m;
    std::vector<double> v(masks);
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
        std::set<int> s;
        for (std::size_t k = 0; k < m; ++k) {
            if (mask & (1u << k)) s.insert(used[k]);
        }
        v[mask] = cover_walk(tree, x, s);
    }

    std::vector<double> factorial(m + 1, 1.0);
    for (std::size_t k = 1; k <= m; ++k) {
        factorial[k] = factorial[k - 1] * static_cast<double>(k);
    }
    for (std::size_t k = 0; k < m; ++k) {
        double total = 0.0;
        for (std::uint32_t mask = 0; mask < masks; ++mask) {
            if (mask & (1u << k)) continue;
            const int s = std::popcount(mask);
            const double weight = factorial[static_cast<std::size_t>(s)] *
                                  factorial[m - static_cast<std::size_t>(s) - 1] / factorial[m];
            total += weight * (v[mask | (1u << k)] - v[mask]);
        }
        phi[static_cast<std::size_t>(used[k])] = total;
    }
    return phi;
}

}  // namespace testutil
