#pragma once
// PageRank over the corpus link graph by power iteration. The dangling-node
// mass is redistributed uniformly, so the result stays a probability
// distribution at every step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "hybridfc/errors.hpp"

namespace hybridfc {

struct PagerankOptions {
    double damping = 0.85;
    double tol = 1e-9;  // L1 convergence threshold
    int max_iter = 100;
};

// out_links[i] lists the target node ids of node i (duplicates allowed and
// counted once each; self-links permitted).
inline std::vector<double> pagerank(const std::vector<std::vector<int>>& out_links,
                                    const PagerankOptions& opt = {}) {
    std::size_t n = out_links.size();
    if (n == 0) throw ConfigError("pagerank: empty graph");
    if (opt.damping <= 0.0 || opt.damping >= 1.0)
        throw ConfigError("pagerank: damping must lie in (0,1)");
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    for (int it = 0; it < opt.max_iter; ++it) {
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (out_links[i].empty()) dangling += x[i];
        double base = (1.0 - opt.damping) / static_cast<double>(n) +
                      opt.damping * dangling / static_cast<double>(n);
        std::fill(next.begin(), next.end(), base);
        for (std::size_t i = 0; i < n; ++i) {
            if (out_links[i].empty()) continue;
            double share = opt.damping * x[i] / static_cast<double>(out_links[i].size());
            for (int target : out_links[i]) next[target] += share;
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            delta += std::abs(next[i] - x[i]);
        x.swap(next);
        if (delta < opt.tol) break;
    }
    return x;
}

}  // namespace hybridfc
