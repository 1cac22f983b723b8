#pragma once

#include <random>
#include <vector>

#include "limitql/quadtree.hpp"

namespace limitql::testing {

inline DomainSpec unit_square(int nx = 1, int ny = 1) {
    DomainSpec spec;
    Patch p;
    p.corner = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
    p.nx = nx;
    p.ny = ny;
    spec.patches.push_back(p);
    return spec;
}

inline DomainSpec rectangle(double w, double h, int nx, int ny) {
    DomainSpec spec;
    Patch p;
    p.corner = {Vec2{0, 0}, Vec2{w, 0}, Vec2{w, h}, Vec2{0, h}};
    p.nx = nx;
    p.ny = ny;
    spec.patches.push_back(p);
    return spec;
}

// Random convex polygon: sorted angles on a circle pushed through a random
// well-conditioned affine map.
inline std::vector<Vec2> random_convex_polygon(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> ang(n);
    for (auto& a : ang) a = 2.0 * M_PI * uni(rng);
    std::sort(ang.begin(), ang.end());
    for (int i = 1; i < n; ++i)
        if (ang[i] - ang[i - 1] < 0.05) ang[i] = ang[i - 1] + 0.05;
    if (2.0 * M_PI - (ang[n - 1] - ang[0]) < 0.05) return random_convex_polygon(n, rng);

    const double s1 = 0.5 + uni(rng);
    const double s2 = 0.5 + uni(rng);
    const double rot = 2.0 * M_PI * uni(rng);
    const Vec2 shift{4.0 * uni(rng) - 2.0, 4.0 * uni(rng) - 2.0};
    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i) {
        const Vec2 p{s1 * std::cos(ang[i]), s2 * std::sin(ang[i])};
        pts[i] = Vec2{p.x * std::cos(rot) - p.y * std::sin(rot),
                      p.x * std::sin(rot) + p.y * std::cos(rot)} +
                 shift;
    }
    return pts;
}

// Apply a few rounds of random leaf refinement.
inline void random_refine(QuadtreeForest& forest, std::mt19937& rng, int rounds,
                          double fraction = 0.3) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int r = 0; r < rounds; ++r) {
        std::vector<int> marked;
        for (std::size_t i = 0; i < forest.cells.size(); ++i)
            if (forest.cells[i].is_leaf() && uni(rng) < fraction)
                marked.push_back(static_cast<int>(i));
        if (marked.empty())
            for (std::size_t i = 0; i < forest.cells.size(); ++i)
                if (forest.cells[i].is_leaf()) {
                    marked.push_back(static_cast<int>(i));
                    break;
                }
        refine(forest, marked);
    }
}

}  // namespace limitql::testing
