#include <cmath>

#include "limitql/bench.hpp"

namespace limitql {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double round_count(double x) { return std::max(1.0, std::round(x)); }

}  // namespace

double prandtl_bearing_factor(double phi) {
    if (!(phi >= 0.0 && phi < std::numbers::pi / 2))
        throw Error("prandtl_bearing_factor: phi must lie in [0, pi/2)");
    if (phi < 1e-12) return 2.0 + std::numbers::pi;
    const double t = std::tan(phi);
    const double kp = std::tan(std::numbers::pi / 4 + phi / 2);
    return (std::exp(std::numbers::pi * t) * kp * kp - 1.0) / t;
}

Benchmark footing(double phi) {
    if (!(phi >= 0.0 && phi < std::numbers::pi / 2))
        throw Error("footing: phi must lie in [0, pi/2)");

    Benchmark b;
    b.name = "footing";
    b.symmetry = "half-model, symmetry cut under the footing centreline";

    // Domain grows with phi because the failure fan widens: the published
    // anchors are 2.5 x 1 (phi = 0) and 13 x 10 (phi = 35 deg), with the
    // root cell size growing from 0.5 to 1 over the same range.
    const double t = phi / (35.0 * kDeg);
    const double length = 2.5 + 10.5 * t;
    const double height = 1.0 + 9.0 * t;
    const double cell = 0.5 + 0.5 * t;
    const int nx = static_cast<int>(round_count(length / cell));
    const int ny = static_cast<int>(round_count(height / cell));

    Patch p;
    p.corner = {Vec2{0, 0}, Vec2{length, 0}, Vec2{length, height}, Vec2{0, height}};
    p.nx = nx;
    p.ny = ny;
    b.domain.patches.push_back(p);

    const double dx = length / nx;
    b.forest = build_initial(b.domain);
    tag_boundary_sides(b.forest, "footing", [=](const Vec2& q) {
        return q.y > height - 1e-9 && q.x < 0.75 * dx;
    });
    tag_boundary_sides(b.forest, "left", [](const Vec2& q) { return q.x < 1e-9; });
    tag_boundary_sides(b.forest, "right",
                       [=](const Vec2& q) { return q.x > length - 1e-9; });
    tag_boundary_sides(b.forest, "bottom", [](const Vec2& q) { return q.y < 1e-9; });

    b.material = mohr_coulomb(1.0, phi);
    b.load.tractions["footing"] = Vec2{0.0, -1.0};
    b.load.dirichlet["left"] = DirichletBC::fix_x();
    b.load.dirichlet["right"] = DirichletBC::fix_x();
    b.load.dirichlet["bottom"] = DirichletBC::fix_both();

    b.reference.source = "Prandtl bearing-capacity solution";
    b.reference.alpha_ref = prandtl_bearing_factor(phi);
    b.reference.lower = b.reference.upper = b.reference.alpha_ref;
    return b;
}

Benchmark slope(double phi) {
    if (!(phi >= 0.0 && phi < std::numbers::pi / 2))
        throw Error("slope: phi must lie in [0, pi/2)");

    Benchmark b;
    b.name = "slope";
    b.symmetry = "none";

    // 70-degree slope of unit height with its toe at the origin; soil body
    // extends 2 units behind the toe, 3 units behind the crest and 1.5 below.
    const double crest_x = 1.0 / std::tan(70.0 * kDeg);
    const double right = crest_x + 3.0;

    Patch p1;  // foundation layer left of the toe
    p1.corner = {Vec2{-2.0, -1.5}, Vec2{0.0, -1.5}, Vec2{0.0, 0.0}, Vec2{-2.0, 0.0}};
    p1.nx = 4;
    p1.ny = 3;
    Patch p2;  // foundation layer under the slope body
    p2.corner = {Vec2{0.0, -1.5}, Vec2{right, -1.5}, Vec2{right, 0.0}, Vec2{0.0, 0.0}};
    p2.nx = 7;
    p2.ny = 3;
    Patch p3;  // slope body, inclined left face
    p3.corner = {Vec2{0.0, 0.0}, Vec2{right, 0.0}, Vec2{right, 1.0}, Vec2{crest_x, 1.0}};
    p3.nx = 7;
    p3.ny = 2;
    b.domain.patches = {p1, p2, p3};

    b.forest = build_initial(b.domain);
    tag_boundary_sides(b.forest, "bottom", [](const Vec2& q) { return q.y < -1.5 + 1e-9; });
    tag_boundary_sides(b.forest, "left", [](const Vec2& q) { return q.x < -2.0 + 1e-9; });
    tag_boundary_sides(b.forest, "right",
                       [=](const Vec2& q) { return q.x > right - 1e-9; });

    b.material = mohr_coulomb(1.0, phi);
    b.load.body_force = Vec2{0.0, -1.0};
    b.load.dirichlet["bottom"] = DirichletBC::fix_both();
    b.load.dirichlet["left"] = DirichletBC::fix_x();
    b.load.dirichlet["right"] = DirichletBC::fix_x();

    if (std::abs(phi - 20.0 * kDeg) < 1e-9) {
        b.reference = {"static/kinematic bracket for the 70-degree slope", 8.266, 8.210,
                       8.366};
    } else if (std::abs(phi - 35.0 * kDeg) < 1e-9) {
        b.reference = {"static/kinematic bracket for the 70-degree slope", 13.984, 13.75,
                       14.19};
    }
    return b;
}

Benchmark two_holes(double phi, double hole_radius) {
    if (!(phi >= 0.0 && phi < std::numbers::pi / 2))
        throw Error("two_holes: phi must lie in [0, pi/2)");
    if (!(hole_radius > 0.0 && hole_radius < 1.5))
        throw Error("two_holes: hole radius must lie in (0, 1.5)");

    Benchmark b;
    b.name = "two_holes";
    b.symmetry = "quarter model of the 20 x 10 block, holes centred at (-5, 0), (5, 0)";

    const Vec2 center{5.0, 0.0};
    const CircleSnap circle{center, hole_radius};
    b.domain.snap["hole"] = circle;

    // O-grid around the half hole: four transfinite patches between the
    // circle and the half-square ring [3,7] x [0,2], spokes every 45 deg.
    const auto on_circle = [&](double deg) {
        return center + hole_radius * Vec2{std::cos(deg * kDeg), std::sin(deg * kDeg)};
    };
    const std::array<Vec2, 5> ring = {Vec2{7, 0}, Vec2{7, 2}, Vec2{5, 2}, Vec2{3, 2},
                                      Vec2{3, 0}};
    for (int k = 0; k < 4; ++k) {
        Patch p;
        p.corner = {on_circle(45.0 * k), ring[k], ring[k + 1], on_circle(45.0 * (k + 1))};
        p.nx = 2;  // radial
        p.ny = 1;  // circumferential
        p.side[3] = PatchSide{"hole", true};
        b.domain.patches.push_back(p);
    }

    const auto block = [](double x0, double x1, double y0, double y1, int nx, int ny) {
        Patch p;
        p.corner = {Vec2{x0, y0}, Vec2{x1, y0}, Vec2{x1, y1}, Vec2{x0, y1}};
        p.nx = nx;
        p.ny = ny;
        return p;
    };
    b.domain.patches.push_back(block(0, 3, 0, 2, 2, 1));    // left of the ring
    b.domain.patches.push_back(block(7, 10, 0, 2, 2, 1));   // right of the ring
    b.domain.patches.push_back(block(0, 3, 2, 5, 2, 2));    // upper band
    b.domain.patches.push_back(block(3, 5, 2, 5, 1, 2));
    b.domain.patches.push_back(block(5, 7, 2, 5, 1, 2));
    b.domain.patches.push_back(block(7, 10, 2, 5, 2, 2));

    b.forest = build_initial(b.domain);
    tag_boundary_sides(b.forest, "tension", [](const Vec2& q) { return q.x > 10.0 - 1e-9; });
    tag_boundary_sides(b.forest, "symmetry_x", [](const Vec2& q) { return q.x < 1e-9; });
    tag_boundary_sides(b.forest, "symmetry_y", [](const Vec2& q) { return q.y < 1e-9; });

    b.material = mohr_coulomb(1.0, phi);
    b.load.tractions["tension"] = Vec2{1.0, 0.0};
    b.load.dirichlet["symmetry_x"] = DirichletBC::fix_x();
    b.load.dirichlet["symmetry_y"] = DirichletBC::fix_y();

    if (phi < 1e-9) {
        b.reference = {"lower/upper bound bracket for the two-hole block", 1.814, 1.8089,
                       1.825};
    } else if (std::abs(phi - 30.0 * kDeg) < 1e-9) {
        b.reference = {"lower/upper bound bracket for the two-hole block", 1.059, 1.0562,
                       1.063};
    }
    return b;
}

}  // namespace limitql
