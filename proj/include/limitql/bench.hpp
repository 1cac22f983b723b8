#pragma once

#include <numbers>

#include "limitql/adapt.hpp"

namespace limitql {

struct ReferenceValue {
    std::string source;
    double alpha_ref = 0.0;  // 0 = no published value for these parameters
    double lower = 0.0;      // bracketing bounds where the literature gives them
    double upper = 0.0;

    bool has_value() const { return alpha_ref > 0.0; }
};

// Self-contained collapse-load problem: tagged forest plus material, loads
// and the reference solution. Feed the forest straight into adaptive_loop.
struct Benchmark {
    std::string name;
    DomainSpec domain;
    QuadtreeForest forest;
    MaterialModel material;
    LoadCase load;
    ReferenceValue reference;
    std::string symmetry;
};

// Exact bearing-capacity factor of a smooth strip footing on weightless
// cohesive-frictional soil: [e^{pi tan(phi)} tan^2(pi/4 + phi/2) - 1] cot(phi),
// with the phi -> 0 limit 2 + pi.
double prandtl_bearing_factor(double phi);

// Half-model of a smooth rigid strip footing of width B = 1 on weightless
// soil with cohesion 1 and friction angle phi (radians). Domain 2.5B x B at
// phi = 0 growing to 13B x 10B at phi = 35 deg; the footing load is a unit
// vertical traction on the first top edge of the cut boundary.
Benchmark footing(double phi);

// Homogeneous 70-degree slope of unit height, unit cohesion and unit weight;
// the load factor equals the stability number gamma*H/c.
Benchmark slope(double phi = 20.0 * std::numbers::pi / 180.0);

// Quarter model of a rectangular 20 x 10 block with two symmetric holes,
// stretched horizontally by a unit traction. The half-hole boundary is
// snapped to its circle during refinement.
Benchmark two_holes(double phi = 0.0, double hole_radius = 0.5);

}  // namespace limitql
