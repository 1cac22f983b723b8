#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "limitql/geometry.hpp"

namespace limitql {

// Regular n-gon inscribed in the unit circle, fanned into n sub-triangles
// (center, vertex i, vertex i+1), with a degree-2 quadrature rule per
// sub-triangle (edge midpoints in barycentric form, weights summing to 1/2).
struct ReferencePolygon {
    int n = 0;
    std::vector<Vec2> vertices;

    static constexpr std::array<std::array<double, 3>, 3> gauss_bary{
        {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}};
    static constexpr double gauss_weight = 1.0 / 6.0;

    explicit ReferencePolygon(int n_vertices);
};

// Shared cache; reference polygons are immutable once built.
const ReferencePolygon& reference_polygon(int n);

// Shape-function data at one point of one sub-triangle. Column layout:
// n vertex functions followed by the bubble.
struct BasisEval {
    Eigen::VectorXd N;             // n+1
    Eigen::Matrix2Xd grad_ref;     // 2 x (n+1)
    Eigen::Matrix2d J;             // bound: sub-triangle map gradient
    double det_J = 0.0;
    Eigen::Matrix2Xd grad_phys;    // 2 x (n+1), bound only
    bool bound = false;
};

// Values of the n vertex functions at the n vertices and the centroid:
// identity block plus a 1/n column.
Eigen::MatrixXd vertex_nodal_values(int n);

BasisEval eval_reference(const ReferencePolygon& ref, const Vec2& xi, int sub_tri);

// Same, with the point given in sub-triangle barycentric coordinates
// (centroid, vertex i, vertex i+1).
BasisEval eval_reference_bary(const ReferencePolygon& ref, const std::array<double, 3>& bary,
                              int sub_tri);

void bind_physical(BasisEval& eval, const ReferencePolygon& ref,
                   const std::vector<Vec2>& element_coords, int sub_tri);

// Visit every quadrature point of the element: physical position, physical
// weight, sub-triangle index, and fully bound basis data.
void for_each_quadrature_point(
    const ReferencePolygon& ref, const std::vector<Vec2>& element_coords,
    const std::function<void(const Vec2& x, double w, int sub_tri, const BasisEval&)>& fn);

}  // namespace limitql
