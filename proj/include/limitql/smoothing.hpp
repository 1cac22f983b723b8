#pragma once

#include <Eigen/Dense>
#include <vector>

#include "limitql/polygon_basis.hpp"
#include "limitql/quadtree.hpp"

namespace limitql {

// Velocity DOF numbering over a conforming mesh: two components per mesh
// node followed by two bubble components per element.
inline int node_dof(int node, int comp) { return 2 * node + comp; }
inline int bubble_dof(const ConformingMesh& mesh, int elem, int comp) {
    return 2 * static_cast<int>(mesh.nodes.size()) + 2 * elem + comp;
}
inline int total_dofs(const ConformingMesh& mesh) {
    return 2 * static_cast<int>(mesh.nodes.size() + mesh.elements.size());
}

// Edge-based integration cell: the triangles joining the edge endpoints to
// the incident element centroids. Each part coincides with one basis
// sub-triangle of its element, so gradients are constant on it.
struct SmoothingDomain {
    struct Part {
        int elem = -1;
        int side = -1;  // local polygon side index within the element
        double area = 0.0;
    };

    int edge = -1;
    std::vector<Part> parts;  // 1 (boundary edge) or 2 (interior edge)
    double area = 0.0;
};

struct SmoothedOperator {
    Eigen::MatrixXd B;         // 3 x |dof_map|, rows (e11, e22, g12)
    double area = 0.0;
    std::vector<int> dof_map;  // global velocity DOF per column
};

struct VolDevSplit {
    Eigen::RowVectorXd m;              // e11 + e22
    Eigen::Matrix<double, 2, Eigen::Dynamic> dev;  // (e11 - e22; g12)
};

std::vector<SmoothingDomain> build_domains(const ConformingMesh& mesh);

SmoothedOperator smoothed_B(const SmoothingDomain& domain, const ConformingMesh& mesh);

VolDevSplit volumetric_and_deviatoric(const SmoothedOperator& op);

}  // namespace limitql
