#include "limitql/smoothing.hpp"

#include <algorithm>
#include <map>

namespace limitql {

std::vector<SmoothingDomain> build_domains(const ConformingMesh& mesh) {
    std::vector<SmoothingDomain> domains(mesh.edges.size());
    for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
        const auto& edge = mesh.edges[k];
        auto& dom = domains[k];
        dom.edge = static_cast<int>(k);
        for (const int elem : edge.elem) {
            if (elem < 0) continue;
            const auto& eids = mesh.element_edges[elem];
            const auto it = std::find(eids.begin(), eids.end(), static_cast<int>(k));
            if (it == eids.end()) throw Error("build_domains: edge/element mismatch");
            const int side = static_cast<int>(it - eids.begin());

            const auto& verts = mesh.elements[elem];
            const Vec2& pa = mesh.nodes[verts[side]];
            const Vec2& pb = mesh.nodes[verts[(side + 1) % verts.size()]];
            const double area = triangle_area(mesh.centroids[elem], pa, pb);
            if (area <= 0.0)
                throw Error("build_domains: degenerate part triangle at edge " + std::to_string(k));
            dom.parts.push_back({elem, side, area});
            dom.area += area;
        }
        if (dom.parts.empty()) throw Error("build_domains: edge without elements");
    }
    return domains;
}

SmoothedOperator smoothed_B(const SmoothingDomain& domain, const ConformingMesh& mesh) {
    SmoothedOperator op;
    op.area = domain.area;

    std::map<int, int> col_of;
    auto column = [&](int dof) {
        auto it = col_of.find(dof);
        if (it != col_of.end()) return it->second;
        const int c = static_cast<int>(op.dof_map.size());
        col_of.emplace(dof, c);
        op.dof_map.push_back(dof);
        return c;
    };

    // Register columns in deterministic order: per part, vertex DOFs then bubble.
    for (const auto& part : domain.parts) {
        for (const int v : mesh.elements[part.elem]) {
            column(node_dof(v, 0));
            column(node_dof(v, 1));
        }
        column(bubble_dof(mesh, part.elem, 0));
        column(bubble_dof(mesh, part.elem, 1));
    }
    op.B = Eigen::MatrixXd::Zero(3, static_cast<int>(op.dof_map.size()));

    for (const auto& part : domain.parts) {
        const auto& verts = mesh.elements[part.elem];
        const int n = static_cast<int>(verts.size());
        const auto& ref = reference_polygon(n);

        std::vector<Vec2> coords(n);
        for (int i = 0; i < n; ++i) coords[i] = mesh.nodes[verts[i]];

        BasisEval eval = eval_reference_bary(ref, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, part.side);
        bind_physical(eval, ref, coords, part.side);

        for (int f = 0; f <= n; ++f) {
            const double gx = part.area * eval.grad_phys(0, f);
            const double gy = part.area * eval.grad_phys(1, f);
            int cx, cy;
            if (f < n) {
                cx = column(node_dof(verts[f], 0));
                cy = column(node_dof(verts[f], 1));
            } else {
                cx = column(bubble_dof(mesh, part.elem, 0));
                cy = column(bubble_dof(mesh, part.elem, 1));
            }
            op.B(0, cx) += gx;
            op.B(1, cy) += gy;
            op.B(2, cx) += gy;
            op.B(2, cy) += gx;
        }
    }
    op.B /= domain.area;
    return op;
}

VolDevSplit volumetric_and_deviatoric(const SmoothedOperator& op) {
    VolDevSplit split;
    split.m = op.B.row(0) + op.B.row(1);
    split.dev.resize(2, op.B.cols());
    split.dev.row(0) = op.B.row(0) - op.B.row(1);
    split.dev.row(1) = op.B.row(2);
    return split;
}

}  // namespace limitql
