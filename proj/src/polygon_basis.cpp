#include "limitql/polygon_basis.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace limitql {

ReferencePolygon::ReferencePolygon(int n_vertices) : n(n_vertices) {
    if (n < 3) throw Error("ReferencePolygon: n must be >= 3");
    vertices.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n;
        vertices.emplace_back(std::cos(a), std::sin(a));
    }
}

const ReferencePolygon& reference_polygon(int n) {
    static std::map<int, ReferencePolygon> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, ReferencePolygon(n)).first;
    return it->second;
}

Eigen::MatrixXd vertex_nodal_values(int n) {
    if (n < 3) throw Error("vertex_nodal_values: n must be >= 3");
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n + 1);
    phi.leftCols(n).setIdentity();
    phi.col(n).setConstant(1.0 / n);
    return phi;
}

namespace {

// Gradients of the three barycentric functions of triangle (a, b, c).
void barycentric_gradients(const Vec2& a, const Vec2& b, const Vec2& c,
                           Eigen::Matrix<double, 2, 3>& g) {
    const double twice_area = (b - a).cross(c - a);
    g.col(0) << (b.y - c.y) / twice_area, (c.x - b.x) / twice_area;
    g.col(1) << (c.y - a.y) / twice_area, (a.x - c.x) / twice_area;
    g.col(2) << (a.y - b.y) / twice_area, (b.x - a.x) / twice_area;
}

}  // namespace

BasisEval eval_reference_bary(const ReferencePolygon& ref, const std::array<double, 3>& bary,
                              int sub_tri) {
    if (sub_tri < 0 || sub_tri >= ref.n) throw Error("eval_reference: bad sub-triangle index");
    for (const double l : bary)
        if (l < -1e-12) throw Error("eval_reference: point outside sub-triangle");

    const int i = sub_tri;
    const int j = (sub_tri + 1) % ref.n;
    const Vec2 center{0.0, 0.0};

    BasisEval eval;
    eval.N = Eigen::VectorXd::Constant(ref.n + 1, bary[0] / ref.n);
    eval.N(i) += bary[1];
    eval.N(j) += bary[2];
    eval.N(ref.n) = bary[0];  // bubble

    Eigen::Matrix<double, 2, 3> g;
    barycentric_gradients(center, ref.vertices[i], ref.vertices[j], g);
    eval.grad_ref = (g.col(0) / ref.n).replicate(1, ref.n + 1);
    eval.grad_ref.col(i) += g.col(1);
    eval.grad_ref.col(j) += g.col(2);
    eval.grad_ref.col(ref.n) = g.col(0);
    return eval;
}

BasisEval eval_reference(const ReferencePolygon& ref, const Vec2& xi, int sub_tri) {
    if (sub_tri < 0 || sub_tri >= ref.n) throw Error("eval_reference: bad sub-triangle index");
    const Vec2 a{0.0, 0.0};
    const Vec2& b = ref.vertices[sub_tri];
    const Vec2& c = ref.vertices[(sub_tri + 1) % ref.n];
    const double twice_area = (b - a).cross(c - a);
    const double l1 = (xi - a).cross(c - a) / twice_area;
    const double l2 = (b - a).cross(xi - a) / twice_area;
    return eval_reference_bary(ref, {1.0 - l1 - l2, l1, l2}, sub_tri);
}

void bind_physical(BasisEval& eval, const ReferencePolygon& ref,
                   const std::vector<Vec2>& element_coords, int sub_tri) {
    if (static_cast<int>(element_coords.size()) != ref.n)
        throw Error("bind_physical: vertex count mismatch");

    Vec2 xc{0.0, 0.0};
    for (const auto& p : element_coords) xc += p;
    xc = xc / static_cast<double>(ref.n);

    const int i = sub_tri;
    const int j = (sub_tri + 1) % ref.n;
    Eigen::Matrix2d phys, rf;
    phys << element_coords[i].x - xc.x, element_coords[j].x - xc.x,
            element_coords[i].y - xc.y, element_coords[j].y - xc.y;
    rf << ref.vertices[i].x, ref.vertices[j].x, ref.vertices[i].y, ref.vertices[j].y;

    eval.J = phys * rf.inverse();
    eval.det_J = eval.J.determinant();
    if (eval.det_J <= 0.0) throw Error("bind_physical: inverted sub-triangle");
    eval.grad_phys = eval.J.inverse().transpose() * eval.grad_ref;
    eval.bound = true;
}

void for_each_quadrature_point(
    const ReferencePolygon& ref, const std::vector<Vec2>& element_coords,
    const std::function<void(const Vec2&, double, int, const BasisEval&)>& fn) {
    Vec2 xc{0.0, 0.0};
    for (const auto& p : element_coords) xc += p;
    xc = xc / static_cast<double>(ref.n);

    for (int s = 0; s < ref.n; ++s) {
        const Vec2& pa = element_coords[s];
        const Vec2& pb = element_coords[(s + 1) % ref.n];
        const double area = triangle_area(xc, pa, pb);
        if (area <= 0.0) throw Error("for_each_quadrature_point: degenerate sub-triangle");
        for (const auto& bary : ReferencePolygon::gauss_bary) {
            BasisEval eval = eval_reference_bary(ref, bary, s);
            bind_physical(eval, ref, element_coords, s);
            const Vec2 x = bary[0] * xc + bary[1] * pa + bary[2] * pb;
            fn(x, 2.0 * area * ReferencePolygon::gauss_weight, s, eval);
        }
    }
}

}  // namespace limitql
