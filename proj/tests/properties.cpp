#include "properties.hpp"

#include <Eigen/Dense>
#include <random>

#include "limitql/polygon_basis.hpp"
#include "limitql/smoothing.hpp"
#include "support.hpp"

namespace limitql::testing {

namespace {

std::array<double, 3> random_bary(std::mt19937& rng, double margin = 0.0) {
    std::uniform_real_distribution<double> uni(margin, 1.0 - margin);
    double a = uni(rng), b = uni(rng);
    if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    const double c = 1.0 - a - b;
    if (a < margin || b < margin || c < margin) return random_bary(rng, margin);
    return {a, b, c};
}

Vec2 bary_point(const std::array<double, 3>& l, const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    return l[0] * p0 + l[1] * p1 + l[2] * p2;
}

std::array<double, 3> bary_of(const Vec2& x, const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    const double d = (p1 - p0).cross(p2 - p0);
    const double l1 = (x - p0).cross(p2 - p0) / d;
    const double l2 = (p1 - p0).cross(x - p0) / d;
    return {1.0 - l1 - l2, l1, l2};
}

}  // namespace

CheckResult check_basis_properties(unsigned seed) {
    CheckResult res;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    for (int n = 4; n <= 8; ++n) {
        const auto& ref = reference_polygon(n);
        for (int poly = 0; poly < 4; ++poly) {
            const auto coords = random_convex_polygon(n, rng);
            Vec2 xc{0, 0};
            for (const auto& p : coords) xc += p;
            xc = xc / static_cast<double>(n);

            // Kronecker delta at the polygon vertices.
            for (int v = 0; v < n; ++v) {
                auto eval = eval_reference_bary(ref, {0.0, 1.0, 0.0}, v);
                for (int j = 0; j <= n; ++j) {
                    const double want = (j == v) ? 1.0 : 0.0;
                    if (eval.N(j) != want) res.fail("Kronecker delta violated");
                }
            }

            // Random interior points: PoU, non-negativity, linear precision.
            for (int pt = 0; pt < 1000 / 4; ++pt) {
                const int s = static_cast<int>(uni(rng) * n) % n;
                const auto bary = random_bary(rng);
                auto eval = eval_reference_bary(ref, bary, s);
                bind_physical(eval, ref, coords, s);

                if (std::abs(eval.N.head(n).sum() - 1.0) > 1e-12)
                    res.fail("partition of unity violated");
                for (int j = 0; j < n; ++j)
                    if (eval.N(j) < -1e-14) res.fail("non-negativity violated");

                const Vec2 x = bary_point(bary, xc, coords[s], coords[(s + 1) % n]);
                Vec2 interp{0, 0};
                for (int j = 0; j < n; ++j) interp += eval.N(j) * coords[j];
                if ((interp - x).norm() > 1e-10) res.fail("linear precision violated");
            }

            // Bubble vanishes along every polygon edge.
            for (int s = 0; s < n; ++s)
                for (int pt = 0; pt < 100; ++pt) {
                    const double t = uni(rng);
                    auto eval = eval_reference_bary(ref, {0.0, t, 1.0 - t}, s);
                    if (std::abs(eval.N(n)) > 1e-12) res.fail("bubble nonzero on boundary");
                }

            // Finite-difference check of physical gradients.
            for (int s = 0; s < n; ++s) {
                const Vec2& pa = coords[s];
                const Vec2& pb = coords[(s + 1) % n];
                for (int pt = 0; pt < 5; ++pt) {
                    const auto bary = random_bary(rng, 0.15);
                    auto eval = eval_reference_bary(ref, bary, s);
                    bind_physical(eval, ref, coords, s);
                    const Vec2 x = bary_point(bary, xc, pa, pb);
                    const double h = 1e-6;
                    for (int j = 0; j <= n; ++j) {
                        for (int comp = 0; comp < 2; ++comp) {
                            Vec2 xp = x, xm = x;
                            (comp == 0 ? xp.x : xp.y) += h;
                            (comp == 0 ? xm.x : xm.y) -= h;
                            const double np =
                                eval_reference_bary(ref, bary_of(xp, xc, pa, pb), s).N(j);
                            const double nm =
                                eval_reference_bary(ref, bary_of(xm, xc, pa, pb), s).N(j);
                            const double fd = (np - nm) / (2.0 * h);
                            if (std::abs(fd - eval.grad_phys(comp, j)) > 1e-6)
                                res.fail("finite-difference gradient mismatch");
                        }
                    }
                }
            }
        }
    }
    if (!res.pass && res.detail.size() > 200) res.detail.resize(200);
    return res;
}

CheckResult check_smoothing_properties(unsigned seed) {
    CheckResult res;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    for (int trial = 0; trial < 6; ++trial) {
        auto forest = build_initial(unit_square(2, 2));
        random_refine(forest, rng, 3);
        auto mesh = extract_conforming(forest);
        auto domains = build_domains(mesh);

        double area_sum = 0.0;
        for (const auto& d : domains) area_sum += d.area;
        if (std::abs(area_sum - mesh.total_area) > 1e-10 * mesh.total_area)
            res.fail("smoothing domains do not tile the mesh");

        // Random linear velocity field, bubbles zero.
        const double a1 = uni(rng), b1 = uni(rng), c1 = uni(rng);
        const double a2 = uni(rng), b2 = uni(rng), c2 = uni(rng);
        Eigen::VectorXd d = Eigen::VectorXd::Zero(total_dofs(mesh));
        for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
            const Vec2& p = mesh.nodes[v];
            d(node_dof(static_cast<int>(v), 0)) = a1 + b1 * p.x + c1 * p.y;
            d(node_dof(static_cast<int>(v), 1)) = a2 + b2 * p.x + c2 * p.y;
        }
        // Rigid rotation about a random point.
        Eigen::VectorXd rot = Eigen::VectorXd::Zero(total_dofs(mesh));
        const Vec2 pivot{uni(rng), uni(rng)};
        for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
            const Vec2 r = mesh.nodes[v] - pivot;
            rot(node_dof(static_cast<int>(v), 0)) = -r.y;
            rot(node_dof(static_cast<int>(v), 1)) = r.x;
        }

        for (const auto& dom : domains) {
            const auto op = smoothed_B(dom, mesh);
            Eigen::VectorXd local(op.dof_map.size()), local_rot(op.dof_map.size());
            for (std::size_t i = 0; i < op.dof_map.size(); ++i) {
                local(i) = d(op.dof_map[i]);
                local_rot(i) = rot(op.dof_map[i]);
            }
            const Eigen::Vector3d strain = op.B * local;
            const Eigen::Vector3d want(b1, c2, c1 + b2);
            if ((strain - want).norm() > 1e-10) res.fail("linear patch test violated");
            if ((op.B * local_rot).norm() > 1e-12) res.fail("rigid rotation gives strain");
        }
    }
    if (!res.pass && res.detail.size() > 200) res.detail.resize(200);
    return res;
}

}  // namespace limitql::testing
