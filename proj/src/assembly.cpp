#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "limitql/problem.hpp"

namespace limitql {

namespace {

bool warnings_enabled() {
    const char* env = std::getenv("LIMITQL_LOG");
    return env == nullptr || std::string(env) != "quiet";
}

}  // namespace

MaterialModel mohr_coulomb(double cohesion, double phi) {
    if (!(cohesion > 0.0)) throw Error("material: cohesion must be positive");
    if (!(phi >= 0.0 && phi < std::numbers::pi / 2))
        throw Error("material: friction angle must lie in [0, pi/2)");
    MaterialModel m;
    m.cohesion = cohesion;
    m.phi = phi;
    m.varsigma = std::sin(phi);
    m.kappa = cohesion * std::cos(phi);
    return m;
}

MaterialModel von_mises(double sigma_y) {
    if (!(sigma_y > 0.0)) throw Error("material: yield stress must be positive");
    return mohr_coulomb(sigma_y / std::sqrt(3.0), 0.0);
}

Eigen::VectorXd external_work_vector(const ConformingMesh& mesh, const LoadCase& load) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(total_dofs(mesh));

    for (const auto& [group, g] : load.tractions) {
        const int tag = mesh.tag_id(group);
        if (tag < 0) throw Error("external_work_vector: unknown boundary group " + group);
        bool any = false;
        for (const auto& edge : mesh.edges) {
            if (edge.tag != tag || !edge.is_boundary()) continue;
            any = true;
            const double len = (mesh.nodes[edge.b] - mesh.nodes[edge.a]).norm();
            // Linear trace on the edge: each endpoint carries half the load.
            for (const int v : {edge.a, edge.b}) {
                f(node_dof(v, 0)) += 0.5 * len * g.x;
                f(node_dof(v, 1)) += 0.5 * len * g.y;
            }
        }
        if (!any) throw Error("external_work_vector: no boundary edges in group " + group);
    }

    const Vec2 bf = load.body_force;
    if (bf.x != 0.0 || bf.y != 0.0) {
        for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
            const auto& verts = mesh.elements[e];
            const int nv = static_cast<int>(verts.size());
            const auto& ref = reference_polygon(nv);
            std::vector<Vec2> coords(nv);
            for (int i = 0; i < nv; ++i) coords[i] = mesh.nodes[verts[i]];
            for_each_quadrature_point(
                ref, coords, [&](const Vec2&, double w, int, const BasisEval& eval) {
                    for (int i = 0; i < nv; ++i) {
                        f(node_dof(verts[i], 0)) += w * eval.N(i) * bf.x;
                        f(node_dof(verts[i], 1)) += w * eval.N(i) * bf.y;
                    }
                    f(bubble_dof(mesh, static_cast<int>(e), 0)) += w * eval.N(nv) * bf.x;
                    f(bubble_dof(mesh, static_cast<int>(e), 1)) += w * eval.N(nv) * bf.y;
                });
        }
    }
    return f;
}

LimitProblem assemble(const ConformingMesh& mesh, const MaterialModel& material,
                      const LoadCase& load) {
    if (mesh.elements.empty()) throw Error("assemble: empty mesh");

    LimitProblem lp;
    lp.kappa = material.kappa;
    lp.f_ext = external_work_vector(mesh, load);
    lp.domains = build_domains(mesh);

    const int ndof = total_dofs(mesh);
    lp.free_index.assign(ndof, 0);
    lp.fixed_values = Eigen::VectorXd::Zero(ndof);
    std::vector<bool> fixed(ndof, false);

    for (const auto& [group, bc] : load.dirichlet) {
        const int tag = mesh.tag_id(group);
        if (tag < 0) throw Error("assemble: unknown Dirichlet group " + group);
        bool any = false;
        for (const auto& edge : mesh.edges) {
            if (edge.tag != tag || !edge.is_boundary()) continue;
            any = true;
            for (const int v : {edge.a, edge.b})
                for (int comp = 0; comp < 2; ++comp)
                    if (bc.fix[comp]) {
                        const int dof = node_dof(v, comp);
                        if (fixed[dof] &&
                            lp.fixed_values(dof) != bc.value[comp])
                            throw Error("assemble: conflicting Dirichlet values at node " +
                                        std::to_string(v));
                        fixed[dof] = true;
                        lp.fixed_values(dof) = bc.value[comp];
                    }
        }
        if (!any) throw Error("assemble: no boundary edges in Dirichlet group " + group);
    }

    // Body forces legitimately reach fixed boundary nodes; only a traction
    // landing on a fixed DOF deserves a warning.
    if (!load.tractions.empty() && warnings_enabled()) {
        LoadCase tractions_only;
        tractions_only.tractions = load.tractions;
        const Eigen::VectorXd f_trac = external_work_vector(mesh, tractions_only);
        for (int dof = 0; dof < ndof; ++dof)
            if (fixed[dof] && f_trac(dof) != 0.0)
                std::fprintf(
                    stderr,
                    "warning: traction applied on Dirichlet-fixed DOF %d does no work\n",
                    dof);
    }

    int n_free = 0;
    for (int dof = 0; dof < ndof; ++dof)
        lp.free_index[dof] = fixed[dof] ? -1 : n_free++;

    const int n_s = static_cast<int>(lp.domains.size());
    const int n_rows = 3 * n_s + 1;

    ConicProgram& pr = lp.program;
    pr.n_free = n_free;
    pr.cones.assign(n_s, 3);
    pr.c = Eigen::VectorXd::Zero(pr.n_total());
    pr.b = Eigen::VectorXd::Zero(n_rows);

    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < n_s; ++k) {
        const auto op = smoothed_B(lp.domains[k], mesh);
        const auto split = volumetric_and_deviatoric(op);
        const int lam_col = n_free + 3 * k;
        pr.c(lam_col) = material.kappa * lp.domains[k].area;

        // rho - dev.d = 0 (two rows), varsigma*lambda - m.d = 0 (one row).
        trip.emplace_back(3 * k, lam_col + 1, 1.0);
        trip.emplace_back(3 * k + 1, lam_col + 2, 1.0);
        if (material.varsigma != 0.0)
            trip.emplace_back(3 * k + 2, lam_col, material.varsigma);
        for (std::size_t j = 0; j < op.dof_map.size(); ++j) {
            const int dof = op.dof_map[j];
            const int col = lp.free_index[dof];
            const double d0 = split.dev(0, static_cast<int>(j));
            const double d1 = split.dev(1, static_cast<int>(j));
            const double mm = split.m(static_cast<int>(j));
            if (col >= 0) {
                if (d0 != 0.0) trip.emplace_back(3 * k, col, -d0);
                if (d1 != 0.0) trip.emplace_back(3 * k + 1, col, -d1);
                if (mm != 0.0) trip.emplace_back(3 * k + 2, col, -mm);
            } else {
                const double v = lp.fixed_values(dof);
                pr.b(3 * k) += d0 * v;
                pr.b(3 * k + 1) += d1 * v;
                pr.b(3 * k + 2) += mm * v;
            }
        }
    }

    // Unit external work normalization.
    double b_norm = 1.0;
    bool any_work = false;
    for (int dof = 0; dof < ndof; ++dof) {
        if (lp.f_ext(dof) == 0.0) continue;
        const int col = lp.free_index[dof];
        if (col >= 0) {
            trip.emplace_back(3 * n_s, col, lp.f_ext(dof));
            any_work = true;
        } else {
            b_norm -= lp.f_ext(dof) * lp.fixed_values(dof);
        }
    }
    // With all working DOFs prescribed, the normalization row degenerates: if
    // the prescribed field already does unit work the row is vacuous and the
    // program minimizes dissipation under the Dirichlet data alone.
    if (!any_work && std::abs(b_norm) > 1e-12)
        throw Error("assemble: zero external work: normalization impossible");
    pr.b(3 * n_s) = any_work ? b_norm : 0.0;

    pr.A.resize(n_rows, pr.n_total());
    pr.A.setFromTriplets(trip.begin(), trip.end());
    return lp;
}

CollapseResult recover(const LimitProblem& problem, const SolveReport& report) {
    CollapseResult res;
    res.status = report.status;
    res.gap = report.gap;
    res.iterations = report.iterations;
    if (report.status != SolveStatus::optimal) return res;

    const int ndof = static_cast<int>(problem.free_index.size());
    res.velocities.resize(ndof);
    for (int dof = 0; dof < ndof; ++dof) {
        const int col = problem.free_index[dof];
        res.velocities(dof) = col >= 0 ? report.x(col) : problem.fixed_values(dof);
    }

    const int n_s = problem.n_cones();
    res.lambda.resize(n_s);
    res.dissipation_density.resize(n_s);
    for (int k = 0; k < n_s; ++k) {
        res.lambda(k) = report.x(problem.program.n_free + 3 * k);
        res.dissipation_density(k) = problem.kappa * res.lambda(k);
    }
    res.alpha_plus = report.primal_obj;
    return res;
}

CollapseResult solve_collapse(const ConformingMesh& mesh, const MaterialModel& material,
                              const LoadCase& load, const SolveOptions& opts) {
    const LimitProblem lp = assemble(mesh, material, load);
    return recover(lp, solve(lp.program, opts));
}

}  // namespace limitql
