#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "limitql/adapt.hpp"

namespace limitql {

Eigen::VectorXd edge_indicator(const CollapseResult& result,
                               const std::vector<SmoothingDomain>& domains,
                               const ConformingMesh& mesh) {
    if (result.velocities.size() != total_dofs(mesh))
        throw Error("edge_indicator: result does not match mesh");

    Eigen::VectorXd theta(domains.size());
    for (std::size_t k = 0; k < domains.size(); ++k) {
        const auto op = smoothed_B(domains[k], mesh);
        Eigen::VectorXd local(op.dof_map.size());
        for (std::size_t j = 0; j < op.dof_map.size(); ++j)
            local(j) = result.velocities(op.dof_map[j]);
        const Eigen::Vector3d strain = op.B * local;
        const double e12 = 0.5 * strain(2);
        const double density =
            strain(0) * strain(0) + strain(1) * strain(1) + 2.0 * e12 * e12;
        theta(k) = std::sqrt(domains[k].area * density);
    }
    return theta;
}

Eigen::VectorXd element_indicator(const Eigen::VectorXd& edge_theta,
                                  const ConformingMesh& mesh) {
    if (edge_theta.size() != static_cast<Eigen::Index>(mesh.edges.size()))
        throw Error("element_indicator: edge indicator does not match mesh");

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(mesh.elements.size());
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto& sides = mesh.element_edges[e];
        double sum = 0.0;
        for (const int edge : sides) sum += edge_theta(edge);
        theta(e) = sum / static_cast<double>(sides.size());
    }
    return theta;
}

IndicatorField compute_indicator(const CollapseResult& result,
                                 const std::vector<SmoothingDomain>& domains,
                                 const ConformingMesh& mesh) {
    IndicatorField field;
    field.edge_theta = edge_indicator(result, domains, mesh);
    field.element_theta = element_indicator(field.edge_theta, mesh);
    field.total = field.element_theta.sum();
    return field;
}

std::vector<int> mark(const Eigen::VectorXd& element_theta, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw Error("mark: theta must be in (0,1)");
    const double total = element_theta.sum();
    if (total <= 0.0) return {};

    std::vector<int> order(element_theta.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (element_theta(a) != element_theta(b)) return element_theta(a) > element_theta(b);
        return a < b;
    });

    std::vector<int> marked;
    double sum = 0.0;
    for (const int e : order) {
        marked.push_back(e);
        sum += element_theta(e);
        if (sum >= theta * total) break;
    }
    return marked;
}

std::vector<int> grade_marking(const ConformingMesh& mesh, const QuadtreeForest& forest,
                               std::vector<int> marked) {
    std::vector<char> in(mesh.elements.size(), 0);
    for (const int e : marked) {
        if (e < 0 || e >= static_cast<int>(mesh.elements.size()))
            throw Error("grade_marking: element id out of range");
        in[e] = 1;
    }
    std::vector<int> work = marked;
    while (!work.empty()) {
        const int e = work.back();
        work.pop_back();
        const int level = forest.cells[mesh.element_cell[e]].level;
        for (const int side : mesh.element_edges[e]) {
            for (const int nb : mesh.edges[side].elem) {
                if (nb < 0 || in[nb]) continue;
                if (forest.cells[mesh.element_cell[nb]].level < level) {
                    in[nb] = 1;
                    marked.push_back(nb);
                    work.push_back(nb);
                }
            }
        }
    }
    return marked;
}

AdaptRun adaptive_loop(QuadtreeForest forest, const MaterialModel& material,
                       const LoadCase& load, const AdaptOptions& opts) {
    if (opts.n_iter < 1) throw Error("adaptive_loop: n_iter must be >= 1");
    if (!(opts.theta > 0.0 && opts.theta < 1.0))
        throw Error("adaptive_loop: theta must be in (0,1)");

    AdaptRun run;
    for (int it = 1; it <= opts.n_iter; ++it) {
        AdaptRecord rec;
        rec.iteration = it;
        rec.mesh = extract_conforming(forest);

        const LimitProblem lp = assemble(rec.mesh, material, load);
        const auto t0 = std::chrono::steady_clock::now();
        const SolveReport report = solve(lp.program, opts.solver);
        rec.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.result = recover(lp, report);
        rec.n_elements = static_cast<int>(rec.mesh.elements.size());
        rec.n_smoothing = lp.n_cones();
        rec.n_var = total_dofs(rec.mesh) + 3 * lp.n_cones();

        run.final_status = report.status;
        if (report.status != SolveStatus::optimal) {
            rec.result.status = report.status;
            run.history.push_back(std::move(rec));
            run.message = "solver returned " + to_string(report.status) + " at iteration " +
                          std::to_string(it);
            return run;
        }
        rec.alpha_plus = rec.result.alpha_plus;

        const IndicatorField field = compute_indicator(rec.result, lp.domains, rec.mesh);
        rec.indicator_total = field.total;
        run.history.push_back(std::move(rec));

        if (it == opts.n_iter) break;

        if (opts.early_stop && run.history.size() >= 2) {
            const double prev = run.history[run.history.size() - 2].alpha_plus;
            const double cur = run.history.back().alpha_plus;
            if (std::abs(cur - prev) / std::abs(cur) < opts.early_tol) {
                run.message = "early stop: load factor stagnated";
                return run;
            }
        }

        std::vector<int> marked = mark(field.element_theta, opts.theta);
        if (opts.grade) marked = grade_marking(run.history.back().mesh, forest, marked);
        if (marked.empty()) {
            run.message = "early stop: zero indicator (rigid solution)";
            return run;
        }
        std::vector<int> cells;
        cells.reserve(marked.size());
        const auto& mesh = run.history.back().mesh;
        for (const int e : marked) cells.push_back(mesh.element_cell[e]);
        refine(forest, cells);
    }
    return run;
}

}  // namespace limitql
