#include <cmath>
#include <limits>
#include <map>

#include "limitql/conic.hpp"

namespace limitql {

namespace {

struct Row {
    std::vector<std::pair<int, double>> entries;  // sorted by column
    double b = 0.0;
};

}  // namespace

Presolved presolve(const ConicProgram& program) {
    program.validate();
    const int n = program.n_total();
    const int p = static_cast<int>(program.A.rows());

    Presolved pre;
    pre.fixed_value.assign(program.n_free, std::numeric_limits<double>::quiet_NaN());

    // Row-wise copy of A.
    std::vector<Row> rows(p);
    for (int j = 0; j < program.A.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(program.A, j); it; ++it)
            if (it.value() != 0.0) rows[it.row()].entries.emplace_back(j, it.value());
    for (int r = 0; r < p; ++r) {
        std::sort(rows[r].entries.begin(), rows[r].entries.end());
        rows[r].b = program.b(r);
    }

    const double zero_tol =
        1e-14 * std::max(1.0, program.b.size() > 0 ? program.b.cwiseAbs().maxCoeff() : 0.0);
    std::vector<bool> row_dead(p, false);

    // Fix variables pinned by singleton rows on the free block, folding the
    // fixed values into the right-hand side. Repeat until stable since each
    // fold may expose new singletons.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r = 0; r < p; ++r) {
            if (row_dead[r] || rows[r].entries.size() != 1) continue;
            const auto [col, val] = rows[r].entries.front();
            if (col >= program.n_free) continue;  // keep cone columns in the solver
            const double value = rows[r].b / val;
            if (!std::isnan(pre.fixed_value[col])) {
                if (std::abs(pre.fixed_value[col] - value) >
                    1e-10 * std::max(1.0, std::abs(value))) {
                    pre.infeasible = true;
                    pre.message = "presolve: conflicting fixed values for variable " +
                                  std::to_string(col);
                    return pre;
                }
                rows[r].entries.clear();
                row_dead[r] = true;
                continue;
            }
            pre.fixed_value[col] = value;
            pre.obj_offset += program.c(col) * value;
            rows[r].entries.clear();
            row_dead[r] = true;
            changed = true;
            for (int r2 = 0; r2 < p; ++r2) {
                if (row_dead[r2]) continue;
                auto& e = rows[r2].entries;
                auto it = std::lower_bound(e.begin(), e.end(), std::make_pair(col, -1e300));
                if (it != e.end() && it->first == col) {
                    rows[r2].b -= it->second * value;
                    e.erase(it);
                }
            }
        }
    }

    // Empty rows must have a (numerically) zero right-hand side.
    for (int r = 0; r < p; ++r) {
        if (row_dead[r] || !rows[r].entries.empty()) continue;
        if (std::abs(rows[r].b) > zero_tol) {
            pre.infeasible = true;
            pre.message = "presolve: zero row " + std::to_string(r) +
                          " with nonzero right-hand side";
            return pre;
        }
        row_dead[r] = true;
    }

    // Drop exact duplicate rows; conflicting right-hand sides are infeasible.
    std::map<std::vector<std::pair<int, double>>, int> seen;
    for (int r = 0; r < p; ++r) {
        if (row_dead[r]) continue;
        auto [it, inserted] = seen.try_emplace(rows[r].entries, r);
        if (inserted) continue;
        const int first = it->second;
        if (std::abs(rows[first].b - rows[r].b) >
            1e-12 * std::max(1.0, std::abs(rows[first].b))) {
            pre.infeasible = true;
            pre.message = "presolve: duplicate rows " + std::to_string(first) + " and " +
                          std::to_string(r) + " with conflicting right-hand sides";
            return pre;
        }
        row_dead[r] = true;
    }

    // Column compaction: kept free columns first, cone columns always kept.
    std::vector<int> col_map(n, -1);
    for (int j = 0; j < program.n_free; ++j) {
        if (!std::isnan(pre.fixed_value[j])) continue;
        col_map[j] = static_cast<int>(pre.kept_cols.size());
        pre.kept_cols.push_back(j);
    }
    const int n_free_red = static_cast<int>(pre.kept_cols.size());
    for (int j = program.n_free; j < n; ++j)
        col_map[j] = n_free_red + (j - program.n_free);

    for (int r = 0; r < p; ++r)
        if (!row_dead[r]) pre.kept_rows.push_back(r);
    const int p_red = static_cast<int>(pre.kept_rows.size());

    ConicProgram& red = pre.program;
    red.n_free = n_free_red;
    red.cones = program.cones;
    red.c.resize(n_free_red + program.cone_total());
    for (int j = 0; j < n; ++j)
        if (col_map[j] >= 0) red.c(col_map[j]) = program.c(j);

    // Scale each kept row to unit infinity norm.
    pre.row_scale = Eigen::VectorXd::Ones(p_red);
    red.b.resize(p_red);
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < p_red; ++r) {
        const Row& row = rows[pre.kept_rows[r]];
        double amax = 0.0;
        for (const auto& [col, val] : row.entries) amax = std::max(amax, std::abs(val));
        const double f = 1.0 / amax;
        pre.row_scale(r) = f;
        red.b(r) = f * row.b;
        for (const auto& [col, val] : row.entries)
            trip.emplace_back(r, col_map[col], f * val);
    }
    red.A.resize(p_red, red.n_total());
    red.A.setFromTriplets(trip.begin(), trip.end());
    return pre;
}

Eigen::VectorXd restore_primal(const Presolved& pre, const Eigen::VectorXd& x_reduced) {
    const int n_free = static_cast<int>(pre.fixed_value.size());
    const int cone_total = pre.program.cone_total();
    Eigen::VectorXd x(n_free + cone_total);
    for (int j = 0; j < n_free; ++j)
        x(j) = std::isnan(pre.fixed_value[j])
                   ? 0.0
                   : pre.fixed_value[j];
    for (std::size_t k = 0; k < pre.kept_cols.size(); ++k)
        x(pre.kept_cols[k]) = x_reduced(static_cast<int>(k));
    x.tail(cone_total) = x_reduced.tail(cone_total);
    return x;
}

}  // namespace limitql
