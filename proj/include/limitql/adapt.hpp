#pragma once

#include "limitql/problem.hpp"

namespace limitql {

struct IndicatorField {
    Eigen::VectorXd edge_theta;     // L2 strain-rate norm per smoothing domain
    Eigen::VectorXd element_theta;  // mean of the element's side indicators
    double total = 0.0;             // sum of element indicators
};

// Strain-rate L2 norm per smoothing domain: the smoothed strain is constant
// there, so the norm is sqrt(area * (e11^2 + e22^2 + 2*e12^2)).
Eigen::VectorXd edge_indicator(const CollapseResult& result,
                               const std::vector<SmoothingDomain>& domains,
                               const ConformingMesh& mesh);

Eigen::VectorXd element_indicator(const Eigen::VectorXd& edge_theta,
                                  const ConformingMesh& mesh);

IndicatorField compute_indicator(const CollapseResult& result,
                                 const std::vector<SmoothingDomain>& domains,
                                 const ConformingMesh& mesh);

// Greedy bulk marking: smallest prefix of elements, sorted by indicator
// descending (ties by ascending id), whose sum reaches theta * total.
// Returns an empty set when the total vanishes.
std::vector<int> mark(const Eigen::VectorXd& element_theta, double theta);

// Expand a marked element set until no marked element has a coarser
// (lower-level) unmarked neighbor, so the refined mesh keeps neighbor level
// differences at one. Steep level jumps are still conforming here, but they
// degrade the smoothed dissipation badly enough to sink the load factor
// below its reference bracket.
std::vector<int> grade_marking(const ConformingMesh& mesh, const QuadtreeForest& forest,
                               std::vector<int> marked);

struct AdaptOptions {
    int n_iter = 5;
    double theta = 0.7;
    SolveOptions solver;
    bool grade = true;             // apply grade_marking before refining
    bool early_stop = false;       // stop when alpha stagnates
    double early_tol = 1e-4;
};

struct AdaptRecord {
    int iteration = 0;  // 1-based
    int n_elements = 0;
    int n_smoothing = 0;
    int n_var = 0;      // velocity DOFs (incl. prescribed) + cone variables
    double alpha_plus = 0.0;
    double indicator_total = 0.0;
    double solve_seconds = 0.0;
    CollapseResult result;
    ConformingMesh mesh;
};

struct AdaptRun {
    std::vector<AdaptRecord> history;
    SolveStatus final_status = SolveStatus::numerical;
    std::string message;  // set when the loop aborts or stops early

    const AdaptRecord& final_record() const {
        if (history.empty()) throw Error("adaptive run has no completed iterations");
        return history.back();
    }
};

// Outer solve-estimate-mark-refine loop. The forest carries its boundary
// tags, so boundary conditions reattach to every refined mesh.
AdaptRun adaptive_loop(QuadtreeForest forest, const MaterialModel& material,
                       const LoadCase& load, const AdaptOptions& opts = {});

}  // namespace limitql
