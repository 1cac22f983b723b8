#pragma once

#include <array>
#include <map>
#include <string>

#include "limitql/conic.hpp"
#include "limitql/smoothing.hpp"

namespace limitql {

// Plane-strain yield data in the compact two-parameter form: the strength
// condition per smoothing domain reads varsigma*lambda = m.d with
// lambda >= |deviatoric strain|, dissipation kappa * area * lambda.
struct MaterialModel {
    double cohesion = 0.0;
    double phi = 0.0;       // friction angle, radians
    double varsigma = 0.0;  // sin(phi)
    double kappa = 0.0;     // cohesion * cos(phi)
};

MaterialModel mohr_coulomb(double cohesion, double phi);
MaterialModel von_mises(double sigma_y);

struct DirichletBC {
    std::array<bool, 2> fix{false, false};
    std::array<double, 2> value{0.0, 0.0};

    static DirichletBC fix_both(double vx = 0.0, double vy = 0.0) {
        return {{true, true}, {vx, vy}};
    }
    static DirichletBC fix_x(double vx = 0.0) { return {{true, false}, {vx, 0.0}}; }
    static DirichletBC fix_y(double vy = 0.0) { return {{false, true}, {0.0, vy}}; }
};

struct LoadCase {
    std::map<std::string, Vec2> tractions;  // boundary group -> traction vector
    Vec2 body_force{0.0, 0.0};
    std::map<std::string, DirichletBC> dirichlet;
};

// Assembled conic form of the collapse-load problem plus the bookkeeping
// needed to map solver output back onto the mesh.
struct LimitProblem {
    ConicProgram program;
    std::vector<int> free_index;   // full velocity DOF -> free column, -1 if fixed
    Eigen::VectorXd fixed_values;  // full velocity DOF -> prescribed value (0 if free)
    Eigen::VectorXd f_ext;         // external work vector over all velocity DOFs
    std::vector<SmoothingDomain> domains;
    double kappa = 0.0;

    int n_free_dofs() const { return program.n_free; }
    int n_cones() const { return static_cast<int>(program.cones.size()); }
};

struct CollapseResult {
    double alpha_plus = 0.0;
    Eigen::VectorXd velocities;  // full DOF vector including Dirichlet values
    Eigen::VectorXd lambda;      // per smoothing domain
    Eigen::VectorXd dissipation_density;  // kappa * lambda per domain
    SolveStatus status = SolveStatus::numerical;
    double gap = 0.0;
    int iterations = 0;
};

// Work vector of the applied loads: f_ext . d equals the external work rate
// of the velocity field d. Tractions integrate the linear edge traces;
// bubbles vanish on element boundaries and only see the body force.
Eigen::VectorXd external_work_vector(const ConformingMesh& mesh, const LoadCase& load);

LimitProblem assemble(const ConformingMesh& mesh, const MaterialModel& material,
                      const LoadCase& load);

CollapseResult recover(const LimitProblem& problem, const SolveReport& report);

// Assemble + solve + recover in one call.
CollapseResult solve_collapse(const ConformingMesh& mesh, const MaterialModel& material,
                              const LoadCase& load, const SolveOptions& opts = {});

}  // namespace limitql
