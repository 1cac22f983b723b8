#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "limitql/geometry.hpp"

namespace limitql {

// Standard-form conic program:
//   min c'x   s.t.  A x = b,
// with x = (free block of size n_free, then one block per cone dim d,
// each constrained by x0 >= ||x1..d-1||).
struct ConicProgram {
    int n_free = 0;
    std::vector<int> cones;
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;

    int cone_total() const {
        int t = 0;
        for (const int d : cones) t += d;
        return t;
    }
    int n_total() const { return n_free + cone_total(); }

    void validate() const;
};

enum class SolveStatus { optimal, primal_infeasible, dual_infeasible, max_iter, numerical };

std::string to_string(SolveStatus status);

struct SolveOptions {
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iter = 200;
    bool presolve = true;
    bool verbose = false;
};

struct SolveReport {
    SolveStatus status = SolveStatus::numerical;
    Eigen::VectorXd x;       // primal solution, full variable vector
    Eigen::VectorXd y;       // equality multipliers
    Eigen::VectorXd z;       // cone duals (cone variables only)
    Eigen::VectorXd s;       // cone slacks (equal to the cone part of x)
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double gap = 0.0;
    double rel_gap = 0.0;
    double pres = 0.0;
    double dres = 0.0;
    int iterations = 0;
    double seconds = 0.0;
    std::string message;
};

SolveReport solve(const ConicProgram& program, const SolveOptions& opts = {});

// Interior-point solve without the presolve pass (mainly for testing).
SolveReport solve_direct(const ConicProgram& program, const SolveOptions& opts = {});

// Presolve: drops empty and duplicate equality rows, pins variables fixed by
// singleton rows, and equilibrates the remaining rows. The transform record
// restores solutions of the reduced program to the original space.
struct Presolved {
    ConicProgram program;
    bool infeasible = false;          // 0 = nonzero row detected
    std::string message;
    std::vector<int> kept_rows;       // reduced row -> original row
    std::vector<int> kept_cols;       // reduced free column -> original column
    std::vector<double> fixed_value;  // per original free column, NaN if kept
    Eigen::VectorXd row_scale;        // factor applied to kept rows of A and b
    double obj_offset = 0.0;          // objective contribution of fixed variables
};

Presolved presolve(const ConicProgram& program);

Eigen::VectorXd restore_primal(const Presolved& pre, const Eigen::VectorXd& x_reduced);

}  // namespace limitql
