#pragma once

#include <iosfwd>
#include <optional>

#include "limitql/bench.hpp"

namespace limitql {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

// Reads LIMITQL_LOG (quiet | info | debug); unset means info. Unknown
// values throw so typos do not silently mute a run.
LogLevel log_level();

struct ExportToggles {
    bool mesh_json = true;
    bool vtk = true;
    bool csv = true;
    bool dissipation = true;
};

// One fully-described run: either a named built-in benchmark or an inline
// domain with its own material and loads.
struct RunConfig {
    std::string benchmark;  // footing | slope | two_holes; empty = inline domain
    double phi_degrees = 0.0;

    std::optional<DomainSpec> domain;
    std::optional<MaterialModel> material;  // required inline, overrides benchmarks
    std::optional<LoadCase> load;           // inline domains only

    double theta = 0.7;
    int n_iter = 5;
    SolveOptions solver;
    std::string out_dir = ".";
    ExportToggles exports;
};

// Parses and validates a config document; unknown keys anywhere are
// rejected and every diagnostic names the offending field.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Materializes the problem a config describes.
Benchmark make_benchmark(const RunConfig& config);

// Mesh round-trip: the import reproduces every field bit-for-bit.
void write_mesh_json(const ConformingMesh& mesh, const std::string& path);
ConformingMesh read_mesh_json(const std::string& path);

// Conic program round-trip for direct solver access.
void write_program_json(const ConicProgram& program, const std::string& path);
ConicProgram read_program_json(const std::string& path);

// Legacy-VTK polygon export of the mesh elements.
void export_mesh_vtk(const ConformingMesh& mesh, const std::string& path);

// Legacy-VTK export of the dissipation density kappa*lambda as cell data,
// one polygon per smoothing domain (edge endpoints joined to the incident
// element centroids).
void export_dissipation(const CollapseResult& result,
                        const std::vector<SmoothingDomain>& domains,
                        const ConformingMesh& mesh, const std::string& path);

// Per-iteration history table. Fixed header
// iter,n_elements,n_s,N_var,alpha_plus,Theta,solve_seconds
// with values at 17 significant digits.
void write_history_csv(const AdaptRun& run, const std::string& path);

void write_summary_json(const AdaptRun& run, const ReferenceValue& reference,
                        const std::string& path);

// Executes a parsed config end to end and writes its artifacts.
// Returns 0 on success, 3 when the solver fails (partial artifacts remain).
int execute_run(const RunConfig& config);

// Full command-line front end (run | export | solve-conic).
// Returns 0 success, 2 invalid usage/config, 3 solver failure.
int run_cli(int argc, const char* const* argv);

}  // namespace limitql
