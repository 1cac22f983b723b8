#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "limitql/io.hpp"

namespace limitql {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void reject_unknown_keys(const json& j, const std::string& ctx,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw Error("config: unknown key '" + key + "' in " + ctx);
    }
}

double number_at(const json& j, const std::string& ctx, const char* key,
                 std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw Error("config: missing field '" + std::string(key) + "' in " + ctx);
    }
    if (!j.at(key).is_number())
        throw Error("config: field '" + std::string(key) + "' in " + ctx +
                    " must be a number");
    return j.at(key).get<double>();
}

Vec2 vec2_at(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error("config: " + ctx + " must be a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

MaterialModel parse_material(const json& j) {
    reject_unknown_keys(j, "material", {"c", "phi_degrees", "sigma_y"});
    if (j.contains("sigma_y")) {
        if (j.contains("c") || j.contains("phi_degrees"))
            throw Error("config: material takes either sigma_y or {c, phi_degrees}");
        return von_mises(number_at(j, "material", "sigma_y"));
    }
    return mohr_coulomb(number_at(j, "material", "c"),
                        number_at(j, "material", "phi_degrees", 0.0) * kDeg);
}

DomainSpec parse_domain(const json& j) {
    reject_unknown_keys(j, "domain", {"patches", "snap", "max_level"});
    DomainSpec spec;
    if (!j.contains("patches") || !j.at("patches").is_array() || j.at("patches").empty())
        throw Error("config: domain needs a non-empty 'patches' array");
    for (const auto& pj : j.at("patches")) {
        reject_unknown_keys(pj, "patch", {"corners", "nx", "ny", "sides"});
        Patch p;
        const auto& cj = pj.contains("corners") ? pj.at("corners") : json();
        if (!cj.is_array() || cj.size() != 4)
            throw Error("config: patch 'corners' must list four [x, y] pairs");
        for (int s = 0; s < 4; ++s) p.corner[s] = vec2_at(cj[s], "patch corner");
        p.nx = static_cast<int>(number_at(pj, "patch", "nx", 1.0));
        p.ny = static_cast<int>(number_at(pj, "patch", "ny", 1.0));
        if (pj.contains("sides")) {
            const auto& sj = pj.at("sides");
            if (!sj.is_array() || sj.size() != 4)
                throw Error("config: patch 'sides' must list four side entries");
            for (int s = 0; s < 4; ++s) {
                reject_unknown_keys(sj[s], "patch side", {"tag", "arc"});
                if (sj[s].contains("tag")) p.side[s].tag = sj[s].at("tag").get<std::string>();
                if (sj[s].contains("arc")) p.side[s].arc = sj[s].at("arc").get<bool>();
            }
        }
        spec.patches.push_back(p);
    }
    if (j.contains("snap")) {
        for (const auto& [name, cj] : j.at("snap").items()) {
            reject_unknown_keys(cj, "snap circle", {"center", "radius"});
            CircleSnap circle;
            circle.center = vec2_at(cj.at("center"), "snap center");
            circle.radius = number_at(cj, "snap circle", "radius");
            if (!(circle.radius > 0.0))
                throw Error("config: snap circle '" + name + "' needs a positive radius");
            spec.snap[name] = circle;
        }
    }
    if (j.contains("max_level"))
        spec.max_level = static_cast<int>(number_at(j, "domain", "max_level"));
    return spec;
}

LoadCase parse_load(const json& j) {
    reject_unknown_keys(j, "load", {"tractions", "body_force", "dirichlet"});
    LoadCase load;
    if (j.contains("tractions"))
        for (const auto& [group, g] : j.at("tractions").items())
            load.tractions[group] = vec2_at(g, "traction '" + group + "'");
    if (j.contains("body_force"))
        load.body_force = vec2_at(j.at("body_force"), "body_force");
    if (j.contains("dirichlet")) {
        for (const auto& [group, bj] : j.at("dirichlet").items()) {
            reject_unknown_keys(bj, "dirichlet '" + group + "'", {"fix", "value"});
            DirichletBC bc;
            const auto& fj = bj.contains("fix") ? bj.at("fix") : json();
            if (!fj.is_array() || fj.size() != 2)
                throw Error("config: dirichlet '" + group +
                            "' needs 'fix' as a [bool, bool] pair");
            for (int c = 0; c < 2; ++c) bc.fix[c] = fj[c].get<bool>();
            if (bj.contains("value")) {
                const Vec2 v = vec2_at(bj.at("value"), "dirichlet value");
                bc.value = {v.x, v.y};
            }
            load.dirichlet[group] = bc;
        }
    }
    return load;
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io: cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.good()) throw Error("io: short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void log_line(LogLevel min_level, const std::string& text) {
    if (log_level() >= min_level) std::fprintf(stderr, "%s\n", text.c_str());
}

}  // namespace

LogLevel log_level() {
    const char* env = std::getenv("LIMITQL_LOG");
    if (env == nullptr) return LogLevel::info;
    const std::string v(env);
    if (v == "quiet") return LogLevel::quiet;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    throw Error("LIMITQL_LOG must be one of quiet, info, debug");
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw Error("config: document must be a JSON object");
    reject_unknown_keys(j, "config",
                        {"benchmark", "phi_degrees", "domain", "material", "load", "theta",
                         "n_iter", "solver", "out_dir", "exports"});

    RunConfig cfg;
    if (j.contains("benchmark")) cfg.benchmark = j.at("benchmark").get<std::string>();
    cfg.phi_degrees = number_at(j, "config", "phi_degrees", 0.0);
    if (j.contains("domain")) cfg.domain = parse_domain(j.at("domain"));
    if (j.contains("material")) cfg.material = parse_material(j.at("material"));
    if (j.contains("load")) cfg.load = parse_load(j.at("load"));

    if (cfg.benchmark.empty() == !cfg.domain.has_value())
        throw Error("config: give exactly one of 'benchmark' or 'domain'");
    if (cfg.domain && (!cfg.material || !cfg.load))
        throw Error("config: inline domains need 'material' and 'load'");

    cfg.theta = number_at(j, "config", "theta", cfg.theta);
    if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
        throw Error("config: theta must be in (0,1)");
    cfg.n_iter = static_cast<int>(number_at(j, "config", "n_iter", cfg.n_iter));
    if (cfg.n_iter < 1) throw Error("config: n_iter must be >= 1");

    if (j.contains("solver")) {
        const auto& sj = j.at("solver");
        reject_unknown_keys(sj, "solver", {"feas_tol", "gap_tol", "max_iter"});
        cfg.solver.feas_tol = number_at(sj, "solver", "feas_tol", cfg.solver.feas_tol);
        cfg.solver.gap_tol = number_at(sj, "solver", "gap_tol", cfg.solver.gap_tol);
        cfg.solver.max_iter =
            static_cast<int>(number_at(sj, "solver", "max_iter", cfg.solver.max_iter));
        if (!(cfg.solver.feas_tol > 0.0) || !(cfg.solver.gap_tol > 0.0))
            throw Error("config: solver tolerances must be positive");
    }
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("exports")) {
        const auto& ej = j.at("exports");
        reject_unknown_keys(ej, "exports", {"mesh_json", "vtk", "csv", "dissipation"});
        if (ej.contains("mesh_json")) cfg.exports.mesh_json = ej.at("mesh_json").get<bool>();
        if (ej.contains("vtk")) cfg.exports.vtk = ej.at("vtk").get<bool>();
        if (ej.contains("csv")) cfg.exports.csv = ej.at("csv").get<bool>();
        if (ej.contains("dissipation"))
            cfg.exports.dissipation = ej.at("dissipation").get<bool>();
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(slurp(path));
}

Benchmark make_benchmark(const RunConfig& config) {
    const double phi = config.phi_degrees * kDeg;
    Benchmark b;
    if (config.benchmark == "footing") {
        b = footing(phi);
    } else if (config.benchmark == "slope") {
        b = slope(phi);
    } else if (config.benchmark == "two_holes") {
        b = two_holes(phi);
    } else if (config.benchmark.empty()) {
        b.name = "custom";
        b.domain = *config.domain;
        b.forest = build_initial(b.domain);
        b.material = *config.material;
        b.load = *config.load;
        return b;
    } else {
        throw Error("config: unknown benchmark '" + config.benchmark +
                    "' (expected footing, slope or two_holes)");
    }
    if (config.material) {
        // A custom material invalidates the published reference value.
        b.material = *config.material;
        b.reference = ReferenceValue{};
    }
    return b;
}

void write_mesh_json(const ConformingMesh& mesh, const std::string& path) {
    json j;
    for (const auto& p : mesh.nodes) j["nodes"].push_back({p.x, p.y});
    j["elements"] = mesh.elements;
    for (const auto& e : mesh.edges)
        j["edges"].push_back({e.a, e.b, e.elem[0], e.elem[1], e.tag});
    j["element_edges"] = mesh.element_edges;
    j["areas"] = mesh.areas;
    for (const auto& p : mesh.centroids) j["centroids"].push_back({p.x, p.y});
    j["element_cell"] = mesh.element_cell;
    j["node_forest"] = mesh.node_forest;
    j["tag_names"] = mesh.tag_names;
    j["total_area"] = mesh.total_area;
    atomic_write(path, j.dump(1));
}

ConformingMesh read_mesh_json(const std::string& path) {
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw Error("mesh json: " + std::string(e.what()));
    }
    try {
        ConformingMesh mesh;
        for (const auto& p : j.at("nodes"))
            mesh.nodes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        mesh.elements = j.at("elements").get<std::vector<std::vector<int>>>();
        for (const auto& e : j.at("edges")) {
            ConformingMesh::Edge edge;
            edge.a = e.at(0).get<int>();
            edge.b = e.at(1).get<int>();
            edge.elem = {e.at(2).get<int>(), e.at(3).get<int>()};
            edge.tag = e.at(4).get<int>();
            mesh.edges.push_back(edge);
        }
        mesh.element_edges = j.at("element_edges").get<std::vector<std::vector<int>>>();
        mesh.areas = j.at("areas").get<std::vector<double>>();
        for (const auto& p : j.at("centroids"))
            mesh.centroids.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        mesh.element_cell = j.at("element_cell").get<std::vector<int>>();
        mesh.node_forest = j.at("node_forest").get<std::vector<int>>();
        mesh.tag_names = j.at("tag_names").get<std::vector<std::string>>();
        mesh.total_area = j.at("total_area").get<double>();
        if (mesh.element_edges.size() != mesh.elements.size() ||
            mesh.areas.size() != mesh.elements.size() ||
            mesh.centroids.size() != mesh.elements.size() ||
            mesh.element_cell.size() != mesh.elements.size() ||
            mesh.node_forest.size() != mesh.nodes.size())
            throw Error("mesh json: inconsistent array lengths");
        return mesh;
    } catch (const json::exception& e) {
        throw Error("mesh json: " + std::string(e.what()));
    }
}

void write_program_json(const ConicProgram& program, const std::string& path) {
    json j;
    j["n_free"] = program.n_free;
    j["cones"] = program.cones;
    j["c"] = std::vector<double>(program.c.data(), program.c.data() + program.c.size());
    j["b"] = std::vector<double>(program.b.data(), program.b.data() + program.b.size());
    j["A"]["rows"] = program.A.rows();
    j["A"]["cols"] = program.A.cols();
    auto& entries = j["A"]["entries"];
    entries = json::array();
    for (int k = 0; k < program.A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(program.A, k); it; ++it)
            entries.push_back({it.row(), it.col(), it.value()});
    atomic_write(path, j.dump(1));
}

ConicProgram read_program_json(const std::string& path) {
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw Error("program json: " + std::string(e.what()));
    }
    try {
        ConicProgram p;
        p.n_free = j.at("n_free").get<int>();
        p.cones = j.at("cones").get<std::vector<int>>();
        const auto c = j.at("c").get<std::vector<double>>();
        const auto b = j.at("b").get<std::vector<double>>();
        p.c = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<long>(c.size()));
        p.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<long>(b.size()));
        const auto& aj = j.at("A");
        std::vector<Eigen::Triplet<double>> trip;
        for (const auto& e : aj.at("entries"))
            trip.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(),
                              e.at(2).get<double>());
        p.A.resize(aj.at("rows").get<int>(), aj.at("cols").get<int>());
        p.A.setFromTriplets(trip.begin(), trip.end());
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw Error("program json: " + std::string(e.what()));
    }
}

void export_mesh_vtk(const ConformingMesh& mesh, const std::string& path) {
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\nconforming polygonal mesh\nASCII\n"
        << "DATASET POLYDATA\nPOINTS " << mesh.nodes.size() << " double\n";
    for (const auto& p : mesh.nodes)
        out << format_g17(p.x) << ' ' << format_g17(p.y) << " 0\n";
    std::size_t list_size = 0;
    for (const auto& e : mesh.elements) list_size += e.size() + 1;
    out << "POLYGONS " << mesh.elements.size() << ' ' << list_size << '\n';
    for (const auto& e : mesh.elements) {
        out << e.size();
        for (const int v : e) out << ' ' << v;
        out << '\n';
    }
    out << "CELL_DATA " << mesh.elements.size() << "\nSCALARS area double 1\n"
        << "LOOKUP_TABLE default\n";
    for (const double a : mesh.areas) out << format_g17(a) << '\n';
    atomic_write(path, out.str());
}

void export_dissipation(const CollapseResult& result,
                        const std::vector<SmoothingDomain>& domains,
                        const ConformingMesh& mesh, const std::string& path) {
    if (result.dissipation_density.size() != static_cast<Eigen::Index>(domains.size()))
        throw Error("export_dissipation: result does not match the domain list");

    // Points: mesh nodes followed by element centroids.
    const int n_nodes = static_cast<int>(mesh.nodes.size());
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\nplastic dissipation density\nASCII\n"
        << "DATASET POLYDATA\nPOINTS " << n_nodes + mesh.elements.size() << " double\n";
    for (const auto& p : mesh.nodes)
        out << format_g17(p.x) << ' ' << format_g17(p.y) << " 0\n";
    for (const auto& p : mesh.centroids)
        out << format_g17(p.x) << ' ' << format_g17(p.y) << " 0\n";

    std::vector<std::vector<int>> polys;
    polys.reserve(domains.size());
    std::size_t list_size = 0;
    for (const auto& dom : domains) {
        const auto& edge = mesh.edges[dom.edge];
        std::vector<int> poly;
        if (dom.parts.size() == 1) {
            poly = {edge.a, edge.b, n_nodes + dom.parts[0].elem};
        } else {
            poly = {edge.a, n_nodes + dom.parts[0].elem, edge.b,
                    n_nodes + dom.parts[1].elem};
        }
        // Orient counter-clockwise.
        std::vector<Vec2> pts;
        for (const int v : poly)
            pts.push_back(v < n_nodes ? mesh.nodes[v] : mesh.centroids[v - n_nodes]);
        if (polygon_area(pts) < 0.0) std::reverse(poly.begin(), poly.end());
        list_size += poly.size() + 1;
        polys.push_back(std::move(poly));
    }
    out << "POLYGONS " << polys.size() << ' ' << list_size << '\n';
    for (const auto& poly : polys) {
        out << poly.size();
        for (const int v : poly) out << ' ' << v;
        out << '\n';
    }
    out << "CELL_DATA " << polys.size() << "\nSCALARS dissipation double 1\n"
        << "LOOKUP_TABLE default\n";
    for (Eigen::Index k = 0; k < result.dissipation_density.size(); ++k)
        out << format_g17(result.dissipation_density(k)) << '\n';
    atomic_write(path, out.str());
}

void write_history_csv(const AdaptRun& run, const std::string& path) {
    std::ostringstream out;
    out << "iter,n_elements,n_s,N_var,alpha_plus,Theta,solve_seconds\n";
    for (const auto& rec : run.history) {
        out << rec.iteration << ',' << rec.n_elements << ',' << rec.n_smoothing << ','
            << rec.n_var << ',' << format_g17(rec.alpha_plus) << ','
            << format_g17(rec.indicator_total) << ',' << format_g17(rec.solve_seconds)
            << '\n';
    }
    atomic_write(path, out.str());
}

void write_summary_json(const AdaptRun& run, const ReferenceValue& reference,
                        const std::string& path) {
    json j;
    j["status"] = to_string(run.final_status);
    j["message"] = run.message;
    j["iterations"] = run.history.size();
    if (!run.history.empty()) {
        const auto& last = run.history.back();
        j["alpha_plus"] = last.alpha_plus;
        j["final_N_var"] = last.n_var;
        j["final_elements"] = last.n_elements;
    }
    if (reference.has_value()) {
        j["reference"] = {{"source", reference.source},
                          {"alpha_ref", reference.alpha_ref},
                          {"lower", reference.lower},
                          {"upper", reference.upper}};
        if (!run.history.empty())
            j["relative_error_vs_reference"] =
                (run.history.back().alpha_plus - reference.alpha_ref) /
                reference.alpha_ref;
    } else {
        j["reference"] = nullptr;
        j["relative_error_vs_reference"] = nullptr;
    }
    atomic_write(path, j.dump(1));
}

int execute_run(const RunConfig& config) {
    Benchmark b = make_benchmark(config);

    AdaptOptions opts;
    opts.n_iter = config.n_iter;
    opts.theta = config.theta;
    opts.solver = config.solver;
    if (log_level() == LogLevel::debug) opts.solver.verbose = true;

    log_line(LogLevel::info, "running " + b.name + " for " +
                                 std::to_string(config.n_iter) + " adaptive iterations");
    const AdaptRun run = adaptive_loop(b.forest, b.material, b.load, opts);

    const fs::path out(config.out_dir);
    fs::create_directories(out);
    if (config.exports.csv) write_history_csv(run, (out / "history.csv").string());
    if (config.exports.mesh_json)
        for (const auto& rec : run.history) {
            char name[32];
            std::snprintf(name, sizeof(name), "mesh_iter_%02d.json", rec.iteration);
            write_mesh_json(rec.mesh, (out / name).string());
        }
    for (const auto& rec : run.history)
        log_line(LogLevel::info,
                 "iter " + std::to_string(rec.iteration) + ": elements " +
                     std::to_string(rec.n_elements) + ", N_var " +
                     std::to_string(rec.n_var) + ", alpha " +
                     format_g17(rec.alpha_plus));

    if (!run.history.empty()) {
        const auto& last = run.history.back();
        if (config.exports.vtk)
            export_mesh_vtk(last.mesh, (out / "mesh_final.vtk").string());
        if (config.exports.dissipation && last.result.status == SolveStatus::optimal)
            export_dissipation(last.result, build_domains(last.mesh), last.mesh,
                               (out / "dissipation.vtk").string());
    }
    write_summary_json(run, b.reference, (out / "summary.json").string());

    if (run.final_status != SolveStatus::optimal) {
        log_line(LogLevel::info, "solver failed: " + run.message);
        return 3;
    }
    log_line(LogLevel::info, "alpha_plus = " + format_g17(run.final_record().alpha_plus));
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"adaptive quadtree limit analysis"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run a collapse-load analysis");
    std::string config_path, benchmark_name, out_dir;
    double phi = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    double tol = std::numeric_limits<double>::quiet_NaN();
    int iters = -1;
    run_cmd->add_option("--config", config_path, "JSON run configuration");
    run_cmd->add_option("--benchmark", benchmark_name, "footing | slope | two_holes");
    run_cmd->add_option("--phi", phi, "friction angle in degrees");
    run_cmd->add_option("--iters", iters, "adaptive iterations");
    run_cmd->add_option("--theta", theta, "marking fraction in (0,1)");
    run_cmd->add_option("--tol", tol, "solver feasibility/gap tolerance");
    run_cmd->add_option("--out", out_dir, "output directory");

    auto* export_cmd = app.add_subcommand("export", "convert a mesh JSON file to VTK");
    std::string mesh_path, vtk_path;
    export_cmd->add_option("--mesh", mesh_path, "mesh JSON input")->required();
    export_cmd->add_option("--vtk", vtk_path, "VTK output")->required();

    auto* solve_cmd = app.add_subcommand("solve-conic", "solve a conic program JSON file");
    std::string program_path, solution_path;
    solve_cmd->add_option("--in", program_path, "conic program JSON")->required();
    solve_cmd->add_option("--out", solution_path, "write the solution JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            RunConfig cfg;
            if (!config_path.empty()) cfg = load_run_config(config_path);
            if (!benchmark_name.empty()) cfg.benchmark = benchmark_name;
            if (!std::isnan(phi)) cfg.phi_degrees = phi;
            if (iters > 0) cfg.n_iter = iters;
            if (!std::isnan(theta)) cfg.theta = theta;
            if (!std::isnan(tol)) {
                cfg.solver.feas_tol = tol;
                cfg.solver.gap_tol = tol;
            }
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (cfg.benchmark.empty() && !cfg.domain)
                throw Error("config: give exactly one of 'benchmark' or 'domain'");
            if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
                throw Error("config: theta must be in (0,1)");
            if (cfg.n_iter < 1) throw Error("config: n_iter must be >= 1");
            if (!(cfg.solver.feas_tol > 0.0) || !(cfg.solver.gap_tol > 0.0))
                throw Error("config: solver tolerances must be positive");
            return execute_run(cfg);
        }
        if (export_cmd->parsed()) {
            export_mesh_vtk(read_mesh_json(mesh_path), vtk_path);
            return 0;
        }
        // solve-conic
        const ConicProgram program = read_program_json(program_path);
        const SolveReport report = solve(program);
        json j;
        j["status"] = to_string(report.status);
        j["primal_obj"] = report.primal_obj;
        j["dual_obj"] = report.dual_obj;
        j["gap"] = report.gap;
        j["iterations"] = report.iterations;
        std::printf("%s\n", j.dump(1).c_str());
        if (!solution_path.empty()) {
            j["x"] = std::vector<double>(report.x.data(), report.x.data() + report.x.size());
            j["y"] = std::vector<double>(report.y.data(), report.y.data() + report.y.size());
            atomic_write(solution_path, j.dump(1));
        }
        const bool resolved = report.status == SolveStatus::optimal ||
                              report.status == SolveStatus::primal_infeasible ||
                              report.status == SolveStatus::dual_infeasible;
        return resolved ? 0 : 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

}  // namespace limitql
