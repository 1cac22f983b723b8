#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "limitql/io.hpp"
#include "support.hpp"

using namespace limitql;
using namespace limitql::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / "limitql_io_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ConformingMesh refined_footing_mesh() {
    auto b = footing(0.0);
    refine(b.forest, {0, 3});
    refine(b.forest, {b.forest.cells[0].child[2]});
    return extract_conforming(b.forest);
}

struct LogGuard {
    std::string saved;
    bool had = false;
    LogGuard() {
        if (const char* env = std::getenv("LIMITQL_LOG")) {
            saved = env;
            had = true;
        }
    }
    ~LogGuard() {
        if (had)
            setenv("LIMITQL_LOG", saved.c_str(), 1);
        else
            unsetenv("LIMITQL_LOG");
    }
};

}  // namespace

TEST_CASE("config parsing applies defaults and overrides") {
    auto cfg = parse_run_config(R"({"benchmark": "footing"})");
    CHECK(cfg.benchmark == "footing");
    CHECK(cfg.phi_degrees == 0.0);
    CHECK(cfg.theta == 0.7);
    CHECK(cfg.n_iter == 5);
    CHECK(cfg.out_dir == ".");
    CHECK(cfg.exports.csv);
    CHECK(cfg.exports.dissipation);

    cfg = parse_run_config(R"({
        "benchmark": "slope", "phi_degrees": 35, "theta": 0.5, "n_iter": 3,
        "solver": {"feas_tol": 1e-9, "gap_tol": 1e-9, "max_iter": 50},
        "out_dir": "results", "exports": {"vtk": false, "mesh_json": false}
    })");
    CHECK(cfg.benchmark == "slope");
    CHECK(cfg.phi_degrees == 35.0);
    CHECK(cfg.theta == 0.5);
    CHECK(cfg.n_iter == 3);
    CHECK(cfg.solver.feas_tol == 1e-9);
    CHECK(cfg.solver.max_iter == 50);
    CHECK(cfg.out_dir == "results");
    CHECK(!cfg.exports.vtk);
    CHECK(!cfg.exports.mesh_json);
    CHECK(cfg.exports.csv);
}

TEST_CASE("config parsing rejects malformed documents with named fields") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"benchmark": "footing", "thetaa": 0.5})"),
                         doctest::Contains("unknown key 'thetaa'"), Error);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"benchmark": "footing", "theta": 1.5})"),
                         doctest::Contains("theta must be in (0,1)"), Error);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"benchmark": "footing", "theta": 0.0})"),
                         doctest::Contains("theta must be in (0,1)"), Error);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"benchmark": "footing", "n_iter": 0})"),
                         doctest::Contains("n_iter"), Error);
    CHECK_THROWS_AS(parse_run_config("{nonsense"), Error);
    CHECK_THROWS_WITH_AS(parse_run_config("[1, 2]"),
                         doctest::Contains("JSON object"), Error);
    // Exactly one of benchmark / domain.
    CHECK_THROWS_WITH_AS(parse_run_config("{}"),
                         doctest::Contains("'benchmark' or 'domain'"), Error);
    CHECK_THROWS_WITH_AS(
        parse_run_config(
            R"({"benchmark": "footing", "domain": {"patches": [
                {"corners": [[0,0],[1,0],[1,1],[0,1]]}]},
                "material": {"c": 1}, "load": {"body_force": [0,-1]}})"),
        doctest::Contains("'benchmark' or 'domain'"), Error);
    // Inline domains need material and load.
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"domain": {"patches": [
            {"corners": [[0,0],[1,0],[1,1],[0,1]]}]}})"),
        doctest::Contains("'material' and 'load'"), Error);
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"benchmark": "footing",
                             "solver": {"feas_tol": -1}})"),
        doctest::Contains("tolerances must be positive"), Error);
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"benchmark": "footing", "phi_degrees": "ten"})"),
        doctest::Contains("'phi_degrees'"), Error);
}

TEST_CASE("inline domain configs materialize into solvable problems") {
    const std::string text = R"({
        "domain": {
            "patches": [{
                "corners": [[0,0],[2.5,0],[2.5,1],[0,1]],
                "nx": 5, "ny": 2,
                "sides": [{"tag": "bottom"}, {"tag": "right"},
                          {"tag": "top"}, {"tag": "left"}]
            }]
        },
        "material": {"c": 1.0, "phi_degrees": 0},
        "load": {
            "tractions": {"top": [0, -1]},
            "dirichlet": {
                "left": {"fix": [true, false]},
                "bottom": {"fix": [true, true]}
            }
        },
        "n_iter": 1
    })";
    auto cfg = parse_run_config(text);
    auto b = make_benchmark(cfg);
    CHECK(b.name == "custom");
    CHECK(b.forest.leaf_count() == 10);
    CHECK(!b.reference.has_value());

    auto mesh = extract_conforming(b.forest);
    auto res = solve_collapse(mesh, b.material, b.load);
    REQUIRE(res.status == SolveStatus::optimal);
    // The whole top face is loaded and the right face is free, so the
    // incompressible material escapes sideways at a finite load factor.
    CHECK(res.alpha_plus > 1.0);
    CHECK(res.alpha_plus < 2.0 + std::numbers::pi);
}

TEST_CASE("named benchmarks resolve and material overrides drop the reference") {
    auto cfg = parse_run_config(R"({"benchmark": "footing", "phi_degrees": 20})");
    auto b = make_benchmark(cfg);
    CHECK(b.name == "footing");
    CHECK(b.reference.has_value());

    cfg = parse_run_config(
        R"({"benchmark": "footing", "phi_degrees": 20, "material": {"c": 2.0}})");
    b = make_benchmark(cfg);
    CHECK(b.material.cohesion == 2.0);
    CHECK(!b.reference.has_value());

    cfg.benchmark = "wedge";
    CHECK_THROWS_WITH_AS(make_benchmark(cfg), doctest::Contains("unknown benchmark"),
                         Error);
}

TEST_CASE("mesh json round-trips every field exactly") {
    const auto dir = temp_dir("mesh_roundtrip");
    const auto mesh = refined_footing_mesh();
    const auto path = (dir / "mesh.json").string();
    write_mesh_json(mesh, path);
    const auto back = read_mesh_json(path);

    REQUIRE(back.nodes.size() == mesh.nodes.size());
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
        CHECK(back.nodes[v].x == mesh.nodes[v].x);
        CHECK(back.nodes[v].y == mesh.nodes[v].y);
    }
    CHECK(back.elements == mesh.elements);
    REQUIRE(back.edges.size() == mesh.edges.size());
    for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
        CHECK(back.edges[k].a == mesh.edges[k].a);
        CHECK(back.edges[k].b == mesh.edges[k].b);
        CHECK(back.edges[k].elem == mesh.edges[k].elem);
        CHECK(back.edges[k].tag == mesh.edges[k].tag);
    }
    CHECK(back.element_edges == mesh.element_edges);
    CHECK(back.areas == mesh.areas);
    for (std::size_t e = 0; e < mesh.centroids.size(); ++e) {
        CHECK(back.centroids[e].x == mesh.centroids[e].x);
        CHECK(back.centroids[e].y == mesh.centroids[e].y);
    }
    CHECK(back.element_cell == mesh.element_cell);
    CHECK(back.node_forest == mesh.node_forest);
    CHECK(back.tag_names == mesh.tag_names);
    CHECK(back.total_area == mesh.total_area);

    // A second write of the re-read mesh is byte-identical.
    const auto path2 = (dir / "mesh2.json").string();
    write_mesh_json(back, path2);
    CHECK(slurp(path) == slurp(path2));

    CHECK_THROWS_AS(read_mesh_json((dir / "missing.json").string()), Error);
    std::ofstream(dir / "broken.json") << "{\"nodes\": [[0";
    CHECK_THROWS_AS(read_mesh_json((dir / "broken.json").string()), Error);
}

TEST_CASE("conic program json round-trips and solves identically") {
    const auto dir = temp_dir("program_roundtrip");
    auto b = footing(0.0);
    const auto mesh = extract_conforming(b.forest);
    const auto lp = assemble(mesh, b.material, b.load);

    const auto path = (dir / "program.json").string();
    write_program_json(lp.program, path);
    const auto back = read_program_json(path);

    CHECK(back.n_free == lp.program.n_free);
    CHECK(back.cones == lp.program.cones);
    CHECK((back.c - lp.program.c).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((back.b - lp.program.b).lpNorm<Eigen::Infinity>() == 0.0);
    const Eigen::SparseMatrix<double> diff = back.A - lp.program.A;
    CHECK(Eigen::MatrixXd(diff).lpNorm<Eigen::Infinity>() == 0.0);

    const auto ra = solve(lp.program);
    const auto rb = solve(back);
    REQUIRE(ra.status == SolveStatus::optimal);
    REQUIRE(rb.status == SolveStatus::optimal);
    CHECK(ra.primal_obj == rb.primal_obj);
}

TEST_CASE("history csv has the fixed schema and full precision") {
    const auto dir = temp_dir("csv");
    auto b = footing(0.0);
    AdaptOptions opts;
    opts.n_iter = 2;
    const auto run = adaptive_loop(b.forest, b.material, b.load, opts);
    REQUIRE(run.history.size() == 2);

    const auto path = (dir / "history.csv").string();
    write_history_csv(run, path);
    std::istringstream in(slurp(path));
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "iter,n_elements,n_s,N_var,alpha_plus,Theta,solve_seconds");
    for (const auto& rec : run.history) {
        REQUIRE(std::getline(in, line));
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        CHECK(std::stoi(cells[0]) == rec.iteration);
        CHECK(std::stoi(cells[1]) == rec.n_elements);
        CHECK(std::stoi(cells[2]) == rec.n_smoothing);
        CHECK(std::stoi(cells[3]) == rec.n_var);
        // 17 significant digits reproduce the doubles exactly.
        CHECK(std::stod(cells[4]) == rec.alpha_plus);
        CHECK(std::stod(cells[5]) == rec.indicator_total);
        CHECK(std::stod(cells[6]) == rec.solve_seconds);
    }
    CHECK(!std::getline(in, line));
}

TEST_CASE("mesh vtk export lists every polygon") {
    const auto dir = temp_dir("mesh_vtk");
    const auto mesh = refined_footing_mesh();
    const auto path = (dir / "mesh.vtk").string();
    export_mesh_vtk(mesh, path);
    const auto text = slurp(path);
    CHECK(text.find("# vtk DataFile Version 3.0") == 0);
    CHECK(text.find("POINTS " + std::to_string(mesh.nodes.size()) + " double") !=
          std::string::npos);
    CHECK(text.find("POLYGONS " + std::to_string(mesh.elements.size()) + " ") !=
          std::string::npos);
    CHECK(text.find("CELL_DATA " + std::to_string(mesh.elements.size())) !=
          std::string::npos);
}

TEST_CASE("dissipation export writes one ccw polygon per smoothing domain") {
    const auto dir = temp_dir("dissipation");
    const auto mesh = refined_footing_mesh();
    const auto domains = build_domains(mesh);
    const int n_s = static_cast<int>(domains.size());

    CollapseResult zero;
    zero.status = SolveStatus::optimal;
    zero.dissipation_density = Eigen::VectorXd::Zero(n_s);
    const auto path = (dir / "dissipation.vtk").string();
    export_dissipation(zero, domains, mesh, path);

    std::istringstream in(slurp(path));
    std::string word;
    int n_points = 0, n_polys = 0;
    std::vector<Vec2> points;
    std::vector<std::vector<int>> polys;
    while (in >> word) {
        if (word == "POINTS") {
            in >> n_points >> word;
            points.resize(n_points);
            double z;
            for (auto& p : points) in >> p.x >> p.y >> z;
        } else if (word == "POLYGONS") {
            std::size_t list;
            in >> n_polys >> list;
            for (int k = 0; k < n_polys; ++k) {
                int nv;
                in >> nv;
                std::vector<int> poly(nv);
                for (auto& v : poly) in >> v;
                polys.push_back(poly);
            }
        }
    }
    CHECK(n_points == static_cast<int>(mesh.nodes.size() + mesh.elements.size()));
    REQUIRE(n_polys == n_s);

    double covered = 0.0;
    for (const auto& poly : polys) {
        std::vector<Vec2> pts;
        for (const int v : poly) pts.push_back(points[v]);
        const double area = polygon_area(pts);
        CHECK(area > 0.0);  // counter-clockwise
        covered += area;
    }
    // The domains tile the mesh.
    CHECK(covered == doctest::Approx(mesh.total_area).epsilon(1e-12));

    // Zero velocities give an all-zero scalar field.
    const auto text = slurp(path);
    const auto tab = text.find("LOOKUP_TABLE default\n");
    REQUIRE(tab != std::string::npos);
    std::istringstream scalars(text.substr(tab + 21));
    double v;
    int count = 0;
    while (scalars >> v) {
        CHECK(v == 0.0);
        ++count;
    }
    CHECK(count == n_s);

    CollapseResult mismatched;
    mismatched.dissipation_density = Eigen::VectorXd::Zero(n_s + 1);
    CHECK_THROWS_AS(export_dissipation(mismatched, domains, mesh, path), Error);
}

TEST_CASE("log level reads LIMITQL_LOG and rejects typos") {
    LogGuard guard;
    unsetenv("LIMITQL_LOG");
    CHECK(log_level() == LogLevel::info);
    setenv("LIMITQL_LOG", "quiet", 1);
    CHECK(log_level() == LogLevel::quiet);
    setenv("LIMITQL_LOG", "debug", 1);
    CHECK(log_level() == LogLevel::debug);
    setenv("LIMITQL_LOG", "verbose", 1);
    CHECK_THROWS_AS(log_level(), Error);
}

TEST_CASE("execute_run writes the full artifact set deterministically") {
    LogGuard guard;
    setenv("LIMITQL_LOG", "quiet", 1);
    const auto dir = temp_dir("run");
    RunConfig cfg;
    cfg.benchmark = "footing";
    cfg.n_iter = 2;

    cfg.out_dir = (dir / "a").string();
    REQUIRE(execute_run(cfg) == 0);
    for (const char* name : {"history.csv", "summary.json", "mesh_final.vtk",
                             "dissipation.vtk", "mesh_iter_01.json", "mesh_iter_02.json"})
        CHECK(fs::exists(dir / "a" / name));
    CHECK(!fs::exists(dir / "a" / "history.csv.tmp"));

    cfg.out_dir = (dir / "b").string();
    REQUIRE(execute_run(cfg) == 0);
    // Everything except the wall-clock column reruns bit-identically.
    auto strip_seconds = [](const std::string& text) {
        std::istringstream in(text);
        std::string line, kept;
        while (std::getline(in, line)) kept += line.substr(0, line.rfind(',')) + '\n';
        return kept;
    };
    CHECK(strip_seconds(slurp(dir / "a" / "history.csv")) ==
          strip_seconds(slurp(dir / "b" / "history.csv")));
    CHECK(slurp(dir / "a" / "mesh_iter_02.json") == slurp(dir / "b" / "mesh_iter_02.json"));
    CHECK(slurp(dir / "a" / "dissipation.vtk") == slurp(dir / "b" / "dissipation.vtk"));

    // Toggles suppress their artifacts.
    cfg.out_dir = (dir / "c").string();
    cfg.exports.mesh_json = false;
    cfg.exports.vtk = false;
    REQUIRE(execute_run(cfg) == 0);
    CHECK(fs::exists(dir / "c" / "history.csv"));
    CHECK(!fs::exists(dir / "c" / "mesh_iter_01.json"));
    CHECK(!fs::exists(dir / "c" / "mesh_final.vtk"));
}

TEST_CASE("cli front end maps outcomes to exit codes") {
    LogGuard guard;
    setenv("LIMITQL_LOG", "quiet", 1);
    const auto dir = temp_dir("cli");

    auto call = [](std::initializer_list<const char*> args) {
        std::vector<const char*> argv(args);
        return run_cli(static_cast<int>(argv.size()), argv.data());
    };

    const std::string out = (dir / "run").string();
    CHECK(call({"limitql", "run", "--benchmark", "footing", "--iters", "1", "--out",
                out.c_str()}) == 0);
    CHECK(fs::exists(dir / "run" / "summary.json"));

    const std::string mesh = (dir / "run" / "mesh_iter_01.json").string();
    const std::string vtk = (dir / "mesh.vtk").string();
    CHECK(call({"limitql", "export", "--mesh", mesh.c_str(), "--vtk", vtk.c_str()}) == 0);
    CHECK(fs::exists(vtk));

    // Config file plus flag overrides.
    const std::string cfg_path = (dir / "run.json").string();
    std::ofstream(cfg_path) << R"({"benchmark": "footing", "n_iter": 7})";
    const std::string out2 = (dir / "run2").string();
    CHECK(call({"limitql", "run", "--config", cfg_path.c_str(), "--iters", "1", "--out",
                out2.c_str()}) == 0);
    CHECK(fs::exists(dir / "run2" / "mesh_iter_01.json"));
    CHECK(!fs::exists(dir / "run2" / "mesh_iter_02.json"));

    // Invalid usage and configs exit 2.
    CHECK(call({"limitql", "run", "--benchmark", "footing", "--theta", "1.5"}) == 2);
    CHECK(call({"limitql", "run"}) == 2);
    CHECK(call({"limitql", "export", "--mesh", "/does/not/exist.json", "--vtk",
                vtk.c_str()}) == 2);
    CHECK(call({"limitql", "frobnicate"}) == 2);

    // solve-conic round-trips a program file; an optimal solve exits 0.
    auto b = footing(0.0);
    const auto lp = assemble(extract_conforming(b.forest), b.material, b.load);
    const std::string prog = (dir / "program.json").string();
    write_program_json(lp.program, prog);
    const std::string sol = (dir / "solution.json").string();
    CHECK(call({"limitql", "solve-conic", "--in", prog.c_str(), "--out",
                sol.c_str()}) == 0);
    CHECK(fs::exists(sol));
}
