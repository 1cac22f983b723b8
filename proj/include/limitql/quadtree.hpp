#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "limitql/geometry.hpp"

namespace limitql {

// Circle used both to snap refined boundary nodes and to bow patch sides.
struct CircleSnap {
    Vec2 center;
    double radius = 0.0;
};

struct PatchSide {
    std::string tag;   // empty = untagged (interior interface or free use)
    bool arc = false;  // side follows the snap circle of its tag
};

// One transfinite quadrilateral patch, subdivided nx x ny into root cells.
// Side s runs from corner[s] to corner[(s+1)%4], counter-clockwise.
struct Patch {
    std::array<Vec2, 4> corner;
    int nx = 1;
    int ny = 1;
    std::array<PatchSide, 4> side;
};

struct DomainSpec {
    std::vector<Patch> patches;
    std::map<std::string, CircleSnap> snap;  // boundary group -> projection circle
    int max_level = 30;
};

struct QuadtreeForest {
    struct Cell {
        std::array<int, 4> corner;  // node ids, counter-clockwise
        std::array<int, 4> side_tag{{-1, -1, -1, -1}};
        int parent = -1;
        std::array<int, 4> child{{-1, -1, -1, -1}};
        int level = 0;

        bool is_leaf() const { return child[0] < 0; }
    };

    std::vector<Vec2> nodes;
    std::vector<Cell> cells;
    std::vector<int> roots;
    std::vector<std::string> tag_names;
    std::vector<std::optional<CircleSnap>> tag_snap;  // parallel to tag_names
    // Midpoint node inserted on a cell side, keyed by sorted endpoint ids.
    // Doubles as the dedup table for shared mid-side nodes.
    std::map<std::pair<int, int>, int> side_split;
    int max_level = 30;
    double dedup_tol = 0.0;

    int tag_id(const std::string& name) const;
    int ensure_tag(const std::string& name);
    int leaf_count() const;
};

QuadtreeForest build_initial(const DomainSpec& spec);

// Subdivide each marked leaf into 4 children. Throws if an id is internal
// or already at max_level.
void refine(QuadtreeForest& forest, const std::vector<int>& marked);

// Tag untagged boundary sides of root cells whose midpoint satisfies pred.
// Must be called before any refinement.
void tag_boundary_sides(QuadtreeForest& forest, const std::string& tag,
                        const std::function<bool(const Vec2&)>& pred);

struct ConformingMesh {
    struct Edge {
        int a = -1;
        int b = -1;
        std::array<int, 2> elem{{-1, -1}};  // incident elements; [1] = -1 on boundary
        int tag = -1;                       // boundary group id, -1 if none/interior

        bool is_boundary() const { return elem[1] < 0; }
    };

    std::vector<Vec2> nodes;
    std::vector<std::vector<int>> elements;       // ccw node ids, hanging nodes included
    std::vector<Edge> edges;
    std::vector<std::vector<int>> element_edges;  // edge ids per polygon side, in order
    std::vector<double> areas;
    std::vector<Vec2> centroids;                  // arithmetic mean of polygon vertices
    std::vector<int> element_cell;                // forest cell id per element
    std::vector<int> node_forest;                 // forest node id per mesh node
    std::vector<std::string> tag_names;
    double total_area = 0.0;

    int tag_id(const std::string& name) const;
};

ConformingMesh extract_conforming(const QuadtreeForest& forest);

}  // namespace limitql
