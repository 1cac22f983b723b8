#include "limitql/quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace limitql {

namespace {

std::pair<int, int> sorted_pair(int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

Vec2 arc_point(const CircleSnap& circle, const Vec2& a, const Vec2& b, double t) {
    const double ta = std::atan2(a.y - circle.center.y, a.x - circle.center.x);
    const double tb = std::atan2(b.y - circle.center.y, b.x - circle.center.x);
    double d = tb - ta;
    if (d > M_PI) d -= 2.0 * M_PI;
    if (d < -M_PI) d += 2.0 * M_PI;
    const double ang = ta + t * d;
    return circle.center + circle.radius * Vec2{std::cos(ang), std::sin(ang)};
}

Vec2 snap_to_circle(const CircleSnap& circle, const Vec2& p) {
    Vec2 r = p - circle.center;
    const double n = r.norm();
    if (n <= 0.0) throw Error("snap: point coincides with circle center");
    return circle.center + r * (circle.radius / n);
}

class PatchEvaluator {
public:
    PatchEvaluator(const Patch& patch, const std::map<std::string, CircleSnap>& snaps)
        : p_(patch) {
        for (int s = 0; s < 4; ++s) {
            if (!p_.side[s].arc) continue;
            auto it = snaps.find(p_.side[s].tag);
            if (it == snaps.end())
                throw Error("patch arc side '" + p_.side[s].tag + "' has no snap circle");
            circle_[s] = it->second;
        }
    }

    Vec2 operator()(double u, double v) const {
        const Vec2 c0 = side_point(0, u);
        const Vec2 c1 = side_point(1, v);
        const Vec2 c2 = side_point(2, 1.0 - u);
        const Vec2 c3 = side_point(3, 1.0 - v);
        const Vec2 blend = (1.0 - v) * c0 + v * c2 + (1.0 - u) * c3 + u * c1;
        const Vec2 corners = (1.0 - u) * (1.0 - v) * p_.corner[0] +
                             u * (1.0 - v) * p_.corner[1] + u * v * p_.corner[2] +
                             (1.0 - u) * v * p_.corner[3];
        return blend - corners;
    }

private:
    Vec2 side_point(int s, double t) const {
        const Vec2& a = p_.corner[s];
        const Vec2& b = p_.corner[(s + 1) % 4];
        if (circle_[s]) return arc_point(*circle_[s], a, b, t);
        return (1.0 - t) * a + t * b;
    }

    const Patch& p_;
    std::array<std::optional<CircleSnap>, 4> circle_;
};

}  // namespace

int QuadtreeForest::tag_id(const std::string& name) const {
    for (std::size_t i = 0; i < tag_names.size(); ++i)
        if (tag_names[i] == name) return static_cast<int>(i);
    return -1;
}

int QuadtreeForest::ensure_tag(const std::string& name) {
    const int id = tag_id(name);
    if (id >= 0) return id;
    tag_names.push_back(name);
    tag_snap.emplace_back();
    return static_cast<int>(tag_names.size()) - 1;
}

int QuadtreeForest::leaf_count() const {
    int n = 0;
    for (const auto& c : cells)
        if (c.is_leaf()) ++n;
    return n;
}

int ConformingMesh::tag_id(const std::string& name) const {
    for (std::size_t i = 0; i < tag_names.size(); ++i)
        if (tag_names[i] == name) return static_cast<int>(i);
    return -1;
}

QuadtreeForest build_initial(const DomainSpec& spec) {
    if (spec.patches.empty()) throw Error("build_initial: no patches");

    QuadtreeForest forest;
    forest.max_level = spec.max_level;

    Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const auto& patch : spec.patches)
        for (const auto& c : patch.corner) {
            lo.x = std::min(lo.x, c.x);
            lo.y = std::min(lo.y, c.y);
            hi.x = std::max(hi.x, c.x);
            hi.y = std::max(hi.y, c.y);
        }
    forest.dedup_tol = 1e-9 * (hi - lo).norm();

    auto find_or_add_node = [&forest](const Vec2& p) {
        for (std::size_t i = 0; i < forest.nodes.size(); ++i)
            if ((forest.nodes[i] - p).norm() <= forest.dedup_tol) return static_cast<int>(i);
        forest.nodes.push_back(p);
        return static_cast<int>(forest.nodes.size()) - 1;
    };

    for (const auto& patch : spec.patches) {
        if (patch.nx < 1 || patch.ny < 1) throw Error("build_initial: patch nx, ny must be >= 1");
        PatchEvaluator eval(patch, spec.snap);

        std::vector<int> grid(static_cast<std::size_t>(patch.nx + 1) * (patch.ny + 1));
        for (int j = 0; j <= patch.ny; ++j)
            for (int i = 0; i <= patch.nx; ++i) {
                const double u = static_cast<double>(i) / patch.nx;
                const double v = static_cast<double>(j) / patch.ny;
                grid[static_cast<std::size_t>(j) * (patch.nx + 1) + i] = find_or_add_node(eval(u, v));
            }
        auto at = [&](int i, int j) {
            return grid[static_cast<std::size_t>(j) * (patch.nx + 1) + i];
        };

        std::array<int, 4> side_tag;
        for (int s = 0; s < 4; ++s)
            side_tag[s] = patch.side[s].tag.empty() ? -1 : forest.ensure_tag(patch.side[s].tag);
        for (const auto& [name, circle] : spec.snap) {
            const int id = forest.tag_id(name);
            if (id >= 0) forest.tag_snap[id] = circle;
        }

        for (int j = 0; j < patch.ny; ++j)
            for (int i = 0; i < patch.nx; ++i) {
                QuadtreeForest::Cell cell;
                cell.corner = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
                cell.side_tag = {j == 0 ? side_tag[0] : -1, i == patch.nx - 1 ? side_tag[1] : -1,
                                 j == patch.ny - 1 ? side_tag[2] : -1, i == 0 ? side_tag[3] : -1};

                const int id = static_cast<int>(forest.cells.size());
                for (int k = 0; k < 4; ++k) {
                    const Vec2& a = forest.nodes[cell.corner[k]];
                    const Vec2& b = forest.nodes[cell.corner[(k + 1) % 4]];
                    const Vec2& c = forest.nodes[cell.corner[(k + 2) % 4]];
                    if ((b - a).cross(c - b) <= 0.0)
                        throw Error("build_initial: non-convex or inverted quad, cell " +
                                    std::to_string(id));
                }
                forest.cells.push_back(cell);
                forest.roots.push_back(id);
            }
    }
    return forest;
}

void tag_boundary_sides(QuadtreeForest& forest, const std::string& tag,
                        const std::function<bool(const Vec2&)>& pred) {
    for (const auto& cell : forest.cells)
        if (cell.parent >= 0 || !cell.is_leaf())
            throw Error("tag_boundary_sides: forest already refined");

    std::map<std::pair<int, int>, int> side_use;
    for (const int r : forest.roots) {
        const auto& cell = forest.cells[r];
        for (int s = 0; s < 4; ++s)
            ++side_use[sorted_pair(cell.corner[s], cell.corner[(s + 1) % 4])];
    }

    const int id = forest.ensure_tag(tag);
    for (const int r : forest.roots) {
        auto& cell = forest.cells[r];
        for (int s = 0; s < 4; ++s) {
            if (cell.side_tag[s] >= 0) continue;
            const int a = cell.corner[s];
            const int b = cell.corner[(s + 1) % 4];
            if (side_use[sorted_pair(a, b)] != 1) continue;
            if (pred(0.5 * (forest.nodes[a] + forest.nodes[b]))) cell.side_tag[s] = id;
        }
    }
}

void refine(QuadtreeForest& forest, const std::vector<int>& marked) {
    std::vector<int> ids(marked);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    for (const int id : ids) {
        if (id < 0 || id >= static_cast<int>(forest.cells.size()))
            throw Error("refine: invalid cell id " + std::to_string(id));
        if (!forest.cells[id].is_leaf())
            throw Error("refine: cell " + std::to_string(id) + " is internal");
        if (forest.cells[id].level >= forest.max_level)
            throw Error("refine: cell " + std::to_string(id) + " at max level");
    }

    for (const int id : ids) {
        const auto cell = forest.cells[id];

        std::array<int, 4> mid;
        for (int s = 0; s < 4; ++s) {
            const int a = cell.corner[s];
            const int b = cell.corner[(s + 1) % 4];
            const auto key = sorted_pair(a, b);
            auto it = forest.side_split.find(key);
            if (it != forest.side_split.end()) {
                mid[s] = it->second;
                continue;
            }
            Vec2 p = 0.5 * (forest.nodes[a] + forest.nodes[b]);
            const int tag = cell.side_tag[s];
            if (tag >= 0 && forest.tag_snap[tag]) p = snap_to_circle(*forest.tag_snap[tag], p);
            forest.nodes.push_back(p);
            mid[s] = static_cast<int>(forest.nodes.size()) - 1;
            forest.side_split.emplace(key, mid[s]);
        }

        Vec2 center{0.0, 0.0};
        for (const int c : cell.corner) center += forest.nodes[c];
        forest.nodes.push_back(center / 4.0);
        const int center_id = static_cast<int>(forest.nodes.size()) - 1;

        for (int k = 0; k < 4; ++k) {
            QuadtreeForest::Cell child;
            child.corner = {cell.corner[k], mid[k], center_id, mid[(k + 3) % 4]};
            child.side_tag = {cell.side_tag[k], -1, -1, cell.side_tag[(k + 3) % 4]};
            child.parent = id;
            child.level = cell.level + 1;
            forest.cells[id].child[k] = static_cast<int>(forest.cells.size());
            forest.cells.push_back(child);
        }
    }
}

namespace {

// Append, in order, the split nodes strictly between a and b.
void collect_splits(const QuadtreeForest& forest, int a, int b, std::vector<int>& out) {
    auto it = forest.side_split.find(sorted_pair(a, b));
    if (it == forest.side_split.end()) return;
    const int m = it->second;
    collect_splits(forest, a, m, out);
    out.push_back(m);
    collect_splits(forest, m, b, out);
}

}  // namespace

ConformingMesh extract_conforming(const QuadtreeForest& forest) {
    ConformingMesh mesh;
    mesh.tag_names = forest.tag_names;

    std::vector<int> node_map(forest.nodes.size(), -1);
    auto mesh_node = [&](int forest_id) {
        int& m = node_map[forest_id];
        if (m < 0) {
            m = static_cast<int>(mesh.nodes.size());
            mesh.nodes.push_back(forest.nodes[forest_id]);
            mesh.node_forest.push_back(forest_id);
        }
        return m;
    };

    std::map<std::pair<int, int>, int> edge_map;

    for (std::size_t ci = 0; ci < forest.cells.size(); ++ci) {
        const auto& cell = forest.cells[ci];
        if (!cell.is_leaf()) continue;

        std::vector<int> poly;        // forest node ids
        std::vector<int> pair_tag;    // cell-side tag per consecutive pair
        for (int s = 0; s < 4; ++s) {
            const int a = cell.corner[s];
            const int b = cell.corner[(s + 1) % 4];
            std::vector<int> chain{a};
            collect_splits(forest, a, b, chain);
            for (std::size_t i = 0; i < chain.size(); ++i) {
                poly.push_back(chain[i]);
                pair_tag.push_back(cell.side_tag[s]);
            }
        }

        const int elem = static_cast<int>(mesh.elements.size());
        std::vector<int> verts(poly.size());
        for (std::size_t i = 0; i < poly.size(); ++i) verts[i] = mesh_node(poly[i]);

        std::vector<int> eids(verts.size());
        for (std::size_t i = 0; i < verts.size(); ++i) {
            const int a = verts[i];
            const int b = verts[(i + 1) % verts.size()];
            const auto key = sorted_pair(a, b);
            auto it = edge_map.find(key);
            int eid;
            if (it == edge_map.end()) {
                eid = static_cast<int>(mesh.edges.size());
                edge_map.emplace(key, eid);
                ConformingMesh::Edge e;
                e.a = a;
                e.b = b;
                e.elem[0] = elem;
                e.tag = pair_tag[i];
                mesh.edges.push_back(e);
            } else {
                eid = it->second;
                auto& e = mesh.edges[eid];
                if (e.elem[1] >= 0) throw Error("extract_conforming: edge with > 2 elements");
                e.elem[1] = elem;
                e.tag = -1;  // interior edge
            }
            eids[i] = eid;
        }

        mesh.elements.push_back(std::move(verts));
        mesh.element_edges.push_back(std::move(eids));
        mesh.element_cell.push_back(static_cast<int>(ci));
    }

    mesh.areas.reserve(mesh.elements.size());
    mesh.centroids.reserve(mesh.elements.size());
    for (const auto& verts : mesh.elements) {
        std::vector<Vec2> pts(verts.size());
        Vec2 c{0.0, 0.0};
        for (std::size_t i = 0; i < verts.size(); ++i) {
            pts[i] = mesh.nodes[verts[i]];
            c += pts[i];
        }
        const double area = polygon_area(pts);
        if (area <= 0.0) throw Error("extract_conforming: non-positive element area");
        mesh.areas.push_back(area);
        mesh.centroids.push_back(c / static_cast<double>(verts.size()));
        mesh.total_area += area;
    }
    return mesh;
}

}  // namespace limitql
