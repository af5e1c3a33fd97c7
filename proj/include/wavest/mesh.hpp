#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "wavest/errors.hpp"

namespace wavest {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct BBox {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    [[nodiscard]] double width() const { return x_max - x_min; }
    [[nodiscard]] double height() const { return y_max - y_min; }
    [[nodiscard]] double area() const { return width() * height(); }
    [[nodiscard]] bool contains(Point2 p, double tol = 1e-12) const {
        const double sx = tol * std::max(1.0, width());
        const double sy = tol * std::max(1.0, height());
        return p.x >= x_min - sx && p.x <= x_max + sx && p.y >= y_min - sy && p.y <= y_max + sy;
    }
};

using Cell = std::array<int, 3>;
using Edge = std::pair<int, int>;

/// 2D conforming triangulation with tagged boundary edges.
///
/// Cells are positively oriented vertex triples. Meshes produced by
/// build_structured_mesh remember their grid dimensions so that point
/// location is O(1); other meshes fall back to a linear scan.
struct Mesh {
    std::vector<Point2> vertices;
    std::vector<Cell> cells;
    std::vector<Edge> boundary_edges;
    BBox bbox;
    std::optional<std::pair<int, int>> grid; // (nx, ny) for structured meshes

    [[nodiscard]] std::size_t num_cells() const { return cells.size(); }
    [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }

    [[nodiscard]] double signed_area(std::size_t cell) const {
        const auto& c = cells[cell];
        const Point2 a = vertices[c[0]];
        const Point2 b = vertices[c[1]];
        const Point2 d = vertices[c[2]];
        return 0.5 * ((b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y));
    }

    /// Barycentric coordinates (l1, l2, l3) of p with respect to a cell.
    [[nodiscard]] std::array<double, 3> barycentric(std::size_t cell, Point2 p) const {
        const auto& c = cells[cell];
        const Point2 a = vertices[c[0]];
        const Point2 b = vertices[c[1]];
        const Point2 d = vertices[c[2]];
        const double det = (b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y);
        const double l2 = ((p.x - a.x) * (d.y - a.y) - (d.x - a.x) * (p.y - a.y)) / det;
        const double l3 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
        return {1.0 - l2 - l3, l2, l3};
    }

    /// Index of a cell containing p; throws DomainError when p is outside.
    [[nodiscard]] std::size_t locate(Point2 p) const {
        constexpr double tol = 1e-12;
        if (!bbox.contains(p)) {
            throw DomainError("point outside mesh bounding box");
        }
        auto inside = [&](std::size_t k) {
            const auto l = barycentric(k, p);
            return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
        };
        if (grid) {
            const auto [nx, ny] = *grid;
            const double sx = (p.x - bbox.x_min) / bbox.width() * nx;
            const double sy = (p.y - bbox.y_min) / bbox.height() * ny;
            const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, nx - 1);
            const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, ny - 1);
            const std::size_t base = 2 * (static_cast<std::size_t>(j) * nx + i);
            if (inside(base)) return base;
            if (inside(base + 1)) return base + 1;
        }
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (inside(k)) return k;
        }
        throw DomainError("point not contained in any cell");
    }
};

/// Uniform nx-by-ny grid of rectangles, each split along its
/// lower-left to upper-right diagonal.
inline Mesh build_structured_mesh(int nx, int ny, const BBox& bbox) {
    if (nx < 1 || ny < 1) {
        throw InvalidArgument("build_structured_mesh: nx and ny must be >= 1");
    }
    if (!(bbox.x_max > bbox.x_min) || !(bbox.y_max > bbox.y_min)) {
        throw InvalidArgument("build_structured_mesh: degenerate bounding box");
    }
    Mesh mesh;
    mesh.bbox = bbox;
    mesh.grid = std::make_pair(nx, ny);
    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    mesh.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            mesh.vertices.push_back({bbox.x_min + bbox.width() * i / nx,
                                     bbox.y_min + bbox.height() * j / ny});
        }
    }
    mesh.cells.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j);
            const int v10 = vid(i + 1, j);
            const int v11 = vid(i + 1, j + 1);
            const int v01 = vid(i, j + 1);
            mesh.cells.push_back({v00, v10, v11});
            mesh.cells.push_back({v00, v11, v01});
        }
    }
    for (int i = 0; i < nx; ++i) {
        mesh.boundary_edges.emplace_back(vid(i, 0), vid(i + 1, 0));
        mesh.boundary_edges.emplace_back(vid(i + 1, ny), vid(i, ny));
    }
    for (int j = 0; j < ny; ++j) {
        mesh.boundary_edges.emplace_back(vid(nx, j), vid(nx, j + 1));
        mesh.boundary_edges.emplace_back(vid(0, j + 1), vid(0, j));
    }
    return mesh;
}

/// Largest cell diameter.
inline double mesh_size(const Mesh& mesh) {
    double h = 0.0;
    for (const auto& c : mesh.cells) {
        for (int a = 0; a < 3; ++a) {
            for (int b = a + 1; b < 3; ++b) {
                h = std::max(h, distance(mesh.vertices[c[a]], mesh.vertices[c[b]]));
            }
        }
    }
    return h;
}

} // namespace wavest
