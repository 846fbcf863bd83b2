#pragma once

#include "dqvi/types.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace dqvi {

/// 2D triangulated domain with a tagged boundary partition.
/// Tags: 1 clamped, 2 traction, 3 contact.
struct BoundaryEdge {
    int a = 0;
    int b = 0;
    int tag = 0;
};

struct Mesh2D {
    Mat nodes;                            // n x 2 coordinates
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary;

    int node_count() const { return static_cast<int>(nodes.rows()); }
};

/// Plain-text mesh grammar (one entry per line, '#' starts a comment):
///   nodes <n>        followed by n lines "x y"
///   triangles <m>    followed by m lines "i j k"   (0-based node ids)
///   boundary <k>     followed by k lines "i j tag" (tag in {1,2,3})
/// Every hull edge must be tagged exactly once; triangle areas must exceed
/// 1e-14 times the squared bounding-box diagonal.
Mesh2D parse_mesh(std::istream& in);
Mesh2D load_mesh(const std::string& path);
void write_mesh(std::ostream& out, const Mesh2D& mesh);

/// Structured triangulation of [0,Lx] x [0,Ly] with nx-by-ny cells.
/// Bottom edge tagged 3 (contact), top edge tagged 1 (clamped), sides 2.
Mesh2D make_rect_mesh(int nx, int ny, double lx, double ly);

/// Throws InvalidInputError on inconsistent connectivity, untagged or
/// doubly-tagged hull edges, or degenerate triangles. Called by parse_mesh
/// and by the space assembly.
void validate_mesh(const Mesh2D& mesh);

double triangle_area(const Mesh2D& mesh, int t);

} // namespace dqvi
