#include "dqvi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace dqvi {

namespace {

struct LineReader {
    std::istream& in;
    int line_no = 0;

    /// Next non-empty, non-comment line split into tokens.
    bool next(std::vector<std::string>& tokens) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            tokens.clear();
            std::string tok;
            while (ls >> tok) tokens.push_back(tok);
            if (!tokens.empty()) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("mesh line " + std::to_string(line_no) + ": " + msg);
    }
};

double to_double(LineReader& r, const std::string& tok) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) r.fail("bad number '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        r.fail("bad number '" + tok + "'");
    }
}

int to_int(LineReader& r, const std::string& tok) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) r.fail("bad integer '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        r.fail("bad integer '" + tok + "'");
    }
}

std::pair<int, int> sorted_edge(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

} // namespace

double triangle_area(const Mesh2D& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const auto p0 = mesh.nodes.row(tri[0]);
    const auto p1 = mesh.nodes.row(tri[1]);
    const auto p2 = mesh.nodes.row(tri[2]);
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

void validate_mesh(const Mesh2D& mesh) {
    const int n = mesh.node_count();
    require(n >= 3, "mesh: needs at least 3 nodes");
    require(!mesh.triangles.empty(), "mesh: needs at least 1 triangle");

    const double bbox = (mesh.nodes.colwise().maxCoeff() - mesh.nodes.colwise().minCoeff())
                            .squaredNorm();
    std::map<std::pair<int, int>, int> edge_use;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (int k : mesh.triangles[t])
            require(k >= 0 && k < n, "mesh: triangle node index out of range");
        const double area = triangle_area(mesh, static_cast<int>(t));
        if (!(area > 1e-14 * bbox))
            throw InvalidInputError("mesh: degenerate or inverted triangle " +
                                    std::to_string(t));
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) ++edge_use[sorted_edge(tri[e], tri[(e + 1) % 3])];
    }

    std::map<std::pair<int, int>, int> tagged;
    for (const auto& be : mesh.boundary) {
        require(be.a >= 0 && be.a < n && be.b >= 0 && be.b < n,
                "mesh: boundary node index out of range");
        require(be.tag >= 1 && be.tag <= 3, "mesh: boundary tag must be 1, 2 or 3");
        const auto key = sorted_edge(be.a, be.b);
        auto it = edge_use.find(key);
        require(it != edge_use.end() && it->second == 1,
                "mesh: tagged edge is not a hull edge");
        require(tagged.emplace(key, be.tag).second, "mesh: boundary edge tagged twice");
    }
    for (const auto& [edge, uses] : edge_use)
        if (uses == 1)
            require(tagged.count(edge) == 1, "mesh: untagged hull edge (" +
                                                 std::to_string(edge.first) + "," +
                                                 std::to_string(edge.second) + ")");
}

Mesh2D parse_mesh(std::istream& in) {
    LineReader reader{in};
    std::vector<std::string> tok;
    Mesh2D mesh;

    if (!reader.next(tok) || tok.size() != 2 || tok[0] != "nodes")
        reader.fail("expected 'nodes <count>'");
    const int n_nodes = to_int(reader, tok[1]);
    if (n_nodes < 3) reader.fail("node count must be >= 3");
    mesh.nodes.resize(n_nodes, 2);
    for (int i = 0; i < n_nodes; ++i) {
        if (!reader.next(tok) || tok.size() != 2) reader.fail("expected 'x y'");
        mesh.nodes(i, 0) = to_double(reader, tok[0]);
        mesh.nodes(i, 1) = to_double(reader, tok[1]);
    }

    if (!reader.next(tok) || tok.size() != 2 || tok[0] != "triangles")
        reader.fail("expected 'triangles <count>'");
    const int n_tri = to_int(reader, tok[1]);
    if (n_tri < 1) reader.fail("triangle count must be >= 1");
    for (int t = 0; t < n_tri; ++t) {
        if (!reader.next(tok) || tok.size() != 3) reader.fail("expected 'i j k'");
        std::array<int, 3> tri{to_int(reader, tok[0]), to_int(reader, tok[1]),
                               to_int(reader, tok[2])};
        mesh.triangles.push_back(tri);
    }

    if (!reader.next(tok) || tok.size() != 2 || tok[0] != "boundary")
        reader.fail("expected 'boundary <count>'");
    const int n_edges = to_int(reader, tok[1]);
    for (int e = 0; e < n_edges; ++e) {
        if (!reader.next(tok) || tok.size() != 3) reader.fail("expected 'i j tag'");
        mesh.boundary.push_back(
            {to_int(reader, tok[0]), to_int(reader, tok[1]), to_int(reader, tok[2])});
    }
    if (reader.next(tok)) reader.fail("unexpected trailing content");

    // Normalize orientation so areas are positive before validation.
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        if (triangle_area(mesh, static_cast<int>(t)) < 0.0)
            std::swap(mesh.triangles[t][1], mesh.triangles[t][2]);

    validate_mesh(mesh);
    return mesh;
}

Mesh2D load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("mesh file not readable: " + path);
    try {
        return parse_mesh(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_mesh(std::ostream& out, const Mesh2D& mesh) {
    const auto saved = out.precision(17);
    out << "nodes " << mesh.node_count() << "\n";
    for (int i = 0; i < mesh.node_count(); ++i)
        out << mesh.nodes(i, 0) << " " << mesh.nodes(i, 1) << "\n";
    out.precision(saved);
    out << "triangles " << mesh.triangles.size() << "\n";
    for (const auto& tri : mesh.triangles)
        out << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
    out << "boundary " << mesh.boundary.size() << "\n";
    for (const auto& be : mesh.boundary) out << be.a << " " << be.b << " " << be.tag << "\n";
}

Mesh2D make_rect_mesh(int nx, int ny, double lx, double ly) {
    require(nx >= 1 && ny >= 1, "make_rect_mesh: cell counts must be >= 1");
    require(lx > 0.0 && ly > 0.0, "make_rect_mesh: side lengths must be positive");
    Mesh2D mesh;
    const int nxn = nx + 1, nyn = ny + 1;
    mesh.nodes.resize(nxn * nyn, 2);
    auto id = [nxn](int i, int j) { return j * nxn + i; };
    for (int j = 0; j < nyn; ++j)
        for (int i = 0; i < nxn; ++i) {
            mesh.nodes(id(i, j), 0) = lx * i / nx;
            mesh.nodes(id(i, j), 1) = ly * j / ny;
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    for (int i = 0; i < nx; ++i) {
        mesh.boundary.push_back({id(i, 0), id(i + 1, 0), 3});     // bottom: contact
        mesh.boundary.push_back({id(i, ny), id(i + 1, ny), 1});   // top: clamped
    }
    for (int j = 0; j < ny; ++j) {
        mesh.boundary.push_back({id(0, j), id(0, j + 1), 2});
        mesh.boundary.push_back({id(nx, j), id(nx, j + 1), 2});
    }
    validate_mesh(mesh);
    return mesh;
}

} // namespace dqvi
