#pragma once

// Hybrid triangle/parallelogram meshes: topology, affine element maps,
// structured generators, uniform refinement and the plain-text file format.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "maxlump/error.hpp"

namespace maxlump {

using Vec2 = std::array<double, 2>;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

/// Row-major 2x2 matrix.
struct Mat2 {
    std::array<double, 4> a{};

    double operator()(int r, int c) const { return a[2 * r + c]; }
    double& operator()(int r, int c) { return a[2 * r + c]; }

    static Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }
    double det() const { return a[0] * a[3] - a[1] * a[2]; }
    Mat2 transpose() const { return Mat2{{a[0], a[2], a[1], a[3]}}; }
    Mat2 inverse() const {
        const double d = det();
        return Mat2{{a[3] / d, -a[1] / d, -a[2] / d, a[0] / d}};
    }
    Vec2 operator*(const Vec2& x) const { return {a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]}; }
    Mat2 operator*(const Mat2& m) const {
        return Mat2{{a[0] * m.a[0] + a[1] * m.a[2], a[0] * m.a[1] + a[1] * m.a[3],
                     a[2] * m.a[0] + a[3] * m.a[2], a[2] * m.a[1] + a[3] * m.a[3]}};
    }
};

enum class ElementKind : std::uint8_t { triangle, parallelogram };

inline constexpr int vertex_count(ElementKind k) { return k == ElementKind::triangle ? 3 : 4; }

/// Local edge `a` (0-based) runs from local vertex (a+1)%n to (a+2)%n.
/// This is the edge numbering of the reference basis tables.
inline constexpr std::array<int, 2> local_edge_vertices(ElementKind k, int a) {
    const int n = vertex_count(k);
    return {(a + 1) % n, (a + 2) % n};
}

struct Element {
    ElementKind kind = ElementKind::triangle;
    std::array<std::size_t, 4> v{npos, npos, npos, npos};  ///< counter-clockwise
    int region = 0;

    int size() const { return vertex_count(kind); }
};

struct Edge {
    std::array<std::size_t, 2> v{};  ///< v[0] < v[1]
    std::array<std::size_t, 2> elements{npos, npos};
    int tag = 0;

    bool boundary() const { return elements[1] == npos; }
};

/// F_T(x) = offset + matrix * x, mapping the reference triangle (0,0),(1,0),(0,1)
/// or the unit square onto an element.
struct AffineMap {
    Vec2 offset{};
    Mat2 matrix = Mat2::identity();
    double determinant = 1.0;
    Mat2 inverse_transpose = Mat2::identity();

    Vec2 operator()(const Vec2& xhat) const { return offset + matrix * xhat; }
};

struct BBox {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};

/// Boundary edge annotation (i, j, tag) as it appears in mesh files.
struct BoundaryTag {
    std::size_t i = 0, j = 0;
    int tag = 0;
};

inline double reference_area(ElementKind k) { return k == ElementKind::triangle ? 0.5 : 1.0; }

inline const std::vector<Vec2>& reference_vertices(ElementKind k) {
    static const std::vector<Vec2> tri{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    static const std::vector<Vec2> quad{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    return k == ElementKind::triangle ? tri : quad;
}

class Mesh {
public:
    Mesh() = default;

    /// Builds the edge topology and validates conformity, orientation and
    /// the parallelogram closure property.
    Mesh(std::vector<Vec2> vertices, std::vector<Element> elements, const std::vector<BoundaryTag>& tags = {})
        : vertices_(std::move(vertices)), elements_(std::move(elements)) {
        build_topology();
        for (const auto& t : tags) set_boundary_tag(t.i, t.j, t.tag);
    }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_elements() const { return elements_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    std::size_t num_interior_edges() const {
        return static_cast<std::size_t>(
            std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return !e.boundary(); }));
    }

    /// Global edge index of local edge `a` of element `t`.
    std::size_t element_edge(std::size_t t, int a) const { return element_edges_[t][a]; }

    /// +1 if local edge `a` of element `t` runs from the lower to the higher global vertex.
    int element_edge_sign(std::size_t t, int a) const {
        const auto& el = elements_[t];
        const auto lv = local_edge_vertices(el.kind, a);
        return el.v[lv[0]] < el.v[lv[1]] ? 1 : -1;
    }

    /// Edge index for the unordered vertex pair, or npos.
    std::size_t find_edge(std::size_t a, std::size_t b) const {
        const std::array<std::size_t, 2> key{std::min(a, b), std::max(a, b)};
        auto it = std::lower_bound(edges_.begin(), edges_.end(), key,
                                   [](const Edge& e, const std::array<std::size_t, 2>& k) { return e.v < k; });
        if (it == edges_.end() || it->v != key) return npos;
        return static_cast<std::size_t>(it - edges_.begin());
    }

    void set_boundary_tag(std::size_t i, std::size_t j, int tag) {
        const auto e = find_edge(i, j);
        if (e == npos) throw InvalidArgument("boundary tag on nonexistent edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        if (!edges_[e].boundary())
            throw InvalidArgument("boundary tag on interior edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        edges_[e].tag = tag;
    }

    void set_region(std::size_t t, int region) { elements_.at(t).region = region; }

    AffineMap affine_map(std::size_t t) const {
        if (t >= elements_.size()) throw IndexError("element index " + std::to_string(t) + " out of range");
        const auto& el = elements_[t];
        const Vec2& p0 = vertices_[el.v[0]];
        const Vec2 c1 = vertices_[el.v[1]] - p0;
        const Vec2 c2 = vertices_[el.v[el.kind == ElementKind::triangle ? 2 : 3]] - p0;
        AffineMap m;
        m.offset = p0;
        m.matrix = Mat2{{c1[0], c2[0], c1[1], c2[1]}};
        m.determinant = m.matrix.det();
        if (!(m.determinant > 0.0)) throw OrientationError(t, m.determinant);
        m.inverse_transpose = m.matrix.inverse().transpose();
        return m;
    }

    double element_area(std::size_t t) const {
        return affine_map(t).determinant * reference_area(elements_[t].kind);
    }

    double element_diameter(std::size_t t) const {
        const auto& el = elements_[t];
        double d = 0.0;
        for (int i = 0; i < el.size(); ++i)
            for (int j = i + 1; j < el.size(); ++j) d = std::max(d, norm(vertices_[el.v[i]] - vertices_[el.v[j]]));
        return d;
    }

    double max_diameter() const {
        double h = 0.0;
        for (std::size_t t = 0; t < elements_.size(); ++t) h = std::max(h, element_diameter(t));
        return h;
    }

    Vec2 centroid(std::size_t t) const {
        const auto& el = elements_[t];
        Vec2 c{0.0, 0.0};
        for (int i = 0; i < el.size(); ++i) c = c + vertices_[el.v[i]];
        return (1.0 / el.size()) * c;
    }

    Vec2 edge_midpoint(std::size_t e) const {
        return 0.5 * (vertices_[edges_[e].v[0]] + vertices_[edges_[e].v[1]]);
    }

    /// Edge vector from the low to the high vertex.
    Vec2 edge_vector(std::size_t e) const { return vertices_[edges_[e].v[1]] - vertices_[edges_[e].v[0]]; }

    double total_area() const {
        double a = 0.0;
        for (std::size_t t = 0; t < elements_.size(); ++t) a += element_area(t);
        return a;
    }

    friend bool operator==(const Mesh& a, const Mesh& b) {
        if (a.vertices_ != b.vertices_ || a.elements_.size() != b.elements_.size() || a.edges_.size() != b.edges_.size())
            return false;
        for (std::size_t t = 0; t < a.elements_.size(); ++t) {
            const auto& x = a.elements_[t];
            const auto& y = b.elements_[t];
            if (x.kind != y.kind || x.v != y.v || x.region != y.region) return false;
        }
        for (std::size_t e = 0; e < a.edges_.size(); ++e)
            if (a.edges_[e].v != b.edges_[e].v || a.edges_[e].elements != b.edges_[e].elements ||
                a.edges_[e].tag != b.edges_[e].tag)
                return false;
        return true;
    }

private:
    void build_topology() {
        const std::size_t nv = vertices_.size();
        struct Incidence {
            std::array<std::size_t, 2> key;
            std::size_t element;
            int local;
        };
        std::vector<Incidence> inc;
        for (std::size_t t = 0; t < elements_.size(); ++t) {
            auto& el = elements_[t];
            for (int i = 0; i < el.size(); ++i) {
                if (el.v[i] >= nv)
                    throw IndexError("element " + std::to_string(t) + " references vertex " + std::to_string(el.v[i]) +
                                     " beyond vertex count " + std::to_string(nv));
                for (int j = 0; j < i; ++j)
                    if (el.v[i] == el.v[j]) throw InvalidArgument("element " + std::to_string(t) + " repeats a vertex");
            }
            affine_map(t);  // throws on inverted elements
            if (el.kind == ElementKind::parallelogram) {
                const Vec2 closure = vertices_[el.v[1]] + vertices_[el.v[3]] - vertices_[el.v[0]];
                if (norm(closure - vertices_[el.v[2]]) > 1e-12 * element_diameter(t))
                    throw InvalidArgument("element " + std::to_string(t) + " is not a parallelogram");
            }
            for (int a = 0; a < el.size(); ++a) {
                const auto lv = local_edge_vertices(el.kind, a);
                const std::size_t p = el.v[lv[0]], q = el.v[lv[1]];
                inc.push_back({{std::min(p, q), std::max(p, q)}, t, a});
            }
        }
        std::sort(inc.begin(), inc.end(), [](const Incidence& x, const Incidence& y) {
            return std::tie(x.key, x.element) < std::tie(y.key, y.element);
        });
        element_edges_.assign(elements_.size(), {npos, npos, npos, npos});
        edges_.clear();
        for (std::size_t k = 0; k < inc.size();) {
            std::size_t end = k;
            while (end < inc.size() && inc[end].key == inc[k].key) ++end;
            if (end - k > 2)
                throw InvalidArgument("non-conforming mesh: edge (" + std::to_string(inc[k].key[0]) + ", " +
                                      std::to_string(inc[k].key[1]) + ") shared by more than two elements");
            Edge e;
            e.v = inc[k].key;
            for (std::size_t m = k; m < end; ++m) {
                e.elements[m - k] = inc[m].element;
                element_edges_[inc[m].element][inc[m].local] = edges_.size();
            }
            if (end - k == 2 &&
                element_edge_sign(inc[k].element, inc[k].local) == element_edge_sign(inc[k + 1].element, inc[k + 1].local))
                throw InvalidArgument("non-conforming mesh: overlapping elements " + std::to_string(inc[k].element) +
                                      " and " + std::to_string(inc[k + 1].element));
            edges_.push_back(e);
            k = end;
        }
    }

    std::vector<Vec2> vertices_;
    std::vector<Element> elements_;
    std::vector<Edge> edges_;
    std::vector<std::array<std::size_t, 4>> element_edges_;
};

inline AffineMap affine_map(const Mesh& mesh, std::size_t element) { return mesh.affine_map(element); }

namespace detail {

inline void check_grid_args(std::size_t nx, std::size_t ny, const BBox& b) {
    if (nx == 0 || ny == 0) throw InvalidArgument("grid cell counts must be positive");
    if (!(b.xmax > b.xmin) || !(b.ymax > b.ymin)) throw InvalidArgument("degenerate bounding box");
}

inline std::vector<Vec2> grid_vertices(std::size_t nx, std::size_t ny, const BBox& b) {
    std::vector<Vec2> v;
    v.reserve((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j)
        for (std::size_t i = 0; i <= nx; ++i)
            v.push_back({b.xmin + (b.xmax - b.xmin) * static_cast<double>(i) / static_cast<double>(nx),
                         b.ymin + (b.ymax - b.ymin) * static_cast<double>(j) / static_cast<double>(ny)});
    return v;
}

/// Tags boundary edges by side: 1 bottom, 2 right, 3 top, 4 left.
inline void tag_box_sides(Mesh& mesh, const BBox& b) {
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const auto& edge = mesh.edges()[e];
        if (!edge.boundary()) continue;
        const Vec2 m = mesh.edge_midpoint(e);
        const double tol = 1e-12 * std::max(b.xmax - b.xmin, b.ymax - b.ymin);
        int tag = 0;
        if (std::abs(m[1] - b.ymin) < tol) tag = 1;
        else if (std::abs(m[0] - b.xmax) < tol) tag = 2;
        else if (std::abs(m[1] - b.ymax) < tol) tag = 3;
        else if (std::abs(m[0] - b.xmin) < tol) tag = 4;
        mesh.set_boundary_tag(edge.v[0], edge.v[1], tag);
    }
}

enum class CellSplit { none, triangles, checkerboard };

inline Mesh structured_mesh(std::size_t nx, std::size_t ny, const BBox& b, CellSplit split) {
    check_grid_args(nx, ny, b);
    auto verts = grid_vertices(nx, ny, b);
    std::vector<Element> els;
    auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t a = id(i, j), c = id(i + 1, j), d = id(i + 1, j + 1), e = id(i, j + 1);
            const bool tri = split == CellSplit::triangles || (split == CellSplit::checkerboard && (i + j) % 2 == 1);
            if (tri) {
                els.push_back({ElementKind::triangle, {a, c, d, npos}, 0});
                els.push_back({ElementKind::triangle, {a, d, e, npos}, 0});
            } else {
                els.push_back({ElementKind::parallelogram, {a, c, d, e}, 0});
            }
        }
    Mesh mesh(std::move(verts), std::move(els));
    tag_box_sides(mesh, b);
    return mesh;
}

}  // namespace detail

/// nx*ny axis-aligned rectangles.
inline Mesh build_structured_quad_mesh(std::size_t nx, std::size_t ny, const BBox& bbox = {}) {
    return detail::structured_mesh(nx, ny, bbox, detail::CellSplit::none);
}

/// Each grid cell split into two triangles along its (0,0)-(1,1) diagonal.
inline Mesh build_structured_tri_mesh(std::size_t nx, std::size_t ny, const BBox& bbox = {}) {
    return detail::structured_mesh(nx, ny, bbox, detail::CellSplit::triangles);
}

/// Checkerboard of rectangles and split cells: a conforming hybrid mesh.
inline Mesh build_structured_hybrid_mesh(std::size_t nx, std::size_t ny, const BBox& bbox = {}) {
    return detail::structured_mesh(nx, ny, bbox, detail::CellSplit::checkerboard);
}

/// Randomly displaces interior vertices of an all-triangle mesh by up to
/// `amplitude` times the smallest incident edge length in each coordinate.
inline Mesh perturb_interior_vertices(const Mesh& mesh, double amplitude, std::uint64_t seed) {
    for (const auto& el : mesh.elements())
        if (el.kind != ElementKind::triangle) throw InvalidArgument("vertex perturbation requires a triangle mesh");
    std::vector<bool> on_boundary(mesh.num_vertices(), false);
    std::vector<double> min_len(mesh.num_vertices(), std::numeric_limits<double>::max());
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const auto& edge = mesh.edges()[e];
        const double len = norm(mesh.edge_vector(e));
        for (auto v : edge.v) {
            min_len[v] = std::min(min_len[v], len);
            if (edge.boundary()) on_boundary[v] = true;
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    auto verts = mesh.vertices();
    for (std::size_t v = 0; v < verts.size(); ++v) {
        const double dx = dist(rng), dy = dist(rng);
        if (!on_boundary[v]) verts[v] = verts[v] + min_len[v] * Vec2{dx, dy};
    }
    std::vector<BoundaryTag> tags;
    for (const auto& e : mesh.edges())
        if (e.boundary() && e.tag != 0) tags.push_back({e.v[0], e.v[1], e.tag});
    return Mesh(std::move(verts), mesh.elements(), tags);
}

/// Parent links from a uniformly refined mesh back to the mesh it came from.
struct RefinementMap {
    std::vector<std::size_t> element_parent;  ///< fine element -> coarse element
    std::vector<std::size_t> edge_parent;     ///< fine edge -> coarse edge, npos if interior to a coarse element
    std::vector<int> edge_parent_sign;        ///< +1 if fine and coarse edge orientations agree
};

/// Splits every element into four congruent children through edge midpoints
/// (and the centre, for parallelograms). Coarse vertices keep their indices.
inline Mesh refine_uniform(const Mesh& mesh, RefinementMap* map = nullptr) {
    const std::size_t nv = mesh.num_vertices(), ne = mesh.num_edges();
    std::vector<Vec2> verts = mesh.vertices();
    verts.reserve(nv + ne + mesh.num_elements());
    for (std::size_t e = 0; e < ne; ++e) verts.push_back(mesh.edge_midpoint(e));
    std::vector<Element> els;
    std::vector<std::size_t> parent;
    els.reserve(4 * mesh.num_elements());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto& el = mesh.elements()[t];
        auto mid = [&](int p, int q) { return nv + mesh.find_edge(el.v[p], el.v[q]); };
        if (el.kind == ElementKind::triangle) {
            const std::size_t m01 = mid(0, 1), m12 = mid(1, 2), m20 = mid(2, 0);
            els.push_back({ElementKind::triangle, {el.v[0], m01, m20, npos}, el.region});
            els.push_back({ElementKind::triangle, {m01, el.v[1], m12, npos}, el.region});
            els.push_back({ElementKind::triangle, {m20, m12, el.v[2], npos}, el.region});
            els.push_back({ElementKind::triangle, {m01, m12, m20, npos}, el.region});
        } else {
            const std::size_t m01 = mid(0, 1), m12 = mid(1, 2), m23 = mid(2, 3), m30 = mid(3, 0);
            const std::size_t c = verts.size();
            verts.push_back(mesh.centroid(t));
            els.push_back({ElementKind::parallelogram, {el.v[0], m01, c, m30}, el.region});
            els.push_back({ElementKind::parallelogram, {m01, el.v[1], m12, c}, el.region});
            els.push_back({ElementKind::parallelogram, {c, m12, el.v[2], m23}, el.region});
            els.push_back({ElementKind::parallelogram, {m30, c, m23, el.v[3]}, el.region});
        }
        parent.insert(parent.end(), 4, t);
    }
    std::vector<BoundaryTag> tags;
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& edge = mesh.edges()[e];
        if (edge.boundary() && edge.tag != 0) {
            tags.push_back({edge.v[0], nv + e, edge.tag});
            tags.push_back({nv + e, edge.v[1], edge.tag});
        }
    }
    Mesh fine(std::move(verts), std::move(els), tags);
    if (map) {
        map->element_parent = std::move(parent);
        map->edge_parent.assign(fine.num_edges(), npos);
        map->edge_parent_sign.assign(fine.num_edges(), 0);
        for (std::size_t e = 0; e < ne; ++e) {
            const auto& edge = mesh.edges()[e];
            for (auto end : edge.v) {
                const std::size_t f = fine.find_edge(end, nv + e);
                map->edge_parent[f] = e;
                map->edge_parent_sign[f] = dot(fine.edge_vector(f), mesh.edge_vector(e)) > 0.0 ? 1 : -1;
            }
        }
    }
    return fine;
}

/// Element containing point `p` (first match, boundaries inclusive), or npos.
inline std::size_t locate_point(const Mesh& mesh, const Vec2& p, double tol = 1e-12) {
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const AffineMap m = mesh.affine_map(t);
        const Vec2 r = m.matrix.inverse() * (p - m.offset);
        const bool inside = mesh.elements()[t].kind == ElementKind::triangle
                                ? r[0] >= -tol && r[1] >= -tol && r[0] + r[1] <= 1.0 + tol
                                : r[0] >= -tol && r[1] >= -tol && r[0] <= 1.0 + tol && r[1] <= 1.0 + tol;
        if (inside) return t;
    }
    return npos;
}

namespace detail {

inline std::string format_double(double x) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tok;
    std::istringstream in(line.substr(0, line.find('#')));
    for (std::string s; in >> s;) tok.push_back(s);
    return tok;
}

template <class T>
T parse_number(const std::string& s, std::size_t line) {
    T value{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError(line, "invalid number '" + s + "'");
    return value;
}

}  // namespace detail

/// Writes the `maxlump-mesh 1` text format. Coordinates use the shortest
/// decimal form that round-trips exactly.
inline void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << "maxlump-mesh 1\n" << mesh.num_vertices() << ' ' << mesh.num_elements() << '\n';
    for (const auto& v : mesh.vertices())
        out << "v " << detail::format_double(v[0]) << ' ' << detail::format_double(v[1]) << '\n';
    for (const auto& el : mesh.elements()) {
        out << (el.kind == ElementKind::triangle ? 't' : 'q');
        for (int i = 0; i < el.size(); ++i) out << ' ' << el.v[i];
        if (el.region != 0) out << ' ' << el.region;
        out << '\n';
    }
    for (const auto& e : mesh.edges())
        if (e.boundary() && e.tag != 0) out << "b " << e.v[0] << ' ' << e.v[1] << ' ' << e.tag << '\n';
}

inline Mesh read_mesh(std::istream& in) {
    std::size_t lineno = 0;
    std::string line;
    auto next = [&](std::vector<std::string>& tok) {
        while (std::getline(in, line)) {
            ++lineno;
            tok = detail::tokenize(line);
            if (!tok.empty()) return true;
        }
        return false;
    };
    std::vector<std::string> tok;
    if (!next(tok) || tok.size() != 2 || tok[0] != "maxlump-mesh" || tok[1] != "1")
        throw ParseError(lineno, "expected header 'maxlump-mesh 1'");
    if (!next(tok) || tok.size() != 2) throw ParseError(lineno, "expected '<n_vertices> <n_elements>'");
    const auto nv = detail::parse_number<std::size_t>(tok[0], lineno);
    const auto nt = detail::parse_number<std::size_t>(tok[1], lineno);

    std::vector<Vec2> verts;
    verts.reserve(nv);
    for (std::size_t k = 0; k < nv; ++k) {
        if (!next(tok)) throw ParseError(lineno, "unexpected end of file in vertex block");
        if (tok.size() != 3 || tok[0] != "v") throw ParseError(lineno, "expected 'v <x> <y>'");
        verts.push_back({detail::parse_number<double>(tok[1], lineno), detail::parse_number<double>(tok[2], lineno)});
    }
    std::vector<Element> els;
    els.reserve(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        if (!next(tok)) throw ParseError(lineno, "unexpected end of file in element block");
        Element el;
        if (tok[0] == "t") el.kind = ElementKind::triangle;
        else if (tok[0] == "q") el.kind = ElementKind::parallelogram;
        else throw ParseError(lineno, "expected element line 't ...' or 'q ...'");
        const std::size_t n = static_cast<std::size_t>(el.size());
        if (tok.size() != n + 1 && tok.size() != n + 2) throw ParseError(lineno, "wrong number of element fields");
        for (std::size_t i = 0; i < n; ++i) {
            el.v[i] = detail::parse_number<std::size_t>(tok[i + 1], lineno);
            if (el.v[i] >= nv)
                throw ParseError(lineno, "vertex index " + tok[i + 1] + " out of range (" + std::to_string(nv) + " vertices)");
        }
        if (tok.size() == n + 2) el.region = detail::parse_number<int>(tok[n + 1], lineno);
        els.push_back(el);
    }
    std::vector<std::pair<std::size_t, BoundaryTag>> tags;
    while (next(tok)) {
        if (tok.size() != 4 || tok[0] != "b") throw ParseError(lineno, "expected 'b <i> <j> <tag>'");
        tags.push_back({lineno,
                        {detail::parse_number<std::size_t>(tok[1], lineno), detail::parse_number<std::size_t>(tok[2], lineno),
                         detail::parse_number<int>(tok[3], lineno)}});
    }
    Mesh mesh;
    try {
        mesh = Mesh(std::move(verts), std::move(els));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(lineno, std::string("invalid mesh: ") + e.what());
    }
    for (const auto& [ln, t] : tags) {
        try {
            mesh.set_boundary_tag(t.i, t.j, t.tag);
        } catch (const Error& e) {
            throw ParseError(ln, e.what());
        }
    }
    return mesh;
}

}  // namespace maxlump
