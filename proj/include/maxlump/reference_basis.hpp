#pragma once

// Closed-form edge bases on the reference triangle and unit square.
//
// Each local edge `a` carries two "half" functions, one per endpoint
// (gamma = 0 at the start vertex, gamma = 1 at the end vertex); their sum is
// the lowest-order Nedelec function of that edge. Local edge `a` (0-based)
// is the a-th function of the published tables and runs counter-clockwise
// from local vertex (a+1)%n to (a+2)%n.
//
// eval_* and curl_* return the raw table values. The normalized variants
// scale triangle functions by 2 so that every merged function has unit
// tangential circulation along its own edge, on both element kinds.

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "maxlump/error.hpp"
#include "maxlump/mesh.hpp"

namespace maxlump {

inline constexpr int edge_count(ElementKind k) { return vertex_count(k); }

namespace detail {

inline void check_half_index(ElementKind k, int a, int gamma) {
    if (a < 0 || a >= edge_count(k) || (gamma != 0 && gamma != 1))
        throw IndexError("invalid half basis index (edge " + std::to_string(a) + ", endpoint " + std::to_string(gamma) +
                         ")");
}

}  // namespace detail

inline Vec2 eval_half_basis(ElementKind k, int a, int gamma, const Vec2& p) {
    detail::check_half_index(k, a, gamma);
    const double x = p[0], y = p[1];
    if (k == ElementKind::triangle) {
        switch (2 * a + gamma) {
            case 0: return {0.0, 0.5 * x};
            case 1: return {-0.5 * y, 0.0};
            case 2: return {-0.5 * y, -0.5 * y};
            case 3: return {0.0, 0.5 * (x + y - 1.0)};
            case 4: return {0.5 * (1.0 - x - y), 0.0};
            default: return {0.5 * x, 0.5 * x};
        }
    }
    switch (2 * a + gamma) {
        case 0: return {0.5 * (-y * y + y), -x * y + x};
        case 1: return {0.5 * (y * y - y), x * y};
        case 2: return {-x * y, 0.5 * (-x * x + x)};
        case 3: return {-y + x * y, 0.5 * (x * x - x)};
        case 4: return {0.5 * (y * y - y), x * y - y};
        case 5: return {0.5 * (-y * y + y), x + y - x * y - 1.0};
        case 6: return {-x - y + x * y + 1.0, 0.5 * (x * x - x)};
        default: return {-x * y + x, 0.5 * (-x * x + x)};
    }
}

/// Sum of the two halves; the lowest-order Nedelec function of edge `a`.
inline Vec2 eval_merged_basis(ElementKind k, int a, const Vec2& p) {
    detail::check_half_index(k, a, 0);
    const double x = p[0], y = p[1];
    if (k == ElementKind::triangle) {
        switch (a) {
            case 0: return {-0.5 * y, 0.5 * x};
            case 1: return {-0.5 * y, 0.5 * (x - 1.0)};
            default: return {0.5 * (1.0 - y), 0.5 * x};
        }
    }
    switch (a) {
        case 0: return {0.0, x};
        case 1: return {-y, 0.0};
        case 2: return {0.0, x - 1.0};
        default: return {1.0 - y, 0.0};
    }
}

/// Scalar curl d1 v2 - d2 v1 of a raw half function; constant on the element.
inline double curl_half_basis(ElementKind k, int a, int gamma) {
    detail::check_half_index(k, a, gamma);
    return 0.5;
}

inline double curl_merged_basis(ElementKind k, int a) {
    detail::check_half_index(k, a, 0);
    return 1.0;
}

/// Factor applied to the raw tables to obtain unit edge circulation.
inline constexpr double basis_normalization(ElementKind k) { return k == ElementKind::triangle ? 2.0 : 1.0; }

inline Vec2 eval_half_basis_normalized(ElementKind k, int a, int gamma, const Vec2& p) {
    return basis_normalization(k) * eval_half_basis(k, a, gamma, p);
}

inline Vec2 eval_merged_basis_normalized(ElementKind k, int a, const Vec2& p) {
    return basis_normalization(k) * eval_merged_basis(k, a, p);
}

/// Integral of the curl of a normalized half function over the reference
/// element; 1/2 for both kinds.
inline double integrated_curl_half(ElementKind k, int a, int gamma) {
    return basis_normalization(k) * curl_half_basis(k, a, gamma) * reference_area(k);
}

/// Local vertex at which half function (a, gamma) is nonzero; it vanishes at
/// all other vertices.
inline int vertex_of_half(ElementKind k, int a, int gamma) {
    detail::check_half_index(k, a, gamma);
    return local_edge_vertices(k, a)[gamma];
}

struct QuadratureRule {
    std::vector<Vec2> points;
    std::vector<double> weights;  ///< sum to 1; multiply by the element measure
};

/// Equal-weight rule on the reference vertices; exact for affine integrands.
inline QuadratureRule vertex_quadrature(ElementKind k) {
    QuadratureRule q;
    q.points = reference_vertices(k);
    q.weights.assign(q.points.size(), 1.0 / static_cast<double>(q.points.size()));
    return q;
}

namespace detail {

// Gauss-Legendre nodes and weights on [0, 1].
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
    static const std::vector<std::vector<double>> nodes{
        {0.0},
        {-0.57735026918962576451, 0.57735026918962576451},
        {-0.77459666924148337704, 0.0, 0.77459666924148337704},
        {-0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480, 0.86113631159405257522},
        {-0.90617984593866399280, -0.53846931010568309104, 0.0, 0.53846931010568309104, 0.90617984593866399280}};
    static const std::vector<std::vector<double>> weights{
        {2.0},
        {1.0, 1.0},
        {0.55555555555555555556, 0.88888888888888888889, 0.55555555555555555556},
        {0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263, 0.34785484513745385737},
        {0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889, 0.47862867049936646804,
         0.23692688505618908751}};
    if (n < 1 || n > 5) throw InvalidArgument("Gauss-Legendre order must be in [1, 5]");
    x.clear();
    w.clear();
    for (std::size_t i = 0; i < nodes[n - 1].size(); ++i) {
        x.push_back(0.5 * (nodes[n - 1][i] + 1.0));
        w.push_back(0.5 * weights[n - 1][i]);
    }
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [0, 1].
inline QuadratureRule gauss_line_quadrature(int n) {
    std::vector<double> x, w;
    detail::gauss_legendre_01(n, x, w);
    QuadratureRule q;
    for (std::size_t i = 0; i < x.size(); ++i) {
        q.points.push_back({x[i], 0.0});
        q.weights.push_back(w[i]);
    }
    return q;
}

/// Tensor Gauss rule (collapsed onto the triangle), exact for polynomials of
/// total degree 2n-2 on the triangle and 2n-1 per variable on the square.
inline QuadratureRule gauss_quadrature(ElementKind k, int n) {
    std::vector<double> x, w;
    detail::gauss_legendre_01(n, x, w);
    QuadratureRule q;
    const double area = reference_area(k);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (k == ElementKind::triangle) {
                q.points.push_back({x[i], x[j] * (1.0 - x[i])});
                q.weights.push_back(w[i] * w[j] * (1.0 - x[i]) / area);
            } else {
                q.points.push_back({x[i], x[j]});
                q.weights.push_back(w[i] * w[j]);
            }
        }
    return q;
}

/// Human-readable listing of the basis tables, for debugging.
inline void describe_basis(std::ostream& out) {
    out << "# reference edge bases; edge a runs from local vertex (a+1)%n to (a+2)%n,\n"
           "# half gamma=0 lives at the start vertex, gamma=1 at the end vertex.\n"
           "# curl convention: d1 v2 - d2 v1; normalization: triangle x2, square x1.\n";
    const char* tri_half[6] = {"1/2 (0, x)",       "1/2 (-y, 0)", "1/2 (-y, -y)",
                               "1/2 (0, x+y-1)",   "1/2 (1-x-y, 0)", "1/2 (x, x)"};
    const char* tri_merged[3] = {"1/2 (-y, x)", "1/2 (-y, x-1)", "1/2 (1-y, x)"};
    const char* sq_half[8] = {"1/2 (-y^2+y, -2xy+2x)",    "1/2 (y^2-y, 2xy)",
                              "1/2 (-2xy, -x^2+x)",       "1/2 (-2y+2xy, x^2-x)",
                              "1/2 (y^2-y, 2xy-2y)",      "1/2 (-y^2+y, 2x+2y-2xy-2)",
                              "1/2 (-2x-2y+2xy+2, x^2-x)", "1/2 (-2xy+2x, -x^2+x)"};
    const char* sq_merged[4] = {"(0, x)", "(-y, 0)", "(0, x-1)", "(1-y, 0)"};
    for (ElementKind k : {ElementKind::triangle, ElementKind::parallelogram}) {
        const bool tri = k == ElementKind::triangle;
        out << (tri ? "[triangle]" : "[square]") << " normalization " << basis_normalization(k) << '\n';
        for (int a = 0; a < edge_count(k); ++a) {
            const auto lv = local_edge_vertices(k, a);
            out << "edge " << a << ": vertices " << lv[0] << "->" << lv[1] << "  merged "
                << (tri ? tri_merged[a] : sq_merged[a]) << "  curl " << curl_merged_basis(k, a) << '\n';
            for (int g = 0; g < 2; ++g)
                out << "  half " << g << ": " << (tri ? tri_half[2 * a + g] : sq_half[2 * a + g]) << "  curl "
                    << curl_half_basis(k, a, g) << "  vertex " << vertex_of_half(k, a, g) << '\n';
        }
        const auto q = vertex_quadrature(k);
        out << "vertex quadrature:";
        for (std::size_t l = 0; l < q.points.size(); ++l)
            out << " (" << q.points[l][0] << "," << q.points[l][1] << ")*" << q.weights[l];
        out << '\n';
    }
}

}  // namespace maxlump
