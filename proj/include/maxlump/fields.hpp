#pragma once

// Conversions between continuous fields and coefficient vectors:
// edge-circulation interpolation, element means, and pointwise evaluation.

#include <cstddef>
#include <functional>
#include <vector>

#include "maxlump/assembly.hpp"
#include "maxlump/mesh.hpp"
#include "maxlump/reference_basis.hpp"

namespace maxlump {

using VectorFunction = std::function<Vec2(const Vec2&)>;
using ScalarFunction = std::function<double(const Vec2&)>;

/// sum_i e_i phi_i evaluated at F_T(xhat).
inline Vec2 evaluate_edge_field(const Mesh& mesh, const DofMap& dofs, std::span<const double> e, std::size_t t,
                                const Vec2& xhat, const AffineMap& map) {
    const auto& el = mesh.elements()[t];
    Vec2 ref{0.0, 0.0};
    for (int a = 0; a < el.size(); ++a) {
        const std::size_t i = dofs.local_dof(t, a);
        if (i == npos) continue;
        ref = ref + (dofs.local_sign(t, a) * e[i]) * eval_merged_basis_normalized(el.kind, a, xhat);
    }
    return map.inverse_transpose * ref;
}

inline Vec2 evaluate_edge_field(const Mesh& mesh, const DofMap& dofs, std::span<const double> e, std::size_t t,
                                const Vec2& xhat) {
    return evaluate_edge_field(mesh, dofs, e, t, xhat, mesh.affine_map(t));
}

/// Line integral of `field` along edge `edge` (low -> high vertex).
inline double edge_circulation(const Mesh& mesh, std::size_t edge, const VectorFunction& field, int gauss_points = 3) {
    const Vec2 a = mesh.vertices()[mesh.edges()[edge].v[0]];
    const Vec2 d = mesh.edge_vector(edge);
    const QuadratureRule q = gauss_line_quadrature(gauss_points);
    double s = 0.0;
    for (std::size_t l = 0; l < q.points.size(); ++l) s += q.weights[l] * dot(field(a + q.points[l][0] * d), d);
    return s;
}

/// Edge degrees of freedom of `field`: circulations along interior edges.
inline Vector interpolate_edges(const Mesh& mesh, const DofMap& dofs, const VectorFunction& field, int gauss_points = 3) {
    Vector e(dofs.num_edge_dofs());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = edge_circulation(mesh, dofs.dof_edge(i), field, gauss_points);
    return e;
}

/// Element averages of `field` by tensor Gauss quadrature.
inline Vector element_means(const Mesh& mesh, const ScalarFunction& field, int gauss_points = 4) {
    Vector h(mesh.num_elements());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto& el = mesh.elements()[t];
        const AffineMap map = mesh.affine_map(t);
        const QuadratureRule q = gauss_quadrature(el.kind, gauss_points);
        double s = 0.0;
        for (std::size_t l = 0; l < q.points.size(); ++l) s += q.weights[l] * field(map(q.points[l]));
        h[t] = s;
    }
    return h;
}

}  // namespace maxlump
