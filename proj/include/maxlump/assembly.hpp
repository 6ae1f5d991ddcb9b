#pragma once

// Degree-of-freedom numbering and assembly of the semi-discrete Maxwell
// system  M_eps de/dt = C^T h,  M_mu dh/dt = -C e  on hybrid meshes.
//
// e lives on interior edges (lowest-order Nedelec, unit edge circulation),
// h is piecewise constant per element. The eps mass is never formed: its
// inverse is P * inv(Mtilde_eps) * P^T, where Mtilde_eps is the vertex-rule
// lumped mass of the enriched space with two half functions per edge.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "maxlump/error.hpp"
#include "maxlump/mesh.hpp"
#include "maxlump/reference_basis.hpp"
#include "maxlump/sparse_linalg.hpp"

namespace maxlump {

/// Material parameter pair for one region.
struct Material {
    Mat2 eps = Mat2::identity();  ///< symmetric positive definite
    double mu = 1.0;

    static Material isotropic(double eps, double mu = 1.0) { return {Mat2{{eps, 0.0, 0.0, eps}}, mu}; }
};

/// Piecewise-constant permittivity tensor and permeability per element.
class MaterialField {
public:
    MaterialField() = default;

    MaterialField(std::vector<Mat2> eps, std::vector<double> mu) : eps_(std::move(eps)), mu_(std::move(mu)) {
        if (eps_.size() != mu_.size()) throw ShapeError("material arrays differ in length");
        for (std::size_t t = 0; t < eps_.size(); ++t) validate(eps_[t], mu_[t], t);
    }

    static MaterialField uniform(std::size_t num_elements, const Material& m = {}) {
        return MaterialField(std::vector<Mat2>(num_elements, m.eps), std::vector<double>(num_elements, m.mu));
    }

    /// One material per element region tag; every region in the mesh must be mapped.
    static MaterialField from_regions(const Mesh& mesh, const std::map<int, Material>& regions) {
        std::vector<Mat2> eps;
        std::vector<double> mu;
        for (const auto& el : mesh.elements()) {
            auto it = regions.find(el.region);
            if (it == regions.end()) throw ConfigError("no material for region " + std::to_string(el.region));
            eps.push_back(it->second.eps);
            mu.push_back(it->second.mu);
        }
        return MaterialField(std::move(eps), std::move(mu));
    }

    std::size_t size() const { return mu_.size(); }
    const Mat2& eps(std::size_t t) const { return eps_[t]; }
    double mu(std::size_t t) const { return mu_[t]; }

    void set(std::size_t t, const Material& m) {
        validate(m.eps, m.mu, t);
        eps_.at(t) = m.eps;
        mu_.at(t) = m.mu;
    }

private:
    static void validate(const Mat2& e, double mu, std::size_t t) {
        const double scale = std::max(std::abs(e(0, 0)), std::abs(e(1, 1)));
        if (std::abs(e(0, 1) - e(1, 0)) > 1e-14 * scale)
            throw InvalidArgument("permittivity of element " + std::to_string(t) + " is not symmetric");
        if (!(e(0, 0) > 0.0) || !(e.det() > 0.0))
            throw InvalidArgument("permittivity of element " + std::to_string(t) + " is not positive definite");
        if (!(mu > 0.0)) throw InvalidArgument("permeability of element " + std::to_string(t) + " is not positive");
    }

    std::vector<Mat2> eps_;
    std::vector<double> mu_;
};

/// Numbering of edge, half-edge and element unknowns.
///
/// Interior edges are numbered i = 0..n_e-1 in mesh edge order. Half dof i
/// sits at the low vertex of edge i, half dof i + n_e at the high vertex.
class DofMap {
public:
    DofMap() = default;

    explicit DofMap(const Mesh& mesh) : num_elements_(mesh.num_elements()) {
        edge_dof_.assign(mesh.num_edges(), npos);
        for (std::size_t e = 0; e < mesh.num_edges(); ++e)
            if (!mesh.edges()[e].boundary()) {
                edge_dof_[e] = dof_edge_.size();
                dof_edge_.push_back(e);
            }
        const std::size_t ne = dof_edge_.size();
        half_vertex_.resize(2 * ne);
        for (std::size_t i = 0; i < ne; ++i) {
            half_vertex_[i] = mesh.edges()[dof_edge_[i]].v[0];
            half_vertex_[i + ne] = mesh.edges()[dof_edge_[i]].v[1];
        }
        local_dof_.resize(mesh.num_elements());
        local_sign_.resize(mesh.num_elements());
        for (std::size_t t = 0; t < mesh.num_elements(); ++t)
            for (int a = 0; a < mesh.elements()[t].size(); ++a) {
                local_dof_[t][a] = edge_dof_[mesh.element_edge(t, a)];
                local_sign_[t][a] = mesh.element_edge_sign(t, a);
            }
    }

    std::size_t num_edge_dofs() const { return dof_edge_.size(); }
    std::size_t num_half_dofs() const { return 2 * dof_edge_.size(); }
    std::size_t num_element_dofs() const { return num_elements_; }

    std::size_t edge_dof(std::size_t edge) const { return edge_dof_[edge]; }
    std::size_t dof_edge(std::size_t dof) const { return dof_edge_[dof]; }
    std::size_t half_vertex(std::size_t half) const { return half_vertex_[half]; }
    std::span<const std::size_t> half_vertices() const { return half_vertex_; }

    /// Edge dof of local edge `a` of element `t`, npos on boundary edges.
    std::size_t local_dof(std::size_t t, int a) const { return local_dof_[t][a]; }
    int local_sign(std::size_t t, int a) const { return local_sign_[t][a]; }

    /// Half dof carried by local edge `a` of element `t` at mesh vertex `vertex`.
    std::size_t half_dof(std::size_t t, int a, std::size_t vertex) const {
        const std::size_t i = local_dof_[t][a];
        if (i == npos) return npos;
        return half_vertex_[i] == vertex ? i : i + num_edge_dofs();
    }

private:
    std::size_t num_elements_ = 0;
    std::vector<std::size_t> edge_dof_, dof_edge_, half_vertex_;
    std::vector<std::array<std::size_t, 4>> local_dof_;
    std::vector<std::array<int, 4>> local_sign_;
};

namespace detail {

inline void check_materials(const Mesh& mesh, const MaterialField& m) {
    if (m.size() != mesh.num_elements())
        throw ShapeError("material field has " + std::to_string(m.size()) + " entries for " +
                         std::to_string(mesh.num_elements()) + " elements");
}

}  // namespace detail

/// Diagonal H mass: entry t = mu_t |T|.
inline DiagonalMatrix assemble_mass_H(const Mesh& mesh, const MaterialField& materials) {
    detail::check_materials(mesh, materials);
    Vector d(mesh.num_elements());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) d[t] = materials.mu(t) * mesh.element_area(t);
    return DiagonalMatrix(std::move(d));
}

/// Vertex-rule lumped mass of the enriched space. Each half function is
/// nonzero at exactly one quadrature point, so entries only couple halves
/// sharing a vertex and the result is block diagonal by construction.
inline VertexBlockMatrix assemble_lumped_mass_E(const Mesh& mesh, const MaterialField& materials, const DofMap& dofs) {
    detail::check_materials(mesh, materials);
    VertexBlockMatrix m(mesh.num_vertices(), dofs.half_vertices());
    struct Half {
        std::size_t dof;
        Vec2 value;
    };
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto& el = mesh.elements()[t];
        const AffineMap map = mesh.affine_map(t);
        const QuadratureRule q = vertex_quadrature(el.kind);
        const double area = map.determinant * reference_area(el.kind);
        const Mat2& eps = materials.eps(t);
        for (int k = 0; k < el.size(); ++k) {
            std::array<Half, 2> halves{};
            int count = 0;
            for (int a = 0; a < el.size(); ++a)
                for (int g = 0; g < 2; ++g) {
                    if (vertex_of_half(el.kind, a, g) != k) continue;
                    const std::size_t h = dofs.half_dof(t, a, el.v[k]);
                    if (h == npos) continue;
                    const Vec2 ref = eval_half_basis_normalized(el.kind, a, g, q.points[k]);
                    halves[count++] = {h, static_cast<double>(dofs.local_sign(t, a)) * (map.inverse_transpose * ref)};
                }
            const double w = area * q.weights[k];
            for (int i = 0; i < count; ++i)
                for (int j = 0; j < count; ++j)
                    m.add(halves[i].dof, halves[j].dof, w * dot(eps * halves[j].value, halves[i].value));
        }
    }
    return m;
}

/// Enriched curl matrix, n_T x 2n_e: entry (t, half) = integral over T of the
/// curl of the half function (covariant Piola keeps it equal to the reference
/// integral, +-1/2 with unit-circulation normalization).
inline SparseMatrix assemble_curl_tilde(const Mesh& mesh, const DofMap& dofs) {
    std::vector<Triplet> t;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements()[e];
        for (int a = 0; a < el.size(); ++a)
            for (int g = 0; g < 2; ++g) {
                const std::size_t h = dofs.half_dof(e, a, el.v[vertex_of_half(el.kind, a, g)]);
                if (h == npos) continue;
                t.push_back({e, h, dofs.local_sign(e, a) * integrated_curl_half(el.kind, a, g)});
            }
    }
    return SparseMatrix::from_triplets(mesh.num_elements(), dofs.num_half_dofs(), std::move(t));
}

/// Reduced curl matrix, n_T x n_e, entries +-1.
inline SparseMatrix assemble_curl(const Mesh& mesh, const DofMap& dofs) {
    std::vector<Triplet> t;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements()[e];
        for (int a = 0; a < el.size(); ++a) {
            const std::size_t i = dofs.local_dof(e, a);
            if (i == npos) continue;
            t.push_back({e, i,
                         dofs.local_sign(e, a) * basis_normalization(el.kind) * curl_merged_basis(el.kind, a) *
                             reference_area(el.kind)});
        }
    }
    return SparseMatrix::from_triplets(mesh.num_elements(), dofs.num_edge_dofs(), std::move(t));
}

/// Averaging map from half dofs to edge dofs: P(i, i) = P(i, i + n_e) = 1/2.
inline SparseMatrix build_projection(const DofMap& dofs) {
    const std::size_t ne = dofs.num_edge_dofs();
    std::vector<Triplet> t;
    t.reserve(2 * ne);
    for (std::size_t i = 0; i < ne; ++i) {
        t.push_back({i, i, 0.5});
        t.push_back({i, i + ne, 0.5});
    }
    return SparseMatrix::from_triplets(ne, 2 * ne, std::move(t));
}

/// inv(M_eps) = P inv(Mtilde_eps) P^T; couples only edges sharing a vertex.
inline SparseMatrix build_inverse_mass_E(const VertexBlockMatrix& lumped_mass, const SparseMatrix& projection) {
    return triple_product(projection, invert_blocks(lumped_mass));
}

/// K(i, j) = sum_T (1/mu_T) * integral_T curl(phi_j) curl(phi_i), assembled
/// element by element without forming C or M_mu.
inline SparseMatrix assemble_stiffness(const Mesh& mesh, const MaterialField& materials, const DofMap& dofs) {
    detail::check_materials(mesh, materials);
    std::vector<Triplet> t;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements()[e];
        const double det = mesh.affine_map(e).determinant;
        const double area = det * reference_area(el.kind);
        std::array<double, 4> curl{};
        for (int a = 0; a < el.size(); ++a)
            curl[a] = dofs.local_sign(e, a) * basis_normalization(el.kind) * curl_merged_basis(el.kind, a) / det;
        for (int a = 0; a < el.size(); ++a) {
            const std::size_t i = dofs.local_dof(e, a);
            if (i == npos) continue;
            for (int b = 0; b < el.size(); ++b) {
                const std::size_t j = dofs.local_dof(e, b);
                if (j == npos) continue;
                t.push_back({i, j, area * curl[a] * curl[b] / materials.mu(e)});
            }
        }
    }
    return SparseMatrix::from_triplets(dofs.num_edge_dofs(), dofs.num_edge_dofs(), std::move(t));
}

/// Everything an explicit run needs, assembled once.
struct SystemMatrices {
    DofMap dofs;
    DiagonalMatrix mass_H;
    DiagonalMatrix inverse_mass_H;
    VertexBlockMatrix lumped_mass_E;
    SparseMatrix curl;
    SparseMatrix curl_transpose;
    SparseMatrix projection;
    SparseMatrix inverse_mass_E;
};

inline SystemMatrices assemble_system(const Mesh& mesh, const MaterialField& materials) {
    SystemMatrices s;
    s.dofs = DofMap(mesh);
    s.mass_H = assemble_mass_H(mesh, materials);
    s.inverse_mass_H = s.mass_H.inverse();
    s.lumped_mass_E = assemble_lumped_mass_E(mesh, materials, s.dofs);
    s.curl = assemble_curl(mesh, s.dofs);
    s.curl_transpose = s.curl.transpose();
    s.projection = build_projection(s.dofs);
    s.inverse_mass_E = build_inverse_mass_E(s.lumped_mass_E, s.projection);
    return s;
}

}  // namespace maxlump
