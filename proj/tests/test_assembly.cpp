#include <gtest/gtest.h>

#include <cmath>

#include "maxlump/assembly.hpp"
#include "maxlump/error.hpp"
#include "maxlump/fields.hpp"
#include "test_util.hpp"

using namespace maxlump;

namespace {

MaterialField unit(const Mesh& m) { return MaterialField::uniform(m.num_elements()); }

// Two unit squares sharing the edge x = 1.
Mesh two_squares() { return build_structured_quad_mesh(2, 1, BBox{0.0, 2.0, 0.0, 1.0}); }

Mesh random_tri_mesh() { return perturb_interior_vertices(build_structured_tri_mesh(7, 6), 0.3, 21); }

MaterialField random_materials(const Mesh& m, std::uint64_t seed) {
    const Vector r = test::random_vector(4 * m.num_elements(), seed, 0.0, 1.0);
    std::vector<Mat2> eps;
    std::vector<double> mu;
    for (std::size_t t = 0; t < m.num_elements(); ++t) {
        const double a = 1.0 + 2.0 * r[4 * t], b = 1.0 + 2.0 * r[4 * t + 1], c = 0.4 * (r[4 * t + 2] - 0.5);
        eps.push_back(Mat2{{a, c, c, b}});
        mu.push_back(0.5 + r[4 * t + 3]);
    }
    return MaterialField(eps, mu);
}

}  // namespace

TEST(MaterialFieldTest, Validation) {
    EXPECT_THROW(MaterialField({Mat2{{1, 0, 0, 1}}}, {0.0}), Error);
    EXPECT_THROW(MaterialField({Mat2{{1, 0.5, 0, 1}}}, {1.0}), Error);
    EXPECT_THROW(MaterialField({Mat2{{1, 2, 2, 1}}}, {1.0}), Error);
    EXPECT_THROW(MaterialField({Mat2::identity()}, {1.0, 2.0}), ShapeError);
    Mesh m = build_structured_quad_mesh(2, 1);
    m.set_region(1, 5);
    EXPECT_THROW(MaterialField::from_regions(m, {{0, Material{}}}), ConfigError);
    const auto f = MaterialField::from_regions(m, {{0, Material{}}, {5, Material::isotropic(3.0, 2.0)}});
    EXPECT_EQ(f.mu(1), 2.0);
    EXPECT_EQ(f.eps(1)(1, 1), 3.0);
}

TEST(DofMapTest, HalvesSitAtEdgeEndpoints) {
    const Mesh m = build_structured_hybrid_mesh(3, 3);
    const DofMap d(m);
    EXPECT_EQ(d.num_edge_dofs(), m.num_interior_edges());
    const std::size_t ne = d.num_edge_dofs();
    for (std::size_t i = 0; i < ne; ++i) {
        const auto& e = m.edges()[d.dof_edge(i)];
        EXPECT_FALSE(e.boundary());
        EXPECT_EQ(d.edge_dof(d.dof_edge(i)), i);
        EXPECT_EQ(d.half_vertex(i), e.v[0]);
        EXPECT_EQ(d.half_vertex(i + ne), e.v[1]);
    }
}

TEST(MassH, Examples) {
    EXPECT_EQ(assemble_mass_H(build_structured_quad_mesh(1, 1), unit(build_structured_quad_mesh(1, 1)))[0], 1.0);
    const Mesh tri({{0, 0}, {1, 0}, {0, 1}}, {Element{ElementKind::triangle, {0, 1, 2, npos}, 0}});
    EXPECT_EQ(assemble_mass_H(tri, MaterialField::uniform(1, Material::isotropic(1.0, 2.0)))[0], 1.0);
    const double h = 0.3;
    const Mesh sq = build_structured_quad_mesh(1, 1, BBox{0, h, 0, h});
    EXPECT_NEAR(assemble_mass_H(sq, MaterialField::uniform(1, Material::isotropic(1.0, 3.0)))[0], 3 * h * h, 1e-16);
    EXPECT_THROW(assemble_mass_H(sq, MaterialField::uniform(2)), ShapeError);
}

TEST(LumpedMass, UniformGridHalves) {
    const Mesh m = build_structured_quad_mesh(4, 3, BBox{0, 4, 0, 3});
    const DofMap d(m);
    const VertexBlockMatrix mt = assemble_lumped_mass_E(m, unit(m), d);
    for (const auto& b : mt.blocks())
        for (std::size_t i = 0; i < b.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) EXPECT_NEAR(b(i, j), i == j ? 0.5 : 0.0, 1e-15);
}

TEST(LumpedMass, Anisotropic) {
    const double ex = 2.0, ey = 5.0;
    const Mesh m = build_structured_quad_mesh(3, 3, BBox{0, 1.5, 0, 1.5});
    const DofMap d(m);
    const auto mat = MaterialField::uniform(m.num_elements(), Material{Mat2{{ex, 0, 0, ey}}, 1.0});
    const VertexBlockMatrix mt = assemble_lumped_mass_E(m, mat, d);
    const std::size_t ne = d.num_edge_dofs();
    for (std::size_t h = 0; h < 2 * ne; ++h) {
        const Vec2 dir = m.edge_vector(d.dof_edge(h % ne));
        const bool x_directed = std::abs(dir[1]) < 1e-15;
        EXPECT_NEAR(mt.at(h, h), 0.5 * (x_directed ? ex : ey), 1e-14);
        for (std::size_t k = 0; k < 2 * ne; ++k)
            if (k != h) {
                EXPECT_EQ(mt.at(h, k), 0.0);
            }
    }
}

TEST(LumpedMass, SingleElementIsEmpty) {
    const Mesh m = build_structured_quad_mesh(1, 1);
    const DofMap d(m);
    const VertexBlockMatrix mt = assemble_lumped_mass_E(m, unit(m), d);
    EXPECT_EQ(mt.size(), 0u);
    EXPECT_EQ(build_inverse_mass_E(mt, build_projection(d)).rows(), 0u);
}

TEST(LumpedMass, BlocksAreSpdOnGeneralMeshes) {
    for (const Mesh& m : {random_tri_mesh(), build_structured_hybrid_mesh(5, 4)}) {
        const DofMap d(m);
        const VertexBlockMatrix mt = assemble_lumped_mass_E(m, random_materials(m, 3), d);
        for (std::size_t i = 0; i < mt.size(); ++i)
            for (std::size_t j = 0; j < mt.size(); ++j)
                if (d.half_vertex(i) != d.half_vertex(j)) {
                    EXPECT_EQ(mt.at(i, j), 0.0);
                }
        EXPECT_NO_THROW(invert_blocks(mt));
    }
}

TEST(CurlTilde, SingleInteriorEdge) {
    const Mesh m = two_squares();
    const DofMap d(m);
    ASSERT_EQ(d.num_edge_dofs(), 1u);
    const auto ct = test::to_dense(assemble_curl_tilde(m, d));
    for (std::size_t h = 0; h < 2; ++h) {
        EXPECT_EQ(std::abs(ct[0][h]), 0.5);
        EXPECT_EQ(ct[0][h] + ct[1][h], 0.0);
    }
    EXPECT_EQ(ct[0][0], ct[0][1]);
}

TEST(CurlTilde, InteriorElementRowSumVanishes) {
    const Mesh m = build_structured_quad_mesh(4, 4);
    const DofMap d(m);
    const SparseMatrix ct = assemble_curl_tilde(m, d);
    for (std::size_t t = 0; t < m.num_elements(); ++t) {
        bool interior = true;
        for (int a = 0; a < 4; ++a) interior = interior && d.local_dof(t, a) != npos;
        if (!interior) continue;
        double s = 0.0;
        for (double v : ct.row_values(t)) s += v;
        EXPECT_EQ(ct.row_values(t).size(), 8u);
        EXPECT_EQ(s, 0.0);
    }
}

TEST(Projection, Examples) {
    const DofMap one(two_squares());
    const auto p = test::to_dense(build_projection(one));
    EXPECT_EQ(p, (test::Dense{{0.5, 0.5}}));

    const Mesh m = build_structured_hybrid_mesh(3, 2);
    const DofMap d(m);
    const SparseMatrix pm = build_projection(d);
    const Vector x = test::random_vector(d.num_edge_dofs(), 8);
    Vector xx = x;
    xx.insert(xx.end(), x.begin(), x.end());
    EXPECT_EQ(pm * xx, x);
    const auto ppt = test::to_dense(multiply(pm, pm.transpose()));
    for (std::size_t i = 0; i < ppt.size(); ++i)
        for (std::size_t j = 0; j < ppt.size(); ++j) EXPECT_EQ(ppt[i][j], i == j ? 0.5 : 0.0);
}

TEST(Curl, SingleInteriorEdge) {
    const Mesh m = two_squares();
    const DofMap d(m);
    const auto c = test::to_dense(assemble_curl(m, d));
    EXPECT_EQ(std::abs(c[0][0]), 1.0);
    EXPECT_EQ(c[0][0] + c[1][0], 0.0);
}

TEST(Curl, YeeStencilOnGrid) {
    const Mesh m = build_structured_quad_mesh(4, 4);
    const DofMap d(m);
    const SparseMatrix c = assemble_curl(m, d);
    for (std::size_t t = 0; t < m.num_elements(); ++t) {
        for (double v : c.row_values(t)) EXPECT_EQ(std::abs(v), 1.0);
        bool interior = true;
        for (int a = 0; a < 4; ++a) interior = interior && d.local_dof(t, a) != npos;
        if (interior) {
            EXPECT_EQ(c.row_values(t).size(), 4u);
        }
    }
}

TEST(Curl, AnnihilatesDiscreteGradients) {
    const Mesh m = random_tri_mesh();
    const DofMap d(m);
    // edge values of a gradient: potential difference high - low
    const Vector phi = test::random_vector(m.num_vertices(), 4);
    Vector e(d.num_edge_dofs());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto& edge = m.edges()[d.dof_edge(i)];
        e[i] = phi[edge.v[1]] - phi[edge.v[0]];
    }
    const Vector ce = assemble_curl(m, d) * e;
    for (std::size_t t = 0; t < m.num_elements(); ++t) {
        bool interior = true;
        for (int a = 0; a < 3; ++a) interior = interior && d.local_dof(t, a) != npos;
        if (interior) {
            EXPECT_NEAR(ce[t], 0.0, 1e-14);
        }
    }
}

TEST(Curl, EqualsCurlTildeTimesProjectionOnHybridMesh) {
    const Mesh m = build_structured_hybrid_mesh(9, 8, BBox{-1.0, 1.5, 0.0, 2.0});
    const DofMap d(m);
    const auto lhs = test::to_dense(assemble_curl_tilde(m, d));
    const auto rhs = test::to_dense(multiply(assemble_curl(m, d), build_projection(d)));
    EXPECT_EQ(lhs, rhs);
}

TEST(InverseMass, UniformGridIsIdentity) {
    for (double eps : {1.0, 4.0}) {
        const Mesh m = build_structured_quad_mesh(5, 4, BBox{0, 0.5, 0, 0.4});
        const DofMap d(m);
        const auto mat = MaterialField::uniform(m.num_elements(), Material::isotropic(eps));
        const SparseMatrix mi = build_inverse_mass_E(assemble_lumped_mass_E(m, mat, d), build_projection(d));
        EXPECT_EQ(mi.nnz(), d.num_edge_dofs());
        for (std::size_t i = 0; i < mi.rows(); ++i) EXPECT_NEAR(mi.at(i, i), 1.0 / eps, 1e-14);
    }
}

TEST(InverseMass, SymmetricPositiveOnUnstructuredMesh) {
    const Mesh m = random_tri_mesh();
    const auto mat = random_materials(m, 5);
    const SystemMatrices s = assemble_system(m, mat);
    const auto& mi = s.inverse_mass_E;
    for (std::size_t i = 0; i < mi.rows(); ++i) {
        const auto idx = mi.row_indices(i);
        for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(mi.at(idx[k], i), mi.row_values(i)[k]);
    }
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Vector x = test::random_vector(mi.rows(), 1000 + seed);
        EXPECT_GT(dot(x, mi * x), 0.0);
    }
}

TEST(Stiffness, SingleInteriorEdge) {
    const Mesh m = two_squares();
    const DofMap d(m);
    const SparseMatrix k = assemble_stiffness(m, unit(m), d);
    EXPECT_EQ(test::to_dense(k), (test::Dense{{2.0}}));
}

TEST(Stiffness, EqualsCurlTripleProduct) {
    for (const Mesh& m : {random_tri_mesh(), build_structured_hybrid_mesh(6, 5, BBox{0, 3, 0, 1})}) {
        const auto mat = random_materials(m, 9);
        const DofMap d(m);
        const SparseMatrix k = assemble_stiffness(m, mat, d);
        const SparseMatrix c = assemble_curl(m, d);
        const SparseMatrix ref = multiply(c.transpose(), c.scaled_rows(assemble_mass_H(m, mat).inverse().values()));
        const auto a = test::to_dense(k), b = test::to_dense(ref);
        const double scale = ref.max_abs_value();
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j) EXPECT_LE(std::abs(a[i][j] - b[i][j]), 1e-13 * scale);
    }
}

TEST(Stiffness, ConstantFieldIsInKernel) {
    const Mesh m = random_tri_mesh();
    const DofMap d(m);
    const Vector e = interpolate_edges(m, d, [](const Vec2&) { return Vec2{0.7, -1.3}; });
    const Vector ke = assemble_stiffness(m, unit(m), d) * e;
    // boundary edges carry no dofs, so only rows away from the boundary see the full field
    auto fully_interior = [&](std::size_t t) {
        for (int a = 0; a < 3; ++a)
            if (d.local_dof(t, a) == npos) return false;
        return true;
    };
    std::size_t checked = 0;
    for (std::size_t i = 0; i < ke.size(); ++i) {
        const auto& edge = m.edges()[d.dof_edge(i)];
        if (!fully_interior(edge.elements[0]) || !fully_interior(edge.elements[1])) continue;
        EXPECT_LT(std::abs(ke[i]), 1e-12);
        ++checked;
    }
    EXPECT_GT(checked, 50u);
}
