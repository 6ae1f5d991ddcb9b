#pragma once

// Exact cavity solutions, discrete error norms, convergence tables, and the
// finite-difference Yee scheme used as an independent oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "maxlump/assembly.hpp"
#include "maxlump/fields.hpp"
#include "maxlump/mesh.hpp"
#include "maxlump/timestepper.hpp"

namespace maxlump {

/// Standing TE mode (m, n) of the PEC unit square with eps = mu = 1:
///   H  = cos(m pi x) cos(n pi y) cos(w t)
///   Ex = -(n pi / w) cos(m pi x) sin(n pi y) sin(w t)
///   Ey =  (m pi / w) sin(m pi x) cos(n pi y) sin(w t),   w = pi sqrt(m^2 + n^2).
struct CavityMode {
    int m = 1, n = 1;

    double omega() const { return std::numbers::pi * std::sqrt(static_cast<double>(m * m + n * n)); }

    Vec2 E(double t, const Vec2& x) const {
        const double pi = std::numbers::pi, w = omega(), s = std::sin(w * t);
        return {-(n * pi / w) * std::cos(m * pi * x[0]) * std::sin(n * pi * x[1]) * s,
                (m * pi / w) * std::sin(m * pi * x[0]) * std::cos(n * pi * x[1]) * s};
    }

    double H(double t, const Vec2& x) const {
        const double pi = std::numbers::pi;
        return std::cos(m * pi * x[0]) * std::cos(n * pi * x[1]) * std::cos(omega() * t);
    }
};

inline CavityMode cavity_mode(int m, int n) {
    if (m < 1 || n < 1) throw InvalidArgument("cavity mode indices must be >= 1");
    return {m, n};
}

struct ErrorNorms {
    double err_E = 0.0;        ///< || sum e_i phi_i - E ||
    double err_H = 0.0;        ///< || h - H ||
    double err_H_super = 0.0;  ///< || h - pi0 H ||, pi0 = element means
};

/// L2 errors against an exact solution, by tensor Gauss quadrature per element.
inline ErrorNorms error_norms(const Mesh& mesh, const DofMap& dofs, std::span<const double> e, std::span<const double> h,
                              const VectorFunction& exact_E, const ScalarFunction& exact_H, int gauss_points = 4) {
    ErrorNorms r;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto& el = mesh.elements()[t];
        const AffineMap map = mesh.affine_map(t);
        const double area = map.determinant * reference_area(el.kind);
        const QuadratureRule q = gauss_quadrature(el.kind, gauss_points);
        double mean = 0.0, eE = 0.0, eH = 0.0;
        for (std::size_t l = 0; l < q.points.size(); ++l) {
            const Vec2 x = map(q.points[l]);
            const Vec2 d = evaluate_edge_field(mesh, dofs, e, t, q.points[l], map) - exact_E(x);
            const double hx = exact_H(x);
            eE += q.weights[l] * dot(d, d);
            eH += q.weights[l] * (h[t] - hx) * (h[t] - hx);
            mean += q.weights[l] * hx;
        }
        r.err_E += area * eE;
        r.err_H += area * eH;
        r.err_H_super += area * (h[t] - mean) * (h[t] - mean);
    }
    r.err_E = std::sqrt(r.err_E);
    r.err_H = std::sqrt(r.err_H);
    r.err_H_super = std::sqrt(r.err_H_super);
    return r;
}

/// L2 norms of a discrete (e, h) pair: || sum e_i phi_i || and || h ||.
inline std::pair<double, double> discrete_l2_norms(const Mesh& mesh, const DofMap& dofs, std::span<const double> e,
                                                   std::span<const double> h, int gauss_points = 3) {
    double ne = 0.0, nh = 0.0;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto& el = mesh.elements()[t];
        const AffineMap map = mesh.affine_map(t);
        const double area = map.determinant * reference_area(el.kind);
        const QuadratureRule q = gauss_quadrature(el.kind, gauss_points);
        double s = 0.0;
        for (std::size_t l = 0; l < q.points.size(); ++l) {
            const Vec2 v = evaluate_edge_field(mesh, dofs, e, t, q.points[l], map);
            s += q.weights[l] * dot(v, v);
        }
        ne += area * s;
        nh += area * h[t] * h[t];
    }
    return {std::sqrt(ne), std::sqrt(nh)};
}

struct EocRow {
    double h = 0.0;
    std::size_t dofs = 0;
    double error_E = 0.0;
    std::optional<double> eoc_E;
    double error_H_super = 0.0;
    std::optional<double> eoc_H;
};

struct EocTable {
    std::string reference;  ///< how errors were measured
    std::vector<EocRow> rows;
    std::string failure;  ///< non-empty if a level blew up and the table was truncated

    /// log2 of successive error ratios; assumes h halves between rows.
    void compute_rates() {
        for (std::size_t i = 1; i < rows.size(); ++i) {
            auto rate = [](double prev, double cur) -> std::optional<double> {
                if (prev > 0.0 && cur > 0.0) return std::log2(prev / cur);
                return std::nullopt;
            };
            rows[i].eoc_E = rate(rows[i - 1].error_E, rows[i].error_E);
            rows[i].eoc_H = rate(rows[i - 1].error_H_super, rows[i].error_H_super);
        }
    }

    void write_text(std::ostream& out) const {
        out << "# " << reference << '\n';
        out << std::setw(12) << "h" << std::setw(10) << "dof" << std::setw(16) << "err_E" << std::setw(8) << "eoc"
            << std::setw(16) << "err_H_super" << std::setw(8) << "eoc" << '\n';
        for (const auto& r : rows) {
            auto fmt_rate = [](const std::optional<double>& v) {
                std::ostringstream s;
                if (v) s << std::fixed << std::setprecision(2) << *v;
                else s << "---";
                return s.str();
            };
            std::ostringstream hs;
            hs << std::setprecision(6) << r.h;
            out << std::setw(12) << hs.str() << std::setw(10) << r.dofs << std::setw(16) << std::scientific
                << std::setprecision(6) << r.error_E << std::setw(8) << fmt_rate(r.eoc_E) << std::setw(16)
                << r.error_H_super << std::setw(8) << fmt_rate(r.eoc_H) << std::defaultfloat << '\n';
        }
        if (!failure.empty()) out << "# truncated: " << failure << '\n';
    }

    void write_csv(std::ostream& out) const {
        out << "h,dof,err_E,eoc_E,err_H_super,eoc_H\n";
        const auto old = out.precision(17);
        for (const auto& r : rows) {
            out << r.h << ',' << r.dofs << ',' << r.error_E << ',';
            if (r.eoc_E) out << *r.eoc_E;
            out << ',' << r.error_H_super << ',';
            if (r.eoc_H) out << *r.eoc_H;
            out << '\n';
        }
        out.precision(old);
    }
};

/// A fully specified initial-value problem on a given mesh.
struct Problem {
    MaterialField materials;
    VectorFunction initial_E;                                     ///< E at t = 0; empty means zero
    std::function<double(double, const Vec2&)> initial_H;         ///< H(t, x); sampled at t = dt/2
    std::function<SourceTerm(const Mesh&, const DofMap&)> source;  ///< optional
};

/// Result of integrating a Problem up to a fixed end time.
struct Solution {
    FieldState state;    ///< e at end_time, h half a step later
    Vector h_synced;     ///< h interpolated to end_time (mean of the two adjacent half steps)
    double dt = 0.0;
    std::size_t steps = 0;
};

/// Integrates `steps` leapfrog steps of size end_time / steps.
inline Solution solve(const Mesh& mesh, const Problem& problem, double end_time, std::size_t steps,
                      const SnapshotCallback& observer = {}, std::size_t stride = 1) {
    if (!(end_time > 0.0)) throw InvalidArgument("end time must be positive");
    if (steps == 0) throw InvalidArgument("step count must be positive");
    const SystemMatrices m = assemble_system(mesh, problem.materials);
    Solution sol;
    sol.steps = steps;
    sol.dt = end_time / static_cast<double>(steps);
    FieldState s;
    s.e = problem.initial_E ? interpolate_edges(mesh, m.dofs, problem.initial_E) : Vector(m.dofs.num_edge_dofs(), 0.0);
    const double th = 0.5 * sol.dt;
    s.h = problem.initial_H ? element_means(mesh, [&](const Vec2& x) { return problem.initial_H(th, x); })
                            : Vector(mesh.num_elements(), 0.0);
    s.time_e = 0.0;
    s.time_h = th;
    const SourceTerm src = problem.source ? problem.source(mesh, m.dofs) : SourceTerm{};
    sol.state = run_leapfrog(std::move(s), sol.dt, sol.steps, m, src, observer, stride);
    const Vector ce = m.curl * std::span<const double>(sol.state.e);
    sol.h_synced = sol.state.h;
    for (std::size_t t = 0; t < sol.h_synced.size(); ++t)
        sol.h_synced[t] += 0.5 * sol.dt * m.inverse_mass_H[t] * ce[t];
    return sol;
}

/// Smallest step count with end_time / steps <= cfl_fraction * dt_max on `mesh`.
inline std::size_t steps_for_cfl(const Mesh& mesh, const MaterialField& materials, double end_time, double cfl_fraction) {
    if (!(end_time > 0.0)) throw InvalidArgument("end time must be positive");
    if (!(cfl_fraction > 0.0 && cfl_fraction <= 1.0)) throw InvalidArgument("CFL fraction must lie in (0, 1]");
    const DofMap dofs(mesh);
    const SparseMatrix k = assemble_stiffness(mesh, materials, dofs);
    const SparseMatrix minv = build_inverse_mass_E(assemble_lumped_mass_E(mesh, materials, dofs), build_projection(dofs));
    return static_cast<std::size_t>(std::ceil(end_time / (cfl_fraction * estimate_cfl(minv, k))));
}

/// Composition of per-level refinement maps, fine level to coarse level.
struct NestedMap {
    std::vector<std::size_t> element_parent;
    std::vector<std::size_t> edge_parent;
    std::vector<int> edge_sign;
};

inline NestedMap compose(const NestedMap& fine_to_mid, const RefinementMap& mid_to_coarse) {
    NestedMap r;
    r.element_parent.resize(fine_to_mid.element_parent.size());
    r.edge_parent.assign(fine_to_mid.edge_parent.size(), npos);
    r.edge_sign.assign(fine_to_mid.edge_parent.size(), 0);
    for (std::size_t t = 0; t < r.element_parent.size(); ++t)
        r.element_parent[t] = mid_to_coarse.element_parent[fine_to_mid.element_parent[t]];
    for (std::size_t e = 0; e < r.edge_parent.size(); ++e) {
        const std::size_t mid = fine_to_mid.edge_parent[e];
        if (mid == npos) continue;
        r.edge_parent[e] = mid_to_coarse.edge_parent[mid];
        r.edge_sign[e] = fine_to_mid.edge_sign[e] * mid_to_coarse.edge_parent_sign[mid];
    }
    return r;
}

inline NestedMap identity_map(const Mesh& mesh) {
    NestedMap r;
    r.element_parent.resize(mesh.num_elements());
    for (std::size_t t = 0; t < r.element_parent.size(); ++t) r.element_parent[t] = t;
    r.edge_parent.resize(mesh.num_edges());
    for (std::size_t e = 0; e < r.edge_parent.size(); ++e) r.edge_parent[e] = e;
    r.edge_sign.assign(mesh.num_edges(), 1);
    return r;
}

/// Restriction of a fine nested solution to a coarse mesh: edge circulations
/// are summed over sub-edges, h is area-averaged over child elements.
inline std::pair<Vector, Vector> restrict_solution(const Mesh& fine, const DofMap& fine_dofs, std::span<const double> e,
                                                   std::span<const double> h, const Mesh& coarse,
                                                   const DofMap& coarse_dofs, const NestedMap& map) {
    Vector ec(coarse_dofs.num_edge_dofs(), 0.0), hc(coarse.num_elements(), 0.0), area(coarse.num_elements(), 0.0);
    for (std::size_t i = 0; i < fine_dofs.num_edge_dofs(); ++i) {
        const std::size_t parent = map.edge_parent[fine_dofs.dof_edge(i)];
        if (parent == npos) continue;
        const std::size_t ci = coarse_dofs.edge_dof(parent);
        if (ci == npos) continue;
        ec[ci] += map.edge_sign[fine_dofs.dof_edge(i)] * e[i];
    }
    for (std::size_t t = 0; t < fine.num_elements(); ++t) {
        const double a = fine.element_area(t);
        hc[map.element_parent[t]] += a * h[t];
        area[map.element_parent[t]] += a;
    }
    for (std::size_t t = 0; t < hc.size(); ++t) hc[t] /= area[t];
    return {ec, hc};
}

struct ConvergenceSetup {
    Mesh base;                            ///< coarsest mesh; levels are successive uniform refinements
    std::map<int, Material> materials{{0, Material{}}};
    Problem problem;                      ///< materials are rebuilt per level from `materials`
    double end_time = 1.0;
    double cfl_fraction = 0.9;
    std::optional<CavityMode> exact;      ///< exact solution; otherwise a fine self-reference is used
    std::size_t reference_extra_levels = 2;
};

/// Errors at end_time on a refinement sequence; EOCs from successive ratios.
inline EocTable convergence_study(const ConvergenceSetup& setup, std::size_t levels) {
    if (levels < 3) throw InvalidArgument("convergence study needs at least 3 levels");
    std::vector<Mesh> meshes{setup.base};
    std::vector<RefinementMap> maps;
    const std::size_t total = setup.exact ? levels : levels + setup.reference_extra_levels;
    for (std::size_t l = 1; l < total; ++l) {
        RefinementMap rm;
        meshes.push_back(refine_uniform(meshes.back(), &rm));
        maps.push_back(std::move(rm));
    }
    auto problem_on = [&](const Mesh& mesh) {
        Problem p = setup.problem;
        p.materials = MaterialField::from_regions(mesh, setup.materials);
        return p;
    };
    // dt halves with h, so the dt/h ratio is identical on every level; it is
    // fixed by the CFL limit of the finest mesh actually solved.
    const std::size_t finest = total - 1;
    std::size_t base_steps = 0;
    try {
        const std::size_t fine_steps =
            steps_for_cfl(meshes[finest], problem_on(meshes[finest]).materials, setup.end_time, setup.cfl_fraction);
        base_steps = std::max<std::size_t>(1, (fine_steps + (std::size_t{1} << finest) - 1) >> finest);
    } catch (const Error& err) {
        EocTable t;
        t.failure = std::string("step size: ") + err.what();
        return t;
    }
    auto steps_on = [&](std::size_t level) { return base_steps << level; };
    EocTable table;
    std::optional<Solution> reference;
    if (!setup.exact) {
        table.reference = "self-reference on level " + std::to_string(total - 1) +
                          " (h* = " + std::to_string(meshes.back().max_diameter()) + "), L2 at T = " +
                          std::to_string(setup.end_time);
        try {
            reference = solve(meshes.back(), problem_on(meshes.back()), setup.end_time, steps_on(finest));
        } catch (const Error& err) {
            table.failure = std::string("reference solution: ") + err.what();
            return table;
        }
    } else {
        table.reference = "exact cavity mode (" + std::to_string(setup.exact->m) + "," + std::to_string(setup.exact->n) +
                          "), L2 at T = " + std::to_string(setup.end_time);
    }
    for (std::size_t l = 0; l < levels; ++l) {
        const Mesh& mesh = meshes[l];
        Solution sol;
        try {
            sol = solve(mesh, problem_on(mesh), setup.end_time, steps_on(l));
        } catch (const Error& err) {
            table.failure = "level " + std::to_string(l) + ": " + err.what();
            break;
        }
        const DofMap dofs(mesh);
        EocRow row;
        row.h = mesh.max_diameter();
        row.dofs = dofs.num_edge_dofs() + dofs.num_element_dofs();
        if (setup.exact) {
            const CavityMode mode = *setup.exact;
            const double t = setup.end_time;
            const auto err = error_norms(
                mesh, dofs, sol.state.e, sol.h_synced, [&](const Vec2& x) { return mode.E(t, x); },
                [&](const Vec2& x) { return mode.H(t, x); });
            row.error_E = err.err_E;
            row.error_H_super = err.err_H_super;
        } else {
            NestedMap nm = identity_map(meshes.back());
            for (std::size_t k = total - 1; k-- > l;) nm = compose(nm, maps[k]);
            const DofMap fine_dofs(meshes.back());
            auto [ec, hc] = restrict_solution(meshes.back(), fine_dofs, reference->state.e, reference->h_synced, mesh,
                                              dofs, nm);
            for (std::size_t i = 0; i < ec.size(); ++i) ec[i] = sol.state.e[i] - ec[i];
            for (std::size_t t = 0; t < hc.size(); ++t) hc[t] = sol.h_synced[t] - hc[t];
            const auto [ne, nh] = discrete_l2_norms(mesh, dofs, ec, hc);
            row.error_E = ne;
            row.error_H_super = nh;
        }
        table.rows.push_back(row);
    }
    table.compute_rates();
    return table;
}

// ---------------------------------------------------------------------------
// Staggered-grid finite differences on a uniform rectangular grid with PEC
// walls. Written directly on grid arrays; shares no code with the finite
// element path so it can serve as an independent check.

struct YeeGrid {
    std::size_t nx = 1, ny = 1;
    double dx = 1.0, dy = 1.0;
    double eps = 1.0, mu = 1.0;
};

/// Ex(i, j) at (i+1/2, j), Ey(i, j) at (i, j+1/2), Hz(i, j) at (i+1/2, j+1/2).
struct YeeFields {
    std::vector<double> ex;  ///< nx * (ny+1), index j*nx + i
    std::vector<double> ey;  ///< (nx+1) * ny, index j*(nx+1) + i
    std::vector<double> hz;  ///< nx * ny,     index j*nx + i
};

inline YeeFields make_yee_fields(const YeeGrid& g) {
    return {std::vector<double>(g.nx * (g.ny + 1), 0.0), std::vector<double>((g.nx + 1) * g.ny, 0.0),
            std::vector<double>(g.nx * g.ny, 0.0)};
}

using YeeObserver = std::function<void(std::size_t step, const YeeFields&)>;

/// E update from H at the half step, then H from the new E. Boundary
/// tangential E stays zero.
inline YeeFields yee_reference_run(const YeeGrid& g, double dt, std::size_t steps, YeeFields f,
                                   const YeeObserver& observer = {}) {
    const std::size_t nx = g.nx, ny = g.ny;
    auto EX = [&](std::size_t i, std::size_t j) -> double& { return f.ex[j * nx + i]; };
    auto EY = [&](std::size_t i, std::size_t j) -> double& { return f.ey[j * (nx + 1) + i]; };
    auto HZ = [&](std::size_t i, std::size_t j) -> double& { return f.hz[j * nx + i]; };
    for (std::size_t i = 0; i < nx; ++i) EX(i, 0) = EX(i, ny) = 0.0;
    for (std::size_t j = 0; j < ny; ++j) EY(0, j) = EY(nx, j) = 0.0;
    if (observer) observer(0, f);
    for (std::size_t n = 1; n <= steps; ++n) {
        for (std::size_t j = 1; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) EX(i, j) += dt / (g.eps * g.dy) * (HZ(i, j) - HZ(i, j - 1));
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 1; i < nx; ++i) EY(i, j) -= dt / (g.eps * g.dx) * (HZ(i, j) - HZ(i - 1, j));
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i)
                HZ(i, j) -= dt / g.mu * ((EY(i + 1, j) - EY(i, j)) / g.dx - (EX(i, j + 1) - EX(i, j)) / g.dy);
        if (observer) observer(n, f);
    }
    return f;
}

/// 1/2 sum eps E^2 dx dy + 1/2 sum mu H_before H_after dx dy (the quadratic
/// form conserved by the staggered update).
inline double yee_energy(const YeeGrid& g, const YeeFields& f, std::span<const double> hz_before) {
    double s = 0.0;
    for (double v : f.ex) s += g.eps * v * v;
    for (double v : f.ey) s += g.eps * v * v;
    for (std::size_t k = 0; k < f.hz.size(); ++k) s += g.mu * hz_before[k] * f.hz[k];
    return 0.5 * s * g.dx * g.dy;
}

struct YeeCheckOptions {
    double eps = 1.0, mu = 1.0;
    double cfl_fraction = 0.9;
    std::uint64_t seed = 7;
    /// Element whose finite element permittivity is scaled (negative control); npos for none.
    std::size_t perturbed_element = npos;
    double perturbation = 2.0;
};

/// Runs the finite element leapfrog on an nx x ny grid of the unit square and
/// the finite-difference scheme from the same random data (e_i = E * edge
/// length), returning the largest coefficient difference over all steps.
inline double verify_yee_equivalence(std::size_t nx, std::size_t ny, std::size_t steps, const YeeCheckOptions& opt = {}) {
    const Mesh mesh = build_structured_quad_mesh(nx, ny);
    MaterialField mat = MaterialField::uniform(mesh.num_elements(), Material::isotropic(opt.eps, opt.mu));
    if (opt.perturbed_element != npos)
        mat.set(opt.perturbed_element, Material::isotropic(opt.eps * opt.perturbation, opt.mu));
    const SystemMatrices m = assemble_system(mesh, mat);

    YeeGrid g{nx, ny, 1.0 / static_cast<double>(nx), 1.0 / static_cast<double>(ny), opt.eps, opt.mu};
    const double dt = opt.cfl_fraction * std::sqrt(opt.eps * opt.mu) / std::sqrt(1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy));

    // Map finite element unknowns onto grid slots by geometry.
    struct Slot {
        int kind;  // 0 ex, 1 ey
        std::size_t index;
        double length;
    };
    std::vector<Slot> slots(m.dofs.num_edge_dofs());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const std::size_t edge = m.dofs.dof_edge(i);
        const Vec2 mid = mesh.edge_midpoint(edge);
        const Vec2 d = mesh.edge_vector(edge);
        if (std::abs(d[1]) < 1e-12) {
            const auto ii = static_cast<std::size_t>(std::floor(mid[0] / g.dx));
            const auto jj = static_cast<std::size_t>(std::lround(mid[1] / g.dy));
            slots[i] = {0, jj * nx + ii, d[0]};
        } else {
            const auto ii = static_cast<std::size_t>(std::lround(mid[0] / g.dx));
            const auto jj = static_cast<std::size_t>(std::floor(mid[1] / g.dy));
            slots[i] = {1, jj * (nx + 1) + ii, d[1]};
        }
    }
    std::vector<std::size_t> cell(mesh.num_elements());
    for (std::size_t t = 0; t < cell.size(); ++t) {
        const Vec2 c = mesh.centroid(t);
        cell[t] = static_cast<std::size_t>(std::floor(c[1] / g.dy)) * nx + static_cast<std::size_t>(std::floor(c[0] / g.dx));
    }

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    YeeFields f = make_yee_fields(g);
    FieldState s;
    s.e.assign(slots.size(), 0.0);
    s.h.assign(mesh.num_elements(), 0.0);
    s.time_h = 0.5 * dt;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const double v = dist(rng);
        (slots[i].kind == 0 ? f.ex : f.ey)[slots[i].index] = v;
        s.e[i] = v * slots[i].length;
    }
    for (std::size_t t = 0; t < cell.size(); ++t) {
        const double v = dist(rng);
        f.hz[cell[t]] = v;
        s.h[t] = v;
    }

    std::vector<FieldState> fem{s};
    fem.reserve(steps + 1);
    for (std::size_t n = 0; n < steps; ++n) fem.push_back(leapfrog_step(fem.back(), dt, m));

    double diff = 0.0;
    yee_reference_run(g, dt, steps, f, [&](std::size_t n, const YeeFields& y) {
        const FieldState& st = fem[n];
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const double v = (slots[i].kind == 0 ? y.ex : y.ey)[slots[i].index] * slots[i].length;
            diff = std::max(diff, std::abs(v - st.e[i]));
        }
        for (std::size_t t = 0; t < cell.size(); ++t) diff = std::max(diff, std::abs(y.hz[cell[t]] - st.h[t]));
    });
    return diff;
}

}  // namespace maxlump
