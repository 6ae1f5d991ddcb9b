#pragma once

// Explicit leapfrog integration of
//     M_eps de/dt = C^T h - j(t),   M_mu dh/dt = -C e
// with e at integer and h at half-integer time levels, plus the equivalent
// second-order recursion for e alone, CFL estimation and the conserved
// staggered energy.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "maxlump/assembly.hpp"
#include "maxlump/error.hpp"
#include "maxlump/sparse_linalg.hpp"

namespace maxlump {

/// Coefficient vectors at staggered times: e at time_e, h at time_h = time_e + dt/2.
struct FieldState {
    Vector e;
    Vector h;
    double time_e = 0.0;
    double time_h = 0.0;
    std::size_t step = 0;
};

/// Edge current j(t) entering the e equation. An empty callback means no source.
struct SourceTerm {
    std::function<void(double, std::span<double>)> current;

    bool active() const { return static_cast<bool>(current); }

    /// j(t) = amplitude(t) * pattern.
    static SourceTerm separable(Vector pattern, std::function<double(double)> amplitude) {
        return {[pattern = std::move(pattern), amplitude = std::move(amplitude)](double t, std::span<double> j) {
            const double g = amplitude(t);
            for (std::size_t i = 0; i < j.size(); ++i) j[i] = g * pattern[i];
        }};
    }
};

using SnapshotCallback =
    std::function<void(std::size_t step, double time, std::span<const double> e, std::span<const double> h)>;

namespace detail {

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace detail

/// e += dt * inv(M_eps) (C^T h - j(t_mid)), with t_mid the time of h.
inline void update_e(FieldState& s, double dt, const SparseMatrix& inverse_mass_E, const SparseMatrix& curl_transpose,
                     const SourceTerm& source = {}) {
    Vector rhs = curl_transpose * std::span<const double>(s.h);
    if (source.active()) {
        Vector j(rhs.size(), 0.0);
        source.current(s.time_h, j);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] -= j[i];
    }
    const Vector de = inverse_mass_E * std::span<const double>(rhs);
    for (std::size_t i = 0; i < s.e.size(); ++i) s.e[i] += dt * de[i];
    s.time_e += dt;
}

/// h -= dt * inv(M_mu) C e.
inline void update_h(FieldState& s, double dt, const DiagonalMatrix& inverse_mass_H, const SparseMatrix& curl) {
    const Vector ce = curl * std::span<const double>(s.e);
    for (std::size_t t = 0; t < s.h.size(); ++t) s.h[t] -= dt * inverse_mass_H[t] * ce[t];
    s.time_h += dt;
}

/// One leapfrog step (e first, then h). Throws BlowupError on non-finite values.
inline FieldState leapfrog_step(FieldState s, double dt, const SparseMatrix& inverse_mass_E,
                                const DiagonalMatrix& inverse_mass_H, const SparseMatrix& curl,
                                const SparseMatrix& curl_transpose, const SourceTerm& source = {}) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (s.e.size() != curl.cols() || s.h.size() != curl.rows()) throw ShapeError("field state does not match matrices");
    update_e(s, dt, inverse_mass_E, curl_transpose, source);
    update_h(s, dt, inverse_mass_H, curl);
    ++s.step;
    if (!detail::all_finite(s.e) || !detail::all_finite(s.h)) throw BlowupError(s.step);
    return s;
}

inline FieldState leapfrog_step(FieldState s, double dt, const SystemMatrices& m, const SourceTerm& source = {}) {
    return leapfrog_step(std::move(s), dt, m.inverse_mass_E, m.inverse_mass_H, m.curl, m.curl_transpose, source);
}

/// Runaway detection on top of the non-finite check: fires once the largest
/// coefficient exceeds `growth_factor` times the reference magnitude (the
/// initial one, or the first nonzero one for source-driven runs).
struct BlowupGuard {
    double growth_factor = 1e8;
    double reference = 0.0;

    void check(const FieldState& s) {
        const double m = std::max(max_abs(s.e), max_abs(s.h));
        if (reference == 0.0) {
            reference = m;
            return;
        }
        if (m > growth_factor * reference) throw BlowupError(s.step);
    }
};

/// Advances `steps` leapfrog steps, calling `observer` on the initial state and
/// then every `stride` steps.
inline FieldState run_leapfrog(FieldState s, double dt, std::size_t steps, const SystemMatrices& m,
                               const SourceTerm& source = {}, const SnapshotCallback& observer = {},
                               std::size_t stride = 1, BlowupGuard guard = {}) {
    if (stride == 0) stride = 1;
    guard.check(s);
    if (observer) observer(s.step, s.time_e, s.e, s.h);
    for (std::size_t n = 0; n < steps; ++n) {
        s = leapfrog_step(std::move(s), dt, m, source);
        guard.check(s);
        if (observer && (n + 1) % stride == 0) observer(s.step, s.time_e, s.e, s.h);
    }
    return s;
}

/// e_next = 2 e - e_prev - dt^2 inv(M_eps) K e.
inline Vector second_order_step(std::span<const double> e, std::span<const double> e_prev, double dt,
                                const SparseMatrix& inverse_mass_E, const SparseMatrix& stiffness) {
    if (e.size() != e_prev.size() || e.size() != stiffness.rows()) throw ShapeError("second-order step size mismatch");
    const Vector ke = stiffness * e;
    const Vector acc = inverse_mass_E * std::span<const double>(ke);
    Vector next(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) next[i] = 2.0 * e[i] - e_prev[i] - dt * dt * acc[i];
    if (!detail::all_finite(next)) throw BlowupError(0);
    return next;
}

/// Largest eigenvalue of inv(M_eps) K. Iterates on y = M_eps x, where the
/// operator K inv(M_eps) is self-adjoint in the inv(M_eps) inner product,
/// so M_eps itself is never needed.
inline double max_eigenvalue(const SparseMatrix& inverse_mass_E, const SparseMatrix& stiffness, double tol = 1e-10) {
    auto apply = [&](std::span<const double> y) {
        const Vector x = inverse_mass_E * y;
        return stiffness * std::span<const double>(x);
    };
    auto inner = [&](std::span<const double> a, std::span<const double> b) {
        const Vector mb = inverse_mass_E * b;
        return dot(a, mb);
    };
    return power_iteration_max_eig(apply, inner, stiffness.rows(), tol);
}

/// Stability limit 2 / sqrt(lambda_max(inv(M_eps) K)); no safety factor applied.
inline double estimate_cfl(const SparseMatrix& inverse_mass_E, const SparseMatrix& stiffness, double tol = 1e-10) {
    const double lambda = max_eigenvalue(inverse_mass_E, stiffness, tol);
    if (!(lambda > 0.0)) throw ConvergenceError("stiffness has no positive eigenvalue; CFL limit undefined", lambda);
    return 2.0 / std::sqrt(lambda);
}

/// 1/2 e^T M_eps e + 1/2 (M_mu h_before) . h_after, for consecutive staggered
/// h vectors around e. M_eps e is obtained by CG on inv(M_eps).
inline double discrete_energy(std::span<const double> e, std::span<const double> h_before,
                              std::span<const double> h_after, const SparseMatrix& inverse_mass_E,
                              const DiagonalMatrix& mass_H, double cg_tol = 1e-14) {
    const Vector z = conjugate_gradient([&](std::span<const double> x) { return inverse_mass_E * x; }, e, cg_tol,
                                        10 * e.size() + 100);
    double eh = 0.0;
    for (std::size_t t = 0; t < h_before.size(); ++t) eh += mass_H[t] * h_before[t] * h_after[t];
    return 0.5 * dot(e, z) + 0.5 * eh;
}

/// Energy of a leapfrog state; h one half step back is recovered from the
/// h update, h_before = h + dt inv(M_mu) C e.
inline double discrete_energy(const FieldState& s, double dt, const SystemMatrices& m, double cg_tol = 1e-14) {
    const Vector ce = m.curl * std::span<const double>(s.e);
    Vector before = s.h;
    for (std::size_t t = 0; t < before.size(); ++t) before[t] += dt * m.inverse_mass_H[t] * ce[t];
    return discrete_energy(s.e, before, s.h, m.inverse_mass_E, m.mass_H, cg_tol);
}

/// Leapfrog on the enriched system with block-diagonal mass:
///     e~ += dt inv(Mtilde) C~^T h,   h -= dt inv(M_mu) C~ e~.
/// Returns the states after every step (the initial state first).
inline std::vector<FieldState> run_enriched(FieldState s, double dt, const VertexBlockMatrix& inverse_lumped_mass,
                                            const DiagonalMatrix& inverse_mass_H, const SparseMatrix& curl_tilde,
                                            std::size_t steps) {
    if (s.e.size() != curl_tilde.cols() || s.h.size() != curl_tilde.rows())
        throw ShapeError("enriched state does not match matrices");
    const SparseMatrix ct = curl_tilde.transpose();
    std::vector<FieldState> traj;
    traj.reserve(steps + 1);
    traj.push_back(s);
    for (std::size_t n = 0; n < steps; ++n) {
        const Vector rhs = ct * std::span<const double>(s.h);
        const Vector de = inverse_lumped_mass * std::span<const double>(rhs);
        for (std::size_t i = 0; i < s.e.size(); ++i) s.e[i] += dt * de[i];
        s.time_e += dt;
        update_h(s, dt, inverse_mass_H, curl_tilde);
        ++s.step;
        if (!detail::all_finite(s.e) || !detail::all_finite(s.h)) throw BlowupError(s.step);
        traj.push_back(s);
    }
    return traj;
}

}  // namespace maxlump
