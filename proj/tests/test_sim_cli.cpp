#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "maxlump/benchmarks.hpp"
#include "maxlump/error.hpp"
#include "maxlump/scenario.hpp"
#include "test_util.hpp"

using namespace maxlump;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("maxlump_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

SimConfig parse(const std::string& text, const fs::path& base = {}) {
    std::istringstream in(text);
    return parse_config(in, base);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Time of the largest |value| with a parabolic fit through the neighbours.
double peak_time(const ProbeSeries& s) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < s.values.size(); ++i)
        if (std::abs(s.values[i]) > std::abs(s.values[k])) k = i;
    if (k == 0 || k + 1 >= s.values.size()) return s.times[k];
    const double a = std::abs(s.values[k - 1]), b = std::abs(s.values[k]), c = std::abs(s.values[k + 1]);
    const double dt = s.times[k + 1] - s.times[k];
    return s.times[k] + 0.5 * dt * (a - c) / (a - 2 * b + c);
}

}  // namespace

TEST(CavityModeTest, SatisfiesMaxwellByFiniteDifferences) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    const double d = 1e-4;
    for (const CavityMode mode : {cavity_mode(1, 1), cavity_mode(2, 1), cavity_mode(1, 3)})
        for (int k = 0; k < 100; ++k) {
            const Vec2 x{u(rng), u(rng)};
            const double t = u(rng);
            const Vec2 dEdt = (1.0 / (2 * d)) * (mode.E(t + d, x) - mode.E(t - d, x));
            const double dHdx = (mode.H(t, {x[0] + d, x[1]}) - mode.H(t, {x[0] - d, x[1]})) / (2 * d);
            const double dHdy = (mode.H(t, {x[0], x[1] + d}) - mode.H(t, {x[0], x[1] - d})) / (2 * d);
            EXPECT_NEAR(dEdt[0], dHdy, 1e-6);
            EXPECT_NEAR(dEdt[1], -dHdx, 1e-6);
            const double dHdt = (mode.H(t + d, x) - mode.H(t - d, x)) / (2 * d);
            const double dEydx = (mode.E(t, {x[0] + d, x[1]})[1] - mode.E(t, {x[0] - d, x[1]})[1]) / (2 * d);
            const double dExdy = (mode.E(t, {x[0], x[1] + d})[0] - mode.E(t, {x[0], x[1] - d})[0]) / (2 * d);
            EXPECT_NEAR(dHdt, -(dEydx - dExdy), 1e-6);
        }
}

TEST(CavityModeTest, TangentialEVanishesOnBoundary) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const CavityMode mode = cavity_mode(2, 3);
    for (int k = 0; k < 100; ++k) {
        const double s = u(rng), t = 3 * u(rng);
        EXPECT_LT(std::abs(mode.E(t, {s, 0.0})[0]), 1e-13);
        EXPECT_LT(std::abs(mode.E(t, {s, 1.0})[0]), 1e-13);
        EXPECT_LT(std::abs(mode.E(t, {0.0, s})[1]), 1e-13);
        EXPECT_LT(std::abs(mode.E(t, {1.0, s})[1]), 1e-13);
    }
    EXPECT_EQ(mode.E(0.0, {0.3, 0.4}), (Vec2{-0.0, 0.0}));
    EXPECT_THROW(cavity_mode(0, 1), InvalidArgument);
}

TEST(ErrorNormsTest, Identities) {
    const Mesh m = build_structured_hybrid_mesh(3, 3);
    const DofMap d(m);
    const Vector e0(d.num_edge_dofs(), 0.0);
    // piecewise-constant H: element means reproduce it exactly
    auto pc = [](const Vec2& x) { return x[0] < 1.0 / 3.0 ? 2.0 : -1.0; };
    const Vector h = element_means(m, pc);
    const auto r = error_norms(m, d, e0, h, [](const Vec2&) { return Vec2{0, 0}; }, pc);
    EXPECT_LT(r.err_H_super, 1e-15);
    EXPECT_EQ(r.err_E, 0.0);
}

TEST(ErrorNormsTest, SingleElementLinearH) {
    const Mesh m({{0, 0}, {2, 0}, {0, 1}}, {Element{ElementKind::triangle, {0, 1, 2, npos}, 0}});
    const DofMap d(m);
    auto lin = [](const Vec2& x) { return 1.0 + 3.0 * x[0] - x[1]; };
    const double mean = 1.0 + 3.0 * (2.0 / 3.0) - 1.0 / 3.0, h1 = 0.25;
    const auto r = error_norms(m, d, Vector{}, Vector{h1}, [](const Vec2&) { return Vec2{0, 0}; }, lin);
    EXPECT_NEAR(r.err_H_super, std::abs(h1 - mean) * std::sqrt(1.0), 1e-14);
}

TEST(EocTableTest, RatesAndCsv) {
    EocTable t;
    t.reference = "test";
    t.rows = {{0.5, 10, 0.4, {}, 0.16, {}}, {0.25, 40, 0.2, {}, 0.04, {}}, {0.125, 160, 0.1, {}, 0.0, {}}};
    t.compute_rates();
    EXPECT_FALSE(t.rows[0].eoc_E.has_value());
    EXPECT_DOUBLE_EQ(*t.rows[1].eoc_E, 1.0);
    EXPECT_DOUBLE_EQ(*t.rows[1].eoc_H, 2.0);
    EXPECT_FALSE(t.rows[2].eoc_H.has_value());
    std::ostringstream csv;
    t.write_csv(csv);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "h,dof,err_E,eoc_E,err_H_super,eoc_H");
    std::ostringstream txt;
    t.write_text(txt);
    EXPECT_NE(txt.str().find("2.00"), std::string::npos);
}

TEST(Convergence, ZeroDataGivesZeroErrors) {
    ConvergenceSetup s;
    s.base = build_structured_quad_mesh(2, 2);
    s.end_time = 0.5;
    const EocTable t = convergence_study(s, 3);
    ASSERT_EQ(t.rows.size(), 3u);
    for (const auto& r : t.rows) {
        EXPECT_LT(r.error_E, 1e-12);
        EXPECT_LT(r.error_H_super, 1e-12);
    }
    EXPECT_THROW(convergence_study(s, 2), InvalidArgument);
}

TEST(Convergence, CavityOnQuadsShowsExpectedOrders) {
    ConvergenceSetup s;
    s.base = build_structured_quad_mesh(4, 4);
    const CavityMode mode = cavity_mode(1, 1);
    s.exact = mode;
    s.problem.initial_E = [mode](const Vec2& x) { return mode.E(0.0, x); };
    s.problem.initial_H = [mode](double t, const Vec2& x) { return mode.H(t, x); };
    const EocTable t = convergence_study(s, 4);
    ASSERT_EQ(t.rows.size(), 4u);
    for (std::size_t i = 1; i < 4; ++i) EXPECT_LT(t.rows[i].h, t.rows[i - 1].h);
    EXPECT_NEAR(*t.rows.back().eoc_E, 1.0, 0.2);
    EXPECT_NEAR(*t.rows.back().eoc_H, 2.0, 0.2);
}

TEST(Convergence, SelfReferenceShowsConvergence) {
    ConvergenceSetup s;
    s.base = build_structured_quad_mesh(3, 3);
    const CavityMode mode = cavity_mode(1, 2);
    s.problem.initial_E = [mode](const Vec2& x) { return mode.E(0.0, x); };
    s.problem.initial_H = [mode](double t, const Vec2& x) { return mode.H(t, x); };
    s.end_time = 0.5;
    const EocTable t = convergence_study(s, 3);
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_LT(t.rows[2].error_E, t.rows[0].error_E);
    EXPECT_LT(t.rows[2].error_H_super, t.rows[0].error_H_super);
}

TEST(Restriction, NestedCirculationsAndMeansAreExact) {
    const Mesh coarse = build_structured_hybrid_mesh(3, 2);
    RefinementMap rm;
    const Mesh fine = refine_uniform(coarse, &rm);
    const NestedMap map = compose(identity_map(fine), rm);
    const DofMap dc(coarse), df(fine);
    auto field = [](const Vec2& x) { return Vec2{1.0 + x[1], 2.0 * x[0] - 0.5}; };
    auto scalar = [](const Vec2& x) { return x[0] * x[0] - x[1]; };
    const auto [ec, hc] =
        restrict_solution(fine, df, interpolate_edges(fine, df, field), element_means(fine, scalar), coarse, dc, map);
    const Vector ec_want = interpolate_edges(coarse, dc, field), hc_want = element_means(coarse, scalar);
    for (std::size_t i = 0; i < ec.size(); ++i) EXPECT_NEAR(ec[i], ec_want[i], 1e-15);
    for (std::size_t t = 0; t < hc.size(); ++t) EXPECT_NEAR(hc[t], hc_want[t], 1e-15);
}

TEST(YeeOracle, ConstantHLeavesEUnchanged) {
    const YeeGrid g{4, 3, 0.25, 1.0 / 3.0, 1.0, 1.0};
    YeeFields f = make_yee_fields(g);
    std::fill(f.hz.begin(), f.hz.end(), 1.7);
    const YeeFields r = yee_reference_run(g, 0.01, 1, f);
    for (double v : r.ex) EXPECT_EQ(v, 0.0);
    for (double v : r.ey) EXPECT_EQ(v, 0.0);
}

TEST(YeeOracle, SingleCellStencil) {
    const double h = 0.25, eps = 2.0, dt = 0.05, H = 1.5;
    const YeeGrid g{4, 4, h, h, eps, 1.0};
    YeeFields f = make_yee_fields(g);
    f.hz[1 * 4 + 2] = H;  // cell (2, 1)
    const YeeFields r = yee_reference_run(g, dt, 1, f);
    std::size_t changed = 0;
    for (const auto* v : {&r.ex, &r.ey})
        for (double x : *v)
            if (x != 0.0) {
                ++changed;
                EXPECT_NEAR(std::abs(x), dt / (eps * h) * H, 1e-15);
            }
    EXPECT_EQ(changed, 4u);
}

TEST(YeeOracle, EnergyConserved) {
    const YeeGrid g{10, 7, 0.1, 1.0 / 7.0, 1.5, 1.2};
    YeeFields f = make_yee_fields(g);
    const Vector r = test::random_vector(f.hz.size() + f.ex.size() + f.ey.size(), 5);
    std::size_t k = 0;
    for (auto* v : {&f.hz, &f.ex, &f.ey})
        for (double& x : *v) x = r[k++];
    const double dt = 0.9 / std::sqrt(1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy)) * std::sqrt(g.eps * g.mu);
    std::vector<double> energies;
    std::vector<double> h_prev;
    yee_reference_run(g, dt, 300, f, [&](std::size_t n, const YeeFields& s) {
        if (n > 0) energies.push_back(yee_energy(g, s, h_prev));
        h_prev = s.hz;
    });
    for (double e : energies) EXPECT_NEAR(e / energies.front(), 1.0, 1e-12);
}

TEST(YeeEquivalence, Coincides) {
    EXPECT_LT(verify_yee_equivalence(1, 2, 10), 1e-14);
    EXPECT_LT(verify_yee_equivalence(8, 8, 100), 1e-12);
    YeeCheckOptions opt;
    opt.eps = 2.0;
    opt.mu = 0.5;
    EXPECT_LT(verify_yee_equivalence(6, 9, 100, opt), 1e-12);
    opt.perturbed_element = 20;
    EXPECT_GT(verify_yee_equivalence(6, 9, 100, opt), 1e-3);
}

TEST(Config, ParsesAllSections) {
    const SimConfig c = parse(R"(
[scenario]
name = demo
end_time = 2.5
hole_tag = 2
[mesh]
generator = hybrid
nx = 6
ny = 3
bbox = -1 1 0 0.5
refine = 1
[time]
dt = 0.01
[material.0]
eps_xx = 2
eps_xy = 0.5
eps_yy = 3
mu = 1.5
[material.4]
eps = 3
[initial]
cavity_mode = 2 1
[source]
type = plane_wave
x_min = -0.9
x_max = -0.8
amplitude = 2
center_time = 0.4
width = 0.2
[output]
directory = out
stride = 10
times = 0.5 1.0
probes = 0.1 0.2; -0.5 0.25
[convergence]
levels = 5
reference = self
)",
                              "/base");
    EXPECT_EQ(c.name, "demo");
    EXPECT_EQ(c.end_time, 2.5);
    EXPECT_EQ(c.hole_tag, 2);
    EXPECT_EQ(c.mesh.generator, "hybrid");
    EXPECT_EQ(c.mesh.nx, 6u);
    EXPECT_EQ(c.mesh.bbox.xmin, -1.0);
    EXPECT_EQ(c.mesh.refine, 1u);
    EXPECT_EQ(c.dt, 0.01);
    ASSERT_EQ(c.materials.size(), 2u);
    EXPECT_EQ(c.materials.at(0).eps(0, 1), 0.5);
    EXPECT_EQ(c.materials.at(0).mu, 1.5);
    EXPECT_EQ(c.materials.at(4).eps(1, 1), 3.0);
    EXPECT_EQ(c.initial_mode->m, 2);
    EXPECT_EQ(c.source->width, 0.2);
    EXPECT_EQ(c.output_dir, fs::path("/base/out"));
    EXPECT_EQ(c.snapshot_times, (std::vector<double>{0.5, 1.0}));
    ASSERT_EQ(c.probes.size(), 2u);
    EXPECT_EQ(c.probes[1], (Vec2{-0.5, 0.25}));
    EXPECT_EQ(c.levels, 5u);
    EXPECT_TRUE(c.self_reference);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse("[scenario]\nend_time = 0\n"), ConfigError);
    EXPECT_THROW(parse("[scenario]\nend_time = abc\n"), ConfigError);
    EXPECT_THROW(parse("[time]\ncfl_fraction = 1.5\n"), ConfigError);
    EXPECT_THROW(parse("[time]\ncfl_fraction = 0\n"), ConfigError);
    EXPECT_THROW(parse("[bogus]\nx = 1\n"), ConfigError);
    EXPECT_THROW(parse("[material.x]\neps = 1\n"), ConfigError);
    EXPECT_THROW(parse("[material.1]\neps = -1\n"), ConfigError);
    EXPECT_THROW(parse("[source]\ntype = laser\n"), ConfigError);
    EXPECT_THROW(parse("[initial]\ncavity_mode = 0 1\n"), ConfigError);
    EXPECT_THROW(parse("[mesh]\nnx = -3\n"), ConfigError);
    EXPECT_THROW(parse("[scenario\nname = x\n"), ParseError);
}

TEST(Config, MissingTagsAreConfigErrors) {
    SimConfig c = parse("[mesh]\ngenerator = quad\nnx = 2\nny = 2\n[material.1]\neps = 3\n");
    EXPECT_THROW(run_scenario(c), ConfigError);
    c = parse("[scenario]\nhole_tag = 9\n[mesh]\nnx = 2\nny = 2\n");
    EXPECT_THROW(run_scenario(c), ConfigError);
    c = parse("[mesh]\ngenerator = pentagon\n");
    EXPECT_THROW(run_scenario(c), ConfigError);
    c = parse("[mesh]\nnx = 2\nny = 2\n[output]\nprobes = 5 5\n");
    EXPECT_THROW(run_scenario(c), ConfigError);
}

TEST(Config, ScatteringFixtureHasRequiredTags) {
    const SimConfig c = load_config(fs::path(MAXLUMP_SOURCE_DIR) / "configs" / "scattering.ini");
    const Mesh mesh = build_mesh(c.mesh);
    EXPECT_NO_THROW(resolve_materials(c, mesh));
    SimConfig bad = c;
    bad.materials.erase(2);
    EXPECT_THROW(resolve_materials(bad, mesh), ConfigError);
    bad = c;
    bad.hole_tag = 3;
    EXPECT_THROW(resolve_materials(bad, mesh), ConfigError);
}

TEST(Snapshot, ZeroStateAndCentroids) {
    const Mesh m = build_structured_quad_mesh(2, 2);
    const DofMap d(m);
    std::ostringstream el, ed;
    export_snapshot(m, d, 3, 0.25, Vector(d.num_edge_dofs(), 0.0), Vector(4, 0.0), el, ed);
    std::istringstream ein(el.str());
    std::string line;
    std::getline(ein, line);
    EXPECT_EQ(line, "# step=3 time=0.25");
    std::getline(ein, line);
    EXPECT_EQ(line, "centroid_x,centroid_y,H_z");
    std::vector<std::string> rows;
    while (std::getline(ein, line)) rows.push_back(line);
    EXPECT_EQ(rows, (std::vector<std::string>{"0.25,0.25,0", "0.75,0.25,0", "0.25,0.75,0", "0.75,0.75,0"}));
    std::istringstream ed_in(ed.str());
    EXPECT_EQ(read_snapshot_values(ed_in), Vector(d.num_edge_dofs(), 0.0));
}

TEST(Snapshot, RoundTripIsExact) {
    const Mesh m = perturb_interior_vertices(build_structured_tri_mesh(4, 4), 0.2, 3);
    const DofMap d(m);
    const Vector e = test::random_vector(d.num_edge_dofs(), 1, -1e3, 1e3);
    Vector h = test::random_vector(m.num_elements(), 2);
    h[0] = 1.0 / 3.0;
    h[1] = -2.2250738585072014e-308;
    std::stringstream el, ed;
    export_snapshot(m, d, 0, 0.0, e, h, el, ed);
    EXPECT_EQ(read_snapshot_values(el), h);
    EXPECT_EQ(read_snapshot_values(ed), e);
}

TEST(Scenario, ZeroSourceGivesZeroFields) {
    const SimConfig c = parse("[scenario]\nend_time = 0.5\n[mesh]\ngenerator = tri\nnx = 4\nny = 4\n");
    const RunResult r = run_scenario(c);
    for (double v : r.state.e) EXPECT_EQ(v, 0.0);
    for (double v : r.state.h) EXPECT_EQ(v, 0.0);
}

TEST(Scenario, SnapshotsAreDeterministic) {
    const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
    SimConfig c = load_config(fs::path(MAXLUMP_SOURCE_DIR) / "configs" / "scattering.ini");
    c.end_time = 0.6;
    c.snapshot_times = {0.3, 0.6};
    c.output_dir = a;
    const RunResult ra = run_scenario(c);
    c.output_dir = b;
    const RunResult rb = run_scenario(c);
    ASSERT_EQ(ra.snapshot_files.size(), 4u);
    for (const auto& f : ra.snapshot_files) {
        const std::string sa = slurp(f), sb = slurp(b / f.filename());
        EXPECT_FALSE(sa.empty());
        EXPECT_EQ(sa, sb) << f;
    }
    // the pulse has entered the domain
    EXPECT_GT(max_abs(ra.state.h), 1e-3);
}

TEST(Scenario, StrideAndTimesSelectSnapshots) {
    const fs::path dir = scratch_dir("stride");
    SimConfig c = parse("[scenario]\nend_time = 1.0\n[mesh]\nnx = 4\nny = 4\n[time]\ndt = 0.1\n[initial]\ncavity_mode = 1 1\n");
    c.output_dir = dir;
    c.snapshot_stride = 4;
    c.snapshot_times = {0.5};
    const RunResult r = run_scenario(c);
    EXPECT_EQ(r.steps, 10u);
    // steps 0, 4, 8 by stride and 5 by time
    EXPECT_EQ(r.snapshot_files.size(), 8u);
    EXPECT_TRUE(fs::exists(dir / "h_000005.csv"));
}

namespace {

// Channel [-2, 4] x [0, 0.1] with PEC walls, current sheet at x = 0;
// elements with centroid x > interface get region 2.
SimConfig channel_config(const fs::path& dir, double eps2, double interface_x, std::vector<Vec2> probes, double end) {
    Mesh mesh = build_structured_quad_mesh(300, 5, BBox{-2.0, 4.0, 0.0, 0.1});
    for (std::size_t t = 0; t < mesh.num_elements(); ++t)
        if (mesh.centroid(t)[0] > interface_x) mesh.set_region(t, 2);
    const fs::path file = dir / "channel.mesh";
    std::ofstream out(file);
    write_mesh(mesh, out);
    out.close();
    std::ostringstream cfg;
    cfg << "[scenario]\nend_time = " << end << "\n[mesh]\nfile = " << file.string() << "\n[material.0]\neps = 1\n";
    if (interface_x < 4.0) cfg << "[material.2]\neps = " << eps2 << '\n';
    cfg << "[source]\ntype = plane_wave\nx_min = -0.02\nx_max = 0.02\ncenter_time = 0.3\nwidth = 0.1\n";
    SimConfig c = parse(cfg.str());
    c.probes = std::move(probes);
    return c;
}

}  // namespace

TEST(Scenario, WaveSpeedInVacuum) {
    const fs::path dir = scratch_dir("speed1");
    const RunResult r = run_scenario(channel_config(dir, 1.0, 10.0, {{1.0, 0.05}, {2.0, 0.05}}, 2.8));
    const double speed = 1.0 / (peak_time(r.probes[1]) - peak_time(r.probes[0]));
    EXPECT_NEAR(speed, 1.0, 0.05);
}

TEST(Scenario, WaveSpeedInDielectric) {
    const fs::path dir = scratch_dir("speed3");
    const RunResult r = run_scenario(channel_config(dir, 3.0, 0.5, {{1.0, 0.05}, {2.0, 0.05}}, 3.9));
    const double speed = 1.0 / (peak_time(r.probes[1]) - peak_time(r.probes[0]));
    EXPECT_NEAR(speed * std::sqrt(3.0), 1.0, 0.1);
}
