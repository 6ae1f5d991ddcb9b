#pragma once

// Scenario configuration (INI-style text), the plane-wave source, snapshot
// export and the run driver behind the command-line tool.
//
// Config schema. Sections and keys; everything except [scenario] end_time
// and a mesh source is optional.
//
//   [scenario]   name = <label>, end_time = <T>
//                hole_tag = <boundary tag>  (scattering: must exist in the mesh)
//   [mesh]       generator = quad|tri|hybrid, nx, ny, bbox = xmin xmax ymin ymax
//                file = <path>               (instead of generator)
//                refine = <count>
//   [time]       cfl_fraction = 0.9  |  dt = <explicit step>
//   [material.<region>]   eps = <scalar> | eps_xx, eps_xy, eps_yy ; mu = <scalar>
//   [initial]    cavity_mode = <m> <n>
//   [source]     type = none|plane_wave, x_min, x_max, amplitude, center_time, width
//   [output]     directory, stride, times = t1 t2 ..., probes = x y; x y; ...
//   [convergence] levels, reference = exact|self, reference_levels
//
// Relative paths are resolved against the directory of the config file.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "maxlump/assembly.hpp"
#include "maxlump/benchmarks.hpp"
#include "maxlump/error.hpp"
#include "maxlump/fields.hpp"
#include "maxlump/mesh.hpp"
#include "maxlump/timestepper.hpp"

namespace maxlump {

struct MeshSpec {
    std::string generator = "quad";
    std::size_t nx = 8, ny = 8;
    BBox bbox{};
    std::filesystem::path file;  ///< takes precedence over the generator when set
    std::size_t refine = 0;
};

struct PlaneWaveSource {
    double x_min = -0.95, x_max = -0.85;
    double amplitude = 1.0;
    double center_time = 0.3;
    double width = 0.1;
};

struct SimConfig {
    std::string name = "custom";
    MeshSpec mesh;
    std::map<int, Material> materials{{0, Material{}}};
    std::optional<double> dt;
    double cfl_fraction = 0.9;
    double end_time = 1.0;
    std::optional<CavityMode> initial_mode;
    std::optional<PlaneWaveSource> source;
    std::optional<int> hole_tag;
    std::filesystem::path output_dir;
    std::size_t snapshot_stride = 0;
    std::vector<double> snapshot_times;
    std::vector<Vec2> probes;
    std::size_t levels = 4;
    bool self_reference = false;
    std::size_t reference_levels = 2;

    void validate() const {
        if (!(end_time > 0.0)) throw ConfigError("end_time must be positive");
        if (!(cfl_fraction > 0.0 && cfl_fraction <= 1.0)) throw ConfigError("cfl_fraction must lie in (0, 1]");
        if (dt && !(*dt > 0.0)) throw ConfigError("dt must be positive");
        if (source && !(source->x_max > source->x_min)) throw ConfigError("source strip is empty");
        if (source && !(source->width > 0.0)) throw ConfigError("source width must be positive");
    }
};

namespace detail {

inline std::vector<double> parse_numbers(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::istringstream in(text);
    for (std::string tok; in >> tok;) {
        double v{};
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw ConfigError("invalid number '" + tok + "' for key '" + key + "'");
        out.push_back(v);
    }
    return out;
}

template <class T>
T get_value(const boost::property_tree::ptree& section, const std::string& key, T fallback) {
    auto v = section.get_optional<std::string>(key);
    if (!v) return fallback;
    const auto nums = parse_numbers(*v, key);
    if (nums.size() != 1) throw ConfigError("key '" + key + "' expects one number");
    if constexpr (std::is_integral_v<T>) {
        if (nums[0] < 0 || nums[0] != std::floor(nums[0])) throw ConfigError("key '" + key + "' expects a count");
    }
    return static_cast<T>(nums[0]);
}

}  // namespace detail

inline SimConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(e.line(), e.message());
    }
    SimConfig c;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    bool saw_material = false;
    for (const auto& [name, sec] : tree) {
        if (name == "scenario") {
            c.name = sec.get<std::string>("name", c.name);
            c.end_time = detail::get_value(sec, "end_time", c.end_time);
            if (sec.count("hole_tag")) c.hole_tag = detail::get_value<int>(sec, "hole_tag", 0);
        } else if (name == "mesh") {
            c.mesh.generator = sec.get<std::string>("generator", c.mesh.generator);
            c.mesh.nx = detail::get_value(sec, "nx", c.mesh.nx);
            c.mesh.ny = detail::get_value(sec, "ny", c.mesh.ny);
            c.mesh.refine = detail::get_value(sec, "refine", c.mesh.refine);
            if (auto b = sec.get_optional<std::string>("bbox")) {
                const auto v = detail::parse_numbers(*b, "bbox");
                if (v.size() != 4) throw ConfigError("bbox expects 'xmin xmax ymin ymax'");
                c.mesh.bbox = {v[0], v[1], v[2], v[3]};
            }
            if (auto f = sec.get_optional<std::string>("file")) c.mesh.file = resolve(*f);
        } else if (name == "time") {
            c.cfl_fraction = detail::get_value(sec, "cfl_fraction", c.cfl_fraction);
            if (sec.count("dt")) c.dt = detail::get_value(sec, "dt", 0.0);
        } else if (name.rfind("material.", 0) == 0) {
            int region = 0;
            const std::string tag = name.substr(9);
            auto res = std::from_chars(tag.data(), tag.data() + tag.size(), region);
            if (res.ec != std::errc{} || res.ptr != tag.data() + tag.size())
                throw ConfigError("invalid region tag in section [" + name + "]");
            if (!saw_material) c.materials.clear();
            saw_material = true;
            Material m;
            if (sec.count("eps")) {
                m = Material::isotropic(detail::get_value(sec, "eps", 1.0));
            } else {
                const double xx = detail::get_value(sec, "eps_xx", 1.0), xy = detail::get_value(sec, "eps_xy", 0.0),
                             yy = detail::get_value(sec, "eps_yy", 1.0);
                m.eps = Mat2{{xx, xy, xy, yy}};
            }
            m.mu = detail::get_value(sec, "mu", 1.0);
            if (!(m.mu > 0.0) || !(m.eps(0, 0) > 0.0) || !(m.eps.det() > 0.0))
                throw ConfigError("material for region " + tag + " is not positive definite");
            c.materials[region] = m;
        } else if (name == "initial") {
            if (auto v = sec.get_optional<std::string>("cavity_mode")) {
                const auto mn = detail::parse_numbers(*v, "cavity_mode");
                if (mn.size() != 2 || mn[0] < 1 || mn[1] < 1) throw ConfigError("cavity_mode expects 'm n' with m, n >= 1");
                c.initial_mode = CavityMode{static_cast<int>(mn[0]), static_cast<int>(mn[1])};
            }
        } else if (name == "source") {
            const std::string type = sec.get<std::string>("type", "none");
            if (type == "plane_wave") {
                PlaneWaveSource s;
                s.x_min = detail::get_value(sec, "x_min", s.x_min);
                s.x_max = detail::get_value(sec, "x_max", s.x_max);
                s.amplitude = detail::get_value(sec, "amplitude", s.amplitude);
                s.center_time = detail::get_value(sec, "center_time", s.center_time);
                s.width = detail::get_value(sec, "width", s.width);
                c.source = s;
            } else if (type != "none") {
                throw ConfigError("unknown source type '" + type + "'");
            }
        } else if (name == "output") {
            if (auto d = sec.get_optional<std::string>("directory")) c.output_dir = resolve(*d);
            c.snapshot_stride = detail::get_value(sec, "stride", c.snapshot_stride);
            if (auto t = sec.get_optional<std::string>("times")) c.snapshot_times = detail::parse_numbers(*t, "times");
            if (auto p = sec.get_optional<std::string>("probes")) {
                std::istringstream in_p(*p);
                for (std::string item; std::getline(in_p, item, ';');) {
                    const auto xy = detail::parse_numbers(item, "probes");
                    if (xy.empty()) continue;
                    if (xy.size() != 2) throw ConfigError("probes expects 'x y; x y; ...'");
                    c.probes.push_back({xy[0], xy[1]});
                }
            }
        } else if (name == "convergence") {
            c.levels = detail::get_value(sec, "levels", c.levels);
            const std::string ref = sec.get<std::string>("reference", "exact");
            if (ref != "exact" && ref != "self") throw ConfigError("convergence reference must be 'exact' or 'self'");
            c.self_reference = ref == "self";
            c.reference_levels = detail::get_value(sec, "reference_levels", c.reference_levels);
        } else {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    c.validate();
    return c;
}

inline SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, path.parent_path());
}

inline Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mesh file " + path.string());
    return read_mesh(in);
}

inline Mesh generate_mesh(const std::string& kind, std::size_t nx, std::size_t ny, const BBox& bbox) {
    if (kind == "quad") return build_structured_quad_mesh(nx, ny, bbox);
    if (kind == "tri") return build_structured_tri_mesh(nx, ny, bbox);
    if (kind == "hybrid") return build_structured_hybrid_mesh(nx, ny, bbox);
    throw ConfigError("unknown mesh generator '" + kind + "'");
}

inline Mesh build_mesh(const MeshSpec& spec) {
    Mesh mesh = spec.file.empty() ? generate_mesh(spec.generator, spec.nx, spec.ny, spec.bbox) : load_mesh(spec.file);
    for (std::size_t r = 0; r < spec.refine; ++r) mesh = refine_uniform(mesh);
    return mesh;
}

/// Checks that every material region exists in the mesh (and vice versa, via
/// MaterialField::from_regions) and that required boundary tags are present.
inline MaterialField resolve_materials(const SimConfig& c, const Mesh& mesh) {
    std::set<int> regions;
    for (const auto& el : mesh.elements()) regions.insert(el.region);
    for (const auto& [tag, m] : c.materials)
        if (!regions.count(tag)) throw ConfigError("material region " + std::to_string(tag) + " does not occur in the mesh");
    if (c.hole_tag) {
        bool found = false;
        for (const auto& e : mesh.edges()) found = found || (e.boundary() && e.tag == *c.hole_tag);
        if (!found) throw ConfigError("boundary tag " + std::to_string(*c.hole_tag) + " does not occur in the mesh");
    }
    return MaterialField::from_regions(mesh, c.materials);
}

/// Soft line current J = g(t) (0, 1) in the strip x_min <= x <= x_max, with a
/// Gaussian pulse g(t) = A exp(-((t - t0) / w)^2). Elements belong to the
/// strip when their centroid does; j_i = g(t) * integral of phi_i . (0, 1).
inline SourceTerm plane_wave_source(const Mesh& mesh, const DofMap& dofs, const PlaneWaveSource& src) {
    Vector pattern(dofs.num_edge_dofs(), 0.0);
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const Vec2 c = mesh.centroid(t);
        if (c[0] < src.x_min || c[0] > src.x_max) continue;
        const auto& el = mesh.elements()[t];
        const AffineMap map = mesh.affine_map(t);
        const double area = map.determinant * reference_area(el.kind);
        const QuadratureRule q = gauss_quadrature(el.kind, 3);
        for (int a = 0; a < el.size(); ++a) {
            const std::size_t i = dofs.local_dof(t, a);
            if (i == npos) continue;
            double s = 0.0;
            for (std::size_t l = 0; l < q.points.size(); ++l)
                s += q.weights[l] * (map.inverse_transpose * eval_merged_basis_normalized(el.kind, a, q.points[l]))[1];
            pattern[i] += area * dofs.local_sign(t, a) * s;
        }
    }
    return SourceTerm::separable(std::move(pattern), [src](double t) {
        const double z = (t - src.center_time) / src.width;
        return src.amplitude * std::exp(-z * z);
    });
}

namespace detail {

inline std::string format_csv(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

}  // namespace detail

/// Element CSV (`centroid_x,centroid_y,H_z`) and edge CSV
/// (`midpoint_x,midpoint_y,e`), each preceded by a `# step=<n> time=<t>` line.
inline void export_snapshot(const Mesh& mesh, const DofMap& dofs, std::size_t step, double time,
                            std::span<const double> e, std::span<const double> h, std::ostream& element_out,
                            std::ostream& edge_out) {
    element_out << "# step=" << step << " time=" << detail::format_csv(time) << '\n' << "centroid_x,centroid_y,H_z\n";
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const Vec2 c = mesh.centroid(t);
        element_out << detail::format_csv(c[0]) << ',' << detail::format_csv(c[1]) << ',' << detail::format_csv(h[t])
                    << '\n';
    }
    edge_out << "# step=" << step << " time=" << detail::format_csv(time) << '\n' << "midpoint_x,midpoint_y,e\n";
    for (std::size_t i = 0; i < dofs.num_edge_dofs(); ++i) {
        const Vec2 m = mesh.edge_midpoint(dofs.dof_edge(i));
        edge_out << detail::format_csv(m[0]) << ',' << detail::format_csv(m[1]) << ',' << detail::format_csv(e[i]) << '\n';
    }
    if (!element_out || !edge_out) throw Error("failed to write snapshot");
}

/// Third column of a snapshot CSV written by export_snapshot.
inline Vector read_snapshot_values(std::istream& in) {
    Vector v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("centroid", 0) == 0 || line.rfind("midpoint", 0) == 0) continue;
        const auto pos = line.rfind(',');
        if (pos == std::string::npos) throw ParseError(lineno, "expected three comma-separated columns");
        v.push_back(detail::parse_number<double>(line.substr(pos + 1), lineno));
    }
    return v;
}

struct ProbeSeries {
    Vec2 point{};
    std::size_t element = npos;
    std::vector<double> times;   ///< time of h (half-integer levels)
    std::vector<double> values;  ///< H_z in the probe element
};

struct RunResult {
    Mesh mesh;
    FieldState state;
    double dt = 0.0;
    std::size_t steps = 0;
    std::vector<std::filesystem::path> snapshot_files;
    std::vector<ProbeSeries> probes;
};

/// Runs a configured scenario: snapshots at `stride` and at the listed
/// times (nearest step), probe time series every step.
inline RunResult run_scenario(const SimConfig& c) {
    c.validate();
    RunResult r;
    r.mesh = build_mesh(c.mesh);
    const Mesh& mesh = r.mesh;
    Problem p;
    p.materials = resolve_materials(c, mesh);
    if (c.initial_mode) {
        const CavityMode mode = *c.initial_mode;
        p.initial_E = [mode](const Vec2& x) { return mode.E(0.0, x); };
        p.initial_H = [mode](double t, const Vec2& x) { return mode.H(t, x); };
    }
    if (c.source) {
        const PlaneWaveSource src = *c.source;
        p.source = [src](const Mesh& m, const DofMap& d) { return plane_wave_source(m, d, src); };
    }
    r.steps = c.dt ? static_cast<std::size_t>(std::ceil(c.end_time / *c.dt - 1e-9))
                   : steps_for_cfl(mesh, p.materials, c.end_time, c.cfl_fraction);
    r.dt = c.end_time / static_cast<double>(r.steps);

    std::set<std::size_t> snapshot_steps;
    for (double t : c.snapshot_times) {
        if (t < 0.0 || t > c.end_time) throw ConfigError("snapshot time outside [0, end_time]");
        snapshot_steps.insert(static_cast<std::size_t>(std::lround(t / r.dt)));
    }
    for (const auto& x : c.probes) {
        ProbeSeries s;
        s.point = x;
        s.element = locate_point(mesh, x);
        if (s.element == npos) throw ConfigError("probe point outside the mesh");
        r.probes.push_back(std::move(s));
    }
    if (!c.output_dir.empty()) std::filesystem::create_directories(c.output_dir);
    const DofMap dofs(mesh);
    const double dt = r.dt;
    auto observer = [&](std::size_t step, double time, std::span<const double> e, std::span<const double> h) {
        for (auto& pr : r.probes) {
            pr.times.push_back(time + 0.5 * dt);
            pr.values.push_back(h[pr.element]);
        }
        const bool by_stride = c.snapshot_stride > 0 && step % c.snapshot_stride == 0;
        if (c.output_dir.empty() || !(by_stride || snapshot_steps.count(step))) return;
        std::ostringstream stem;
        stem << std::setw(6) << std::setfill('0') << step;
        const auto hp = c.output_dir / ("h_" + stem.str() + ".csv");
        const auto ep = c.output_dir / ("e_" + stem.str() + ".csv");
        std::ofstream ho(hp), eo(ep);
        if (!ho || !eo) throw Error("cannot open snapshot files in " + c.output_dir.string());
        export_snapshot(mesh, dofs, step, time, e, h, ho, eo);
        r.snapshot_files.push_back(hp);
        r.snapshot_files.push_back(ep);
    };
    r.state = solve(mesh, p, c.end_time, r.steps, observer, 1).state;
    return r;
}

/// Convergence table for a configured scenario: exact cavity reference when an
/// initial cavity mode is configured and `reference = exact`, otherwise a
/// fine self-reference.
inline EocTable run_convergence(const SimConfig& c, std::size_t levels) {
    c.validate();
    ConvergenceSetup s;
    s.base = build_mesh(c.mesh);
    resolve_materials(c, s.base);
    s.materials = c.materials;
    s.end_time = c.end_time;
    s.cfl_fraction = c.cfl_fraction;
    s.reference_extra_levels = c.reference_levels;
    if (c.initial_mode) {
        const CavityMode mode = *c.initial_mode;
        s.problem.initial_E = [mode](const Vec2& x) { return mode.E(0.0, x); };
        s.problem.initial_H = [mode](double t, const Vec2& x) { return mode.H(t, x); };
        if (!c.self_reference) s.exact = mode;
    } else if (!c.self_reference) {
        throw ConfigError("exact reference requires [initial] cavity_mode; use reference = self");
    }
    if (c.source) {
        const PlaneWaveSource src = *c.source;
        s.problem.source = [src](const Mesh& m, const DofMap& d) { return plane_wave_source(m, d, src); };
    }
    return convergence_study(s, levels);
}

}  // namespace maxlump
