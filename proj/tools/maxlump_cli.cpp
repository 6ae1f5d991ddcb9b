#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "maxlump/assembly.hpp"
#include "maxlump/benchmarks.hpp"
#include "maxlump/error.hpp"
#include "maxlump/mesh.hpp"
#include "maxlump/reference_basis.hpp"
#include "maxlump/scenario.hpp"

namespace {

using namespace maxlump;

struct MeshArgs {
    std::string file;
    std::string kind = "quad";
    std::size_t nx = 4, ny = 4;
    std::vector<double> bbox{0.0, 1.0, 0.0, 1.0};
    std::size_t refine = 0;
    double perturb = 0.0;
    std::uint64_t seed = 1;

    void add_to(CLI::App* app, bool with_file) {
        if (with_file) app->add_option("--mesh", file, "Mesh file (overrides the generator options)");
        app->add_option("--kind", kind, "Generator: quad, tri or hybrid")->check(CLI::IsMember({"quad", "tri", "hybrid"}));
        app->add_option("--nx", nx, "Cells in x")->check(CLI::PositiveNumber);
        app->add_option("--ny", ny, "Cells in y")->check(CLI::PositiveNumber);
        app->add_option("--bbox", bbox, "xmin xmax ymin ymax")->expected(4);
        app->add_option("--refine", refine, "Uniform refinements applied afterwards");
        app->add_option("--perturb", perturb, "Random interior vertex shift (triangles only), relative to edge length");
        app->add_option("--seed", seed, "Seed for --perturb");
    }

    Mesh build() const {
        Mesh mesh = file.empty() ? generate_mesh(kind, nx, ny, {bbox[0], bbox[1], bbox[2], bbox[3]}) : load_mesh(file);
        if (perturb > 0.0) mesh = perturb_interior_vertices(mesh, perturb, seed);
        for (std::size_t r = 0; r < refine; ++r) mesh = refine_uniform(mesh);
        return mesh;
    }
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw Error("cannot open output file " + path);
    return file;
}

void print_mesh_info(const Mesh& mesh, std::ostream& out) {
    std::size_t tris = 0;
    std::map<int, std::size_t> regions, tags;
    for (const auto& el : mesh.elements()) {
        tris += el.kind == ElementKind::triangle;
        ++regions[el.region];
    }
    for (const auto& e : mesh.edges())
        if (e.boundary()) ++tags[e.tag];
    out << "vertices        " << mesh.num_vertices() << '\n'
        << "elements        " << mesh.num_elements() << " (" << tris << " triangles, " << mesh.num_elements() - tris
        << " parallelograms)\n"
        << "edges           " << mesh.num_edges() << " (" << mesh.num_interior_edges() << " interior)\n"
        << "area            " << mesh.total_area() << '\n'
        << "max diameter    " << mesh.max_diameter() << '\n';
    for (const auto& [r, n] : regions) out << "region " << r << "        " << n << " elements\n";
    for (const auto& [t, n] : tags) out << "boundary tag " << t << "  " << n << " edges\n";
}

SparseMatrix named_matrix(const std::string& name, const Mesh& mesh, const MaterialField& mat) {
    const DofMap dofs(mesh);
    if (name == "mass_H") return assemble_mass_H(mesh, mat).to_sparse();
    if (name == "lumped_mass_E") return assemble_lumped_mass_E(mesh, mat, dofs).to_sparse();
    if (name == "curl") return assemble_curl(mesh, dofs);
    if (name == "curl_tilde") return assemble_curl_tilde(mesh, dofs);
    if (name == "projection") return build_projection(dofs);
    if (name == "inverse_mass_E")
        return build_inverse_mass_E(assemble_lumped_mass_E(mesh, mat, dofs), build_projection(dofs));
    if (name == "stiffness") return assemble_stiffness(mesh, mat, dofs);
    throw InvalidArgument("unknown matrix '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mass-lumped edge element solver for 2D TE Maxwell problems"};
    app.require_subcommand(1);

    auto* mesh_cmd = app.add_subcommand("mesh", "Generate or inspect meshes");
    mesh_cmd->require_subcommand(1);
    MeshArgs gen_args;
    std::string gen_out;
    auto* gen = mesh_cmd->add_subcommand("gen", "Generate a structured mesh");
    gen_args.add_to(gen, false);
    gen->add_option("-o,--output", gen_out, "Output file (default: stdout)");
    std::string info_file;
    auto* info = mesh_cmd->add_subcommand("info", "Print mesh statistics");
    info->add_option("file", info_file, "Mesh file")->required();

    MeshArgs asm_args;
    std::string matrix, asm_out;
    double asm_eps = 1.0, asm_mu = 1.0;
    auto* assemble = app.add_subcommand("assemble", "Assemble one matrix and write it in coordinate format");
    asm_args.add_to(assemble, true);
    assemble
        ->add_option("--matrix", matrix,
                     "mass_H, lumped_mass_E, curl, curl_tilde, projection, inverse_mass_E or stiffness")
        ->required();
    assemble->add_option("--eps", asm_eps, "Uniform permittivity")->check(CLI::PositiveNumber);
    assemble->add_option("--mu", asm_mu, "Uniform permeability")->check(CLI::PositiveNumber);
    assemble->add_option("-o,--output", asm_out, "Output file (default: stdout)");

    std::string run_config, run_outdir;
    auto* run = app.add_subcommand("run", "Run a scenario");
    run->add_option("config", run_config, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--output-dir", run_outdir, "Override the snapshot directory");

    std::string conv_config, conv_csv;
    std::size_t conv_levels = 0;
    auto* converge = app.add_subcommand("converge", "Convergence study on uniform refinements");
    converge->add_option("config", conv_config, "Scenario file")->required()->check(CLI::ExistingFile);
    converge->add_option("--levels", conv_levels, "Number of levels (>= 3; default from the config)");
    converge->add_option("--csv", conv_csv, "Also write the table as CSV");

    std::size_t yee_nx = 8, yee_ny = 8, yee_steps = 100, yee_perturb = npos;
    auto* yee = app.add_subcommand("yee-check", "Compare the lumped scheme with a staggered-grid finite difference run");
    yee->add_option("--nx", yee_nx)->check(CLI::PositiveNumber);
    yee->add_option("--ny", yee_ny)->check(CLI::PositiveNumber);
    yee->add_option("--steps", yee_steps);
    yee->add_option("--perturb-element", yee_perturb, "Double eps on this element (negative control)");

    auto* dump = app.add_subcommand("dump-basis", "Print the reference basis functions and quadrature rules");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            std::ofstream f;
            write_mesh(gen_args.build(), open_output(gen_out, f));
        } else if (info->parsed()) {
            print_mesh_info(load_mesh(info_file), std::cout);
        } else if (assemble->parsed()) {
            const Mesh mesh = asm_args.build();
            const auto mat = MaterialField::uniform(mesh.num_elements(), Material::isotropic(asm_eps, asm_mu));
            std::ofstream f;
            named_matrix(matrix, mesh, mat).write_coordinate(open_output(asm_out, f));
        } else if (run->parsed()) {
            SimConfig c = load_config(run_config);
            if (!run_outdir.empty()) c.output_dir = run_outdir;
            const RunResult r = run_scenario(c);
            std::cout << "scenario " << c.name << ": " << r.mesh.num_elements() << " elements, " << r.steps
                      << " steps of dt = " << r.dt << '\n';
            std::cout << "snapshot files written: " << r.snapshot_files.size() << '\n';
            for (const auto& p : r.probes) {
                double peak = 0.0, t_peak = 0.0;
                for (std::size_t k = 0; k < p.values.size(); ++k)
                    if (std::abs(p.values[k]) > peak) peak = std::abs(p.values[k]), t_peak = p.times[k];
                std::cout << "probe (" << p.point[0] << ", " << p.point[1] << "): max |H_z| = " << peak
                          << " at t = " << t_peak << '\n';
            }
        } else if (converge->parsed()) {
            const SimConfig c = load_config(conv_config);
            const EocTable t = run_convergence(c, conv_levels ? conv_levels : c.levels);
            t.write_text(std::cout);
            if (!conv_csv.empty()) {
                std::ofstream f(conv_csv);
                if (!f) throw Error("cannot open " + conv_csv);
                t.write_csv(f);
            }
            if (!t.failure.empty()) return 2;
        } else if (yee->parsed()) {
            YeeCheckOptions opt;
            opt.perturbed_element = yee_perturb;
            const auto t0 = std::chrono::steady_clock::now();
            const double diff = verify_yee_equivalence(yee_nx, yee_ny, yee_steps, opt);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("max |fem - yee| = %.3e over %zu steps on %zux%zu (%.2f s)\n", diff, yee_steps, yee_nx, yee_ny, secs);
        } else if (dump->parsed()) {
            describe_basis(std::cout);
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
