#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "homlag/errors.hpp"
#include "homlag/scene.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw homlag::Error(homlag::ErrorCode::IoError, "cannot read scene file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const homlag::RunResult& r) {
    if (r.out_path.empty()) {
        std::cout << r.payload;
        return;
    }
    std::ofstream out(r.out_path, std::ios::binary);
    if (!out) throw homlag::Error(homlag::ErrorCode::IoError, "cannot open " + r.out_path);
    out << r.payload;
    if (!out) throw homlag::Error(homlag::ErrorCode::IoError, "short write to " + r.out_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reparametrization-invariant mechanics engine"};
    app.require_subcommand(1);

    std::string scene_path;
    homlag::CliOptions opts;
    std::string format, dng_norm, out_path;
    int quad_order = 0, refine = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scene", scene_path, "scene file")->required();
        sub->add_option("--seed", opts.seed, "random seed (u64)");
        sub->add_option("--out", out_path, "output path (default: scene [output].path or stdout)");
        sub->add_option("--format", format, "jsonl|csv")->check(CLI::IsMember({"jsonl", "csv"}));
        sub->add_option("--dng-normalization", dng_norm, "paper|cauchy-binet")
            ->check(CLI::IsMember({"paper", "cauchy-binet"}));
        sub->add_option("--quadrature-order", quad_order, "Gauss-Legendre order");
        sub->add_option("--refine", refine, "quadrature refinement levels");
    };

    CLI::App* sim = app.add_subcommand("simulate", "integrate a scene and write the trajectory");
    CLI::App* diag = app.add_subcommand("diagnose", "run the identity battery at random states");
    CLI::App* brane = app.add_subcommand("brane", "evaluate brane actions and invariance checks");
    CLI::App* sweep = app.add_subcommand("sweep", "sweep one variable, write a CSV table");
    for (CLI::App* sub : {sim, diag, brane, sweep}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    if (!format.empty()) opts.format = format;
    if (!dng_norm.empty()) opts.dng_normalization = dng_norm;
    if (!out_path.empty()) opts.out = out_path;
    if (quad_order > 0) opts.quadrature_order = quad_order;
    if (refine >= 0) opts.refine = refine;

    try {
        const std::string scene = read_file(scene_path);
        homlag::RunResult r;
        if (sim->parsed()) r = homlag::run_simulate(scene, opts);
        if (diag->parsed()) r = homlag::run_diagnose(scene, opts);
        if (brane->parsed()) r = homlag::run_brane(scene, opts);
        if (sweep->parsed()) r = homlag::run_sweep(scene, opts);
        write_output(r);
        std::cerr << r.human << "\n";
        return r.exit_code;
    } catch (const homlag::Error& e) {
        std::cerr << "error (" << e.code_name() << "): " << e.what() << "\n";
        return homlag::exit_code_for_error_code(static_cast<int>(e.code()));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
