// Command-line front end: run bundled or file scenarios and the reference
// oracles.
#include <cmath>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qwalk/analysis.hpp"
#include "qwalk/kubelka_munk.hpp"
#include "qwalk/optics.hpp"
#include "qwalk/scenario.hpp"

namespace fs = std::filesystem;
using namespace qwalk;

namespace
{
enum Exit
{
    ok = 0,
    failure = 1,
    usage = 2,
    overflow = 3,
};

ScenarioConfig resolve(std::string const& what)
{
    std::error_code ec;
    if (fs::is_regular_file(what, ec))
        return load_config(what);
    if (auto cfg = find_scenario(what))
        return *cfg;
    throw Error(ErrorCode::config,
                fmt::format("'{}' is neither a config file nor a bundled "
                            "scenario (see `qwalk list`)",
                            what));
}

int cmd_run(std::string const& target, RunOptions const& opts)
{
    ScenarioConfig const cfg = resolve(target);
    RunRecord const rec = run_scenario(cfg, opts);
    std::cerr << fmt::format("[{}] finished in {:.1f} s with {} worker(s)\n",
                             cfg.name, rec.wall_seconds, rec.workers);
    for (auto const& p : rec.outputs)
        std::cout << p.generic_string() << '\n';
    return ok;
}

int cmd_list()
{
    for (auto const& s : bundled_scenarios())
    {
        auto const cfg = parse_config(s.text, s.name);
        std::string detail;
        if (cfg.kind == ScenarioKind::walk)
        {
            detail = fmt::format("{} gamma={} T={} N={}",
                                 to_string(cfg.family.tag), cfg.family.gamma,
                                 cfg.horizon, cfg.effective_lattice_size());
            if (cfg.family.tag == CoinFamilyTag::random_b)
                detail += fmt::format(" M={} seeds={}..{}",
                                      cfg.family.impurity_count,
                                      cfg.seeds.first, cfg.seeds.last);
        }
        else
        {
            detail = std::string(to_string(cfg.kind));
        }
        std::cout << fmt::format("{:<18} {}\n", s.name, detail);
    }
    return ok;
}

int cmd_validate(std::string const& path)
{
    auto const diags = validate_config(path);
    if (diags.empty())
    {
        std::cout << path << ": ok\n";
        return ok;
    }
    for (auto const& d : diags)
        std::cerr << d.format(path) << '\n';
    return usage;
}

int cmd_konno(long t, bool printed)
{
    if (t < 1)
        throw Error(ErrorCode::domain, "--t must be >= 1");
    KonnoForm const form = printed ? KonnoForm::printed : KonnoForm::normalized;
    // Lattice sites of the parity of t carry twice the continuum weight.
    std::cout << "n,x,limit_density,site_probability\n";
    for (long n = -t; n <= t; n += 2)
    {
        double const x = static_cast<double>(n) / static_cast<double>(t);
        double const f = konno_limit_density(x, form);
        double const p = std::isfinite(f) ? 2 * f / static_cast<double>(t)
                                          : f;
        std::cout << fmt::format("{},{},{},{}\n", n, format_double(x),
                                 format_double(f), format_double(p));
    }
    return ok;
}

int cmd_s_matrix(std::string const& path, int bounces)
{
    auto const segs = load_stack(path);
    nlohmann::json j;
    auto const comp = optics::composite_s(segs);
    j["composite"] = to_json(comp);
    j["composite_flux"] = to_json(
        optics::flux_normalized(comp, segs.front().k, segs.back().k));
    try
    {
        j["path_sum"] = to_json(optics::path_sum_s(segs, bounces));
    }
    catch (Error const& e)
    {
        j["path_sum_error"] = e.what();
    }
    if (segs.size() == 3)
        j["closed_form"] = to_json(optics::two_interface_closed_form(segs));
    std::cout << j.dump(2) << '\n';
    return ok;
}

int cmd_km_reflect(std::string const& path)
{
    auto const cfg = load_layers(path);
    if (!cfg.layers.empty())
    {
        std::cout << "layers,reflectance\n";
        for (std::size_t n = 1; n <= cfg.layers.size(); ++n)
        {
            std::span<km::Layer const> top(cfg.layers.data(), n);
            std::cout << fmt::format(
                "{},{}\n", n,
                format_double(km::km_stack_reflectance(top, cfg.backing)));
        }
    }
    if (!cfg.ratios.empty())
    {
        std::cout << "wavelength,k_over_s,r_infinity\n";
        for (auto const& r : cfg.ratios)
            std::cout << fmt::format(
                "{},{},{}\n", format_double(r.wavelength),
                format_double(r.k_over_s),
                format_double(km::km_r_infinity(r.k_over_s)));
    }
    return ok;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quantum-walk localization and layered-media scattering"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(software_version()));

    std::string seeds_text;
    unsigned workers = 0;
    std::string out_dir;
    bool paper_compat = false;

    auto* run = app.add_subcommand("run", "Run a bundled scenario or config");
    std::string target;
    run->add_option("scenario", target, "Bundled name or config path")
        ->required();
    run->add_option("--seeds", seeds_text, "Seed range A..B");
    run->add_option("--workers", workers, "Worker threads (0 = all cores)");
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--paper-compat", paper_compat,
                  "Use the legacy N = 6000 lattice and unnormalized limit density");

    app.add_subcommand("list", "List bundled scenarios");

    auto* validate = app.add_subcommand("validate", "Check a config file");
    std::string validate_path;
    validate->add_option("path", validate_path)->required();

    auto* oracle = app.add_subcommand("oracle", "Reference curves");
    oracle->require_subcommand(1);
    auto* konno = oracle->add_subcommand("konno",
                                         "Weak-limit density of X_t/t");
    long konno_t = 3000;
    konno->add_option("--t", konno_t, "Time step")->required();
    konno->add_flag("--paper-compat", paper_compat,
                    "Emit the unnormalized legacy form");

    auto* optics_cmd = app.add_subcommand("optics", "Layered-media scattering");
    optics_cmd->require_subcommand(1);
    auto* smat = optics_cmd->add_subcommand("s-matrix",
                                            "S-matrix of a stack file");
    std::string stack_path;
    int bounces = 60;
    smat->add_option("stack", stack_path)->required();
    smat->add_option("--bounces", bounces, "Bounce cutoff for the path sum");

    auto* km_cmd = app.add_subcommand("km", "Kubelka-Munk reflectance");
    km_cmd->require_subcommand(1);
    auto* reflect = km_cmd->add_subcommand("reflect",
                                           "Reflectance of a layers file");
    std::string layers_path;
    reflect->add_option("layers", layers_path)->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        return app.exit(e);
    }

    try
    {
        if (*run)
        {
            RunOptions opts;
            if (!seeds_text.empty())
                opts.seeds = parse_seed_range(seeds_text);
            opts.workers = workers;
            if (!out_dir.empty())
                opts.output_dir = out_dir;
            opts.paper_compat = paper_compat;
            opts.progress = [](std::string const& msg) {
                std::cerr << msg << '\n';
            };
            return cmd_run(target, opts);
        }
        if (app.got_subcommand("list"))
            return cmd_list();
        if (*validate)
            return cmd_validate(validate_path);
        if (*konno)
            return cmd_konno(konno_t, paper_compat);
        if (*smat)
            return cmd_s_matrix(stack_path, bounces);
        if (*reflect)
            return cmd_km_reflect(layers_path);
    }
    catch (ConfigError const& e)
    {
        std::cerr << "config error:\n" << e.what() << '\n';
        return usage;
    }
    catch (BoundaryOverflow const& e)
    {
        std::cerr << "boundary overflow: " << e.what() << '\n';
        return overflow;
    }
    catch (Error const& e)
    {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what()
                  << '\n';
        return e.code() == ErrorCode::config ? usage : failure;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return failure;
}
