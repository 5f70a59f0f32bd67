#include "qwalk/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "qwalk/error.hpp"
#include "qwalk/rng.hpp"

namespace qwalk
{
namespace
{
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}
}  // namespace

//---------------------------------------------------------------------------//
std::string_view to_string(ScenarioKind kind)
{
    switch (kind)
    {
        case ScenarioKind::walk:
            return "walk";
        case ScenarioKind::optics:
            return "optics";
        case ScenarioKind::km:
            return "km";
    }
    return "?";
}

std::string_view to_string(Observable obs)
{
    switch (obs)
    {
        case Observable::density:
            return "density";
        case Observable::cog:
            return "cog";
        case Observable::alpha:
            return "alpha";
        case Observable::sd:
            return "sd";
        case Observable::laplace:
            return "laplace";
        case Observable::window:
            return "window";
        case Observable::eta:
            return "eta";
    }
    return "?";
}

std::size_t ScenarioConfig::effective_lattice_size() const
{
    if (lattice_size)
        return *lattice_size;
    if (compat(compat::lattice_6000))
        return 6000;
    return lattice_size_for(static_cast<std::size_t>(std::max(horizon, 1L)));
}

std::vector<std::optional<std::uint64_t>> ScenarioConfig::run_seeds() const
{
    std::vector<std::optional<std::uint64_t>> out;
    if (family.tag != CoinFamilyTag::random_b)
    {
        out.emplace_back();
        return out;
    }
    for (std::uint64_t s = seeds.first; !seeds.empty(); ++s)
    {
        out.emplace_back(s);
        if (s == seeds.last)
            break;
    }
    return out;
}

nlohmann::json ScenarioConfig::to_json() const
{
    nlohmann::json j;
    j["name"] = name;
    j["kind"] = to_string(kind);
    j["output_dir"] = output_dir.generic_string();
    j["paper_compat"] = paper_compat_flags;
    switch (kind)
    {
        case ScenarioKind::walk: {
            j["coin"] = {{"family", to_string(family.tag)},
                         {"gamma", family.gamma},
                         {"impurities", family.impurity_count},
                         {"sampling", to_string(family.sampling)}};
            j["lattice_size"] = effective_lattice_size();
            j["horizon"] = horizon;
            if (family.tag == CoinFamilyTag::random_b)
                j["seeds"] = {seeds.first, seeds.last};
            j["snapshot_times"] = snapshot_times;
            j["series_stride"] = series_stride;
            std::vector<std::string> obs;
            for (auto o : observables)
                obs.emplace_back(to_string(o));
            j["observables"] = obs;
            j["analysis"] = {{"alpha_half_window", alpha_half_window},
                             {"alpha_fit",
                              {alpha_fit_lo, alpha_fit_hi.value_or(horizon)}},
                             {"window_half_width", window_half_width},
                             {"smoothing", smoothing_width},
                             {"laplace_floor", laplace_floor},
                             {"laplace_front_margin", laplace_front_margin}};
            break;
        }
        case ScenarioKind::optics: {
            auto segs = nlohmann::json::array();
            for (auto const& s : segments)
                segs.push_back({{"k", s.k}, {"a", s.a}});
            j["segments"] = segs;
            j["max_bounces"] = max_bounces;
            break;
        }
        case ScenarioKind::km: {
            auto ls = nlohmann::json::array();
            for (auto const& l : layers)
                ls.push_back({{"s", l.s}, {"k", l.k}, {"d", l.d}});
            j["layers"] = ls;
            j["backing"] = backing;
            auto rs = nlohmann::json::array();
            for (auto const& r : ratios)
                rs.push_back({{"wavelength", r.wavelength},
                              {"k_over_s", r.k_over_s}});
            j["ratios"] = rs;
            break;
        }
    }
    return j;
}

nlohmann::json to_json(FieldProvenance const& p)
{
    nlohmann::json j{{"family", p.family},
                     {"gamma", p.gamma},
                     {"lattice_size", p.lattice_size},
                     {"impurity_count", p.impurity_count},
                     {"rng_algorithm", p.rng_algorithm},
                     {"sampling", p.sampling},
                     {"impurity_sites", p.impurity_sites}};
    j["seed"] = p.seed ? nlohmann::json(*p.seed) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(optics::SMatrix const& s)
{
    auto c = [](Complex z) { return nlohmann::json{z.real(), z.imag()}; };
    return {{"t", c(s.t())},
            {"r", c(s.r())},
            {"r_prime", c(s.r_prime())},
            {"t_prime", c(s.t_prime())}};
}

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                    nullptr))
    {
        throw Error(ErrorCode::io, "SHA-256 digest failed");
    }
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i)
        out += fmt::format("{:02x}", digest[i]);
    return out;
}

std::string format_double(double v)
{
    return fmt::format("{:.17g}", v);
}

std::string_view software_version()
{
    return QWALK_VERSION;
}

//---------------------------------------------------------------------------//
// Ensemble
//---------------------------------------------------------------------------//
TimeSeries EnsembleResult::cog_series() const
{
    TimeSeries s{"cog", {}, {}};
    for (std::size_t t = 0; t < mean_moments.size(); ++t)
    {
        s.times.push_back(static_cast<long>(t));
        s.values.push_back(mean_moments[t].half_mass > 0
                               ? mean_moments[t].cog()
                               : std::numeric_limits<double>::quiet_NaN());
    }
    return s;
}

TimeSeries EnsembleResult::sd_series() const
{
    TimeSeries s{"sd", {}, {}};
    for (std::size_t t = 0; t < mean_moments.size(); ++t)
    {
        s.times.push_back(static_cast<long>(t));
        s.values.push_back(mean_moments[t].sd());
    }
    return s;
}

TimeSeries EnsembleResult::window_series() const
{
    TimeSeries s{"window", {}, {}};
    for (std::size_t t = 0; t < mean_moments.size(); ++t)
    {
        s.times.push_back(static_cast<long>(t));
        s.values.push_back(mean_moments[t].window_mass);
    }
    return s;
}

TimeSeries EnsembleResult::eta_series() const
{
    TimeSeries s{"eta", {}, {}};
    for (std::size_t t = 0; t < mean_eta.size(); ++t)
    {
        s.times.push_back(static_cast<long>(t));
        s.values.push_back(mean_eta[t]);
    }
    return s;
}

TimeSeries every(TimeSeries const& s, long stride)
{
    TimeSeries out{s.label, {}, {}};
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        bool const last = i + 1 == s.size();
        if (s.times[i] % stride == 0 || last)
        {
            out.times.push_back(s.times[i]);
            out.values.push_back(s.values[i]);
        }
    }
    return out;
}

SeedResult run_seed(ScenarioConfig const& config,
                    std::optional<std::uint64_t> seed)
{
    auto const start = Clock::now();
    std::size_t const n = config.effective_lattice_size();
    std::optional<SeededRng> rng;
    if (seed)
        rng.emplace(*seed);
    CoinField const field
        = build_field(config.family, n, rng ? &*rng : nullptr);

    SeedResult result;
    result.seed = seed;
    result.provenance = field.provenance();
    result.moments.reserve(static_cast<std::size_t>(config.horizon) + 1);
    result.eta.reserve(static_cast<std::size_t>(config.horizon) + 1);

    auto snap = config.snapshot_times.begin();
    Observer const observer = [&](long t, WalkState const& state) {
        result.moments.push_back(
            density_moments(state, config.window_half_width));
        result.eta.push_back(correlation_eta(state));
        if (snap != config.snapshot_times.end() && *snap == t)
        {
            result.snapshots.times.push_back(t);
            result.snapshots.densities.push_back(density(state));
            ++snap;
        }
    };
    try
    {
        evolve(make_initial_state(n), field, config.horizon, {&observer, 1});
    }
    catch (BoundaryOverflow const& e)
    {
        std::string const who = seed ? fmt::format("seed {}", *seed)
                                     : std::string("unseeded run");
        throw BoundaryOverflow(e.step(),
                               fmt::format("{} at t = {}: {}", who, e.step(),
                                           e.what()));
    }
    result.seconds = seconds_since(start);
    return result;
}

EnsembleResult run_ensemble(ScenarioConfig const& config,
                            unsigned workers,
                            std::function<void(std::string const&)> const&
                                progress)
{
    auto const seeds = config.run_seeds();
    std::size_t const count = seeds.size();
    if (count == 0)
        throw Error(ErrorCode::config, "seeds: empty seed range");

    std::vector<std::optional<SeedResult>> results(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++)
        {
            try
            {
                results[i] = run_seed(config, seeds[i]);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
            std::size_t const finished = ++done;
            if (progress)
            {
                std::string const who
                    = seeds[i] ? fmt::format("seed {}", *seeds[i])
                               : std::string("run");
                std::string const msg
                    = errors[i]
                          ? fmt::format("[{}] {} failed ({}/{})", config.name,
                                        who, finished, count)
                          : fmt::format("[{}] {} done in {:.2f} s ({}/{})",
                                        config.name, who,
                                        results[i]->seconds, finished, count);
                std::lock_guard lock(progress_mutex);
                progress(msg);
            }
        }
    };

    unsigned const pool
        = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    if (pool == 1)
    {
        work();
    }
    else
    {
        std::vector<std::jthread> threads;
        for (unsigned w = 0; w < pool; ++w)
            threads.emplace_back(work);
    }
    for (auto const& e : errors)
    {
        if (e)
            std::rethrow_exception(e);
    }

    // Merge strictly in seed order so the sums do not depend on scheduling.
    EnsembleResult ens;
    ens.lattice_size = config.effective_lattice_size();
    ens.origin = ens.lattice_size / 2;
    std::size_t const steps = results.front()->moments.size();
    ens.mean_moments.assign(steps, {});
    ens.mean_eta.assign(steps, 0.0);
    std::vector<DensitySnapshots> snaps;
    snaps.reserve(count);
    for (auto& r : results)
    {
        ens.provenance.push_back(r->provenance);
        for (std::size_t t = 0; t < steps; ++t)
        {
            ens.mean_moments[t] += r->moments[t];
            ens.mean_eta[t] += r->eta[t];
        }
        snaps.push_back(std::move(r->snapshots));
        r.reset();
    }
    double const inv = 1.0 / static_cast<double>(count);
    for (std::size_t t = 0; t < steps; ++t)
    {
        auto& m = ens.mean_moments[t];
        m.half_mass *= inv;
        m.half_first *= inv;
        m.mass *= inv;
        m.first *= inv;
        m.second *= inv;
        m.window_mass *= inv;
        ens.mean_eta[t] *= inv;
    }
    if (!config.snapshot_times.empty())
        ens.mean_density = average_ensemble(snaps);
    else
        ens.mean_density.seed_count = count;
    return ens;
}

//---------------------------------------------------------------------------//
// Output
//---------------------------------------------------------------------------//
nlohmann::json RunRecord::to_json() const
{
    auto prov = nlohmann::json::array();
    for (auto const& p : provenance)
        prov.push_back(qwalk::to_json(p));
    std::vector<std::string> files;
    for (auto const& f : outputs)
        files.push_back(f.generic_string());
    return {{"config", config},
            {"provenance", prov},
            {"outputs", files},
            {"wall_seconds", wall_seconds},
            {"software_version", software_version},
            {"rng_algorithm", rng_algorithm},
            {"workers", workers},
            {"hash", hash}};
}

ScenarioConfig apply_options(ScenarioConfig config, RunOptions const& opts)
{
    if (opts.seeds)
    {
        if (opts.seeds->empty())
            throw Error(ErrorCode::config, "seeds: empty seed range");
        config.seeds = *opts.seeds;
    }
    if (opts.output_dir)
        config.output_dir = *opts.output_dir;
    if (opts.paper_compat)
    {
        config.paper_compat_flags.insert(std::string(compat::lattice_6000));
        config.paper_compat_flags.insert(std::string(compat::konno_printed));
    }
    return config;
}

namespace
{
class CsvWriter
{
  public:
    CsvWriter(std::filesystem::path path, std::string const& hash)
        : path_(std::move(path)), out_(path_, std::ios::binary)
    {
        if (!out_)
        {
            throw Error(ErrorCode::io, fmt::format("cannot write '{}'",
                                                   path_.string()));
        }
        out_ << "# run " << hash << '\n';
    }

    void line(std::string const& s) { out_ << s << '\n'; }

    std::filesystem::path const& path() const { return path_; }

    void close()
    {
        out_.close();
        if (!out_)
        {
            throw Error(ErrorCode::io, fmt::format("error writing '{}'",
                                                   path_.string()));
        }
    }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
};

std::string const& fd(double v, std::string& buf)
{
    buf = format_double(v);
    return buf;
}

void write_series(CsvWriter& w, TimeSeries const& s, std::string_view header)
{
    w.line(std::string(header));
    for (std::size_t i = 0; i < s.size(); ++i)
        w.line(fmt::format("{},{}", s.times[i], format_double(s.values[i])));
}

//! Reproducibility inputs: everything except wall-clock and worker count.
std::string record_hash(RunRecord const& rec)
{
    auto prov = nlohmann::json::array();
    for (auto const& p : rec.provenance)
        prov.push_back(to_json(p));
    nlohmann::json config = rec.config;
    config.erase("output_dir");
    nlohmann::json const key{{"config", config},
                             {"provenance", prov},
                             {"software_version", rec.software_version},
                             {"rng_algorithm", rec.rng_algorithm}};
    return sha256_hex(key.dump());
}

void write_summary(std::filesystem::path const& dir,
                   RunRecord const& rec,
                   nlohmann::json const& results)
{
    nlohmann::json j = rec.to_json();
    j["results"] = results;
    std::ofstream out(dir / "summary.json", std::ios::binary);
    if (!out)
        throw Error(ErrorCode::io, "cannot write summary.json");
    out << j.dump(2) << '\n';
}

void run_walk(ScenarioConfig const& config,
              RunOptions const& opts,
              std::filesystem::path const& dir,
              RunRecord& rec)
{
    unsigned workers = opts.workers;
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    rec.workers = workers;
    EnsembleResult const ens = run_ensemble(config, workers, opts.progress);
    rec.provenance = ens.provenance;
    rec.hash = record_hash(rec);

    nlohmann::json results;
    results["seed_count"] = ens.provenance.size();
    results["origin"] = ens.origin;
    std::string buf;
    auto open = [&](std::string_view name) {
        auto path = dir / fmt::format("{}.csv", name);
        rec.outputs.push_back(path);
        return CsvWriter(path, rec.hash);
    };
    long const stride = config.series_stride;
    TimeSeries const cog = ens.cog_series();

    if (config.has(Observable::density))
    {
        auto w = open("density");
        w.line("t,n,value");
        auto const& md = ens.mean_density;
        for (std::size_t k = 0; k < md.times.size(); ++k)
        {
            auto const& d = md.mean_density[k];
            for (std::size_t i = 0; i < d.size(); ++i)
            {
                long const pos = static_cast<long>(i)
                                 - static_cast<long>(ens.origin);
                w.line(fmt::format("{},{},{}", md.times[k], pos, fd(d[i], buf)));
            }
        }
        w.close();
    }
    if (config.has(Observable::cog))
    {
        auto w = open("cog");
        write_series(w, every(cog, stride), "t,cog");
        w.close();
        results["cog_final"] = cog.values.back();
    }
    if (config.has(Observable::alpha))
    {
        TimeSeries sampled = every(cog, stride);
        TimeSeries positive{"cog", {}, {}};
        for (std::size_t i = 0; i < sampled.size(); ++i)
        {
            if (sampled.times[i] > 0 && sampled.values[i] > 0)
            {
                positive.times.push_back(sampled.times[i]);
                positive.values.push_back(sampled.values[i]);
            }
        }
        auto w = open("alpha");
        w.line("t,alpha,model");
        if (positive.size() >= 3)
        {
            TimeSeries const alpha
                = cog_exponent_series(positive, config.alpha_half_window);
            TimeSeries const fit_range = alpha.slice(
                config.alpha_fit_lo,
                config.alpha_fit_hi.value_or(config.horizon));
            std::optional<AlphaFit> fit;
            if (fit_range.size() > 0)
                fit = fit_alpha_model(fit_range);
            for (std::size_t i = 0; i < alpha.size(); ++i)
            {
                double const model
                    = fit ? (*fit)(static_cast<double>(alpha.times[i]))
                          : std::numeric_limits<double>::quiet_NaN();
                w.line(fmt::format("{},{},{}", alpha.times[i],
                                   format_double(alpha.values[i]),
                                   format_double(model)));
            }
            if (fit)
            {
                results["alpha_fit"]
                    = {{"kappa", fit->kappa},
                       {"residual", fit->residual},
                       {"constant_alpha", fit->constant_alpha},
                       {"constant_residual", fit->constant_residual},
                       {"degenerate", fit->degenerate}};
            }
        }
        w.close();
    }
    if (config.has(Observable::sd))
    {
        auto w = open("sd");
        write_series(w, every(ens.sd_series(), stride), "t,sd");
        w.close();
    }
    if (config.has(Observable::window))
    {
        TimeSeries const raw = ens.window_series();
        TimeSeries const smooth = moving_average(raw, config.smoothing_width);
        auto w = open("window");
        w.line("t,window,smoothed");
        for (std::size_t i = 0; i < raw.size(); ++i)
        {
            if (raw.times[i] % stride != 0 && i + 1 != raw.size())
                continue;
            // The centered average is undefined within half a width of the
            // series ends.
            auto it = std::lower_bound(smooth.times.begin(),
                                       smooth.times.end(), raw.times[i]);
            double const s
                = (it != smooth.times.end() && *it == raw.times[i])
                      ? smooth.values[static_cast<std::size_t>(
                          it - smooth.times.begin())]
                      : std::numeric_limits<double>::quiet_NaN();
            w.line(fmt::format("{},{},{}", raw.times[i],
                               format_double(raw.values[i]),
                               format_double(s)));
        }
        w.close();
    }
    if (config.has(Observable::eta))
    {
        auto w = open("eta");
        TimeSeries const eta = ens.eta_series();
        write_series(w, every(eta, stride), "t,eta");
        w.close();
        results["eta_final"] = eta.values.back();
    }
    if (config.has(Observable::laplace))
    {
        auto w = open("laplace");
        w.line("t,amplitude,center,scale,r_squared,lo,hi");
        auto const& md = ens.mean_density;
        for (std::size_t k = 0; k < md.times.size(); ++k)
        {
            long const t = md.times[k];
            if (t == 0)
                continue;
            auto const& d = md.mean_density[k];
            try
            {
                SiteWindow const win = default_laplace_window(
                    d, ens.origin, t, config.laplace_floor,
                    config.laplace_front_margin);
                LaplaceFit const f = fit_laplace(d, ens.origin, win);
                w.line(fmt::format("{},{},{},{},{},{},{}", t,
                                   format_double(f.amplitude),
                                   format_double(f.center),
                                   format_double(f.scale),
                                   format_double(f.r_squared), win.lo,
                                   win.hi));
            }
            catch (Error const& e)
            {
                results["laplace_errors"].push_back(
                    fmt::format("t = {}: {}", t, e.what()));
            }
        }
        w.close();
    }
    write_summary(dir, rec, results);
}

void run_optics(ScenarioConfig const& config,
                std::filesystem::path const& dir,
                RunRecord& rec)
{
    rec.workers = 1;
    rec.hash = record_hash(rec);
    auto const& segs = config.segments;
    nlohmann::json j;
    j["run"] = rec.hash;
    optics::SMatrix const comp = optics::composite_s(segs);
    j["composite"] = to_json(comp);
    j["composite_flux"] = to_json(
        optics::flux_normalized(comp, segs.front().k, segs.back().k));
    try
    {
        j["path_sum"] = to_json(optics::path_sum_s(segs, config.max_bounces));
    }
    catch (Error const& e)
    {
        j["path_sum_error"] = e.what();
    }
    if (segs.size() == 3)
    {
        j["closed_form"] = to_json(optics::two_interface_closed_form(segs));
        j["printed_form"] = to_json(optics::two_interface_printed_form(segs));
    }
    auto ifaces = nlohmann::json::array();
    auto const s_list = optics::interface_s_matrices(segs);
    for (std::size_t i = 0; i < s_list.size(); ++i)
    {
        auto const flux = optics::flux_normalized(s_list[i], segs[i].k,
                                                  segs[i + 1].k);
        ifaces.push_back({{"amplitude", to_json(s_list[i])},
                          {"flux", to_json(flux)},
                          {"flux_unitarity_residual",
                           unitarity_residual(flux.entries)}});
    }
    j["interfaces"] = ifaces;
    auto path = dir / "s_matrix.json";
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::io, "cannot write s_matrix.json");
    out << j.dump(2) << '\n';
    rec.outputs.push_back(path);
    write_summary(dir, rec, nlohmann::json::object());
}

void run_km(ScenarioConfig const& config,
            std::filesystem::path const& dir,
            RunRecord& rec)
{
    rec.workers = 1;
    rec.hash = record_hash(rec);
    nlohmann::json results;
    if (!config.ratios.empty())
    {
        auto path = dir / "reflectance.csv";
        CsvWriter w(path, rec.hash);
        w.line("wavelength,k_over_s,r_infinity");
        for (auto const& r : config.ratios)
        {
            w.line(fmt::format("{},{},{}", format_double(r.wavelength),
                               format_double(r.k_over_s),
                               format_double(km::km_r_infinity(r.k_over_s))));
        }
        w.close();
        rec.outputs.push_back(path);
    }
    if (!config.layers.empty())
    {
        auto path = dir / "stack.csv";
        CsvWriter w(path, rec.hash);
        w.line("layers,reflectance");
        for (std::size_t n = 1; n <= config.layers.size(); ++n)
        {
            std::span<km::Layer const> top(config.layers.data(), n);
            w.line(fmt::format("{},{}", n,
                               format_double(km::km_stack_reflectance(
                                   top, config.backing))));
        }
        w.close();
        rec.outputs.push_back(path);
        results["stack_reflectance"]
            = km::km_stack_reflectance(config.layers, config.backing);
    }
    write_summary(dir, rec, results);
}
}  // namespace

RunRecord run_scenario(ScenarioConfig const& input, RunOptions const& opts)
{
    auto const start = Clock::now();
    ScenarioConfig const config = apply_options(input, opts);
    std::filesystem::path const dir = config.output_dir / config.name;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
    {
        throw Error(ErrorCode::io, fmt::format("cannot create '{}': {}",
                                               dir.string(), ec.message()));
    }

    RunRecord rec;
    rec.config = config.to_json();
    rec.software_version = std::string(software_version());
    rec.rng_algorithm = std::string(SeededRng::algorithm_id);
    switch (config.kind)
    {
        case ScenarioKind::walk:
            run_walk(config, opts, dir, rec);
            break;
        case ScenarioKind::optics:
            run_optics(config, dir, rec);
            break;
        case ScenarioKind::km:
            run_km(config, dir, rec);
            break;
    }
    rec.wall_seconds = seconds_since(start);
    // Rewrite the summary with the final wall-clock.
    nlohmann::json results;
    {
        std::ifstream in(dir / "summary.json");
        results = nlohmann::json::parse(in).value("results",
                                                  nlohmann::json::object());
    }
    write_summary(dir, rec, results);
    return rec;
}

}  // namespace qwalk
