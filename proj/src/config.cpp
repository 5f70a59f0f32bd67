#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "qwalk/error.hpp"
#include "qwalk/scenario.hpp"

namespace qwalk
{
namespace
{
//! Collects diagnostics while reading a YAML document.
class Reader
{
  public:
    std::vector<Diagnostic> diags;

    void report(YAML::Node const& node,
                std::string field,
                std::string message)
    {
        Diagnostic d{std::move(field), std::move(message), 0, 0};
        if (node.IsDefined() && node.Mark().line >= 0)
        {
            d.line = node.Mark().line + 1;
            d.column = node.Mark().column + 1;
        }
        diags.push_back(std::move(d));
    }

    template<class T>
    std::optional<T>
    get(YAML::Node const& parent, char const* key, std::string const& field)
    {
        if (!parent.IsDefined() || !parent.IsMap())
            return std::nullopt;
        YAML::Node node = parent[key];
        if (!node.IsDefined() || node.IsNull())
            return std::nullopt;
        try
        {
            return node.as<T>();
        }
        catch (YAML::Exception const&)
        {
            report(node, field, fmt::format("cannot read '{}'", node.Scalar()));
            return std::nullopt;
        }
    }

    //! Flag keys that are not in `allowed`.
    void check_keys(YAML::Node const& node,
                    std::string const& prefix,
                    std::initializer_list<char const*> allowed)
    {
        if (!node.IsDefined() || !node.IsMap())
            return;
        for (auto const& kv : node)
        {
            auto key = kv.first.as<std::string>();
            bool ok = std::any_of(allowed.begin(),
                                  allowed.end(),
                                  [&](char const* a) { return key == a; });
            if (!ok)
            {
                report(kv.first,
                       prefix + key,
                       fmt::format("unknown key '{}'", key));
            }
        }
    }
};

//! Child node, or the (undefined) parent itself when it is not a map.
YAML::Node at(YAML::Node const& node, char const* key)
{
    if (node.IsDefined() && node.IsMap())
        return node[key];
    return node;
}

std::optional<Observable> parse_observable(std::string_view s)
{
    for (auto o : {Observable::density,
                   Observable::cog,
                   Observable::alpha,
                   Observable::sd,
                   Observable::laplace,
                   Observable::window,
                   Observable::eta})
    {
        if (s == to_string(o))
            return o;
    }
    return std::nullopt;
}

std::vector<optics::Segment> read_segments(Reader& rd, YAML::Node const& list)
{
    std::vector<optics::Segment> out;
    if (!list.IsDefined())
        return out;
    if (!list.IsSequence())
    {
        rd.report(list, "segments", "expected a list of {k, a} entries");
        return out;
    }
    for (std::size_t i = 0; i < list.size(); ++i)
    {
        auto const& node = list[i];
        std::string const f = fmt::format("segments[{}]", i);
        rd.check_keys(node, f + ".", {"k", "a"});
        auto k = rd.get<double>(node, "k", f + ".k");
        auto a = rd.get<double>(node, "a", f + ".a");
        if (!k || !(*k > 0))
            rd.report(node, f + ".k", "wavevector k must be given and > 0");
        if (!a || !(*a >= 0))
            rd.report(node, f + ".a", "width a must be given and >= 0");
        out.push_back({k.value_or(1), a.value_or(0)});
    }
    return out;
}

void read_km(Reader& rd, YAML::Node const& node, ScenarioConfig& cfg)
{
    rd.check_keys(node, "", {"layers", "backing", "ratios", "name", "kind",
                             "output_dir", "km"});
    YAML::Node const& layers = node["layers"];
    if (layers.IsDefined())
    {
        if (!layers.IsSequence())
            rd.report(layers, "layers", "expected a list of {s, k, d}");
        else
            for (std::size_t i = 0; i < layers.size(); ++i)
            {
                std::string const f = fmt::format("layers[{}]", i);
                rd.check_keys(layers[i], f + ".", {"s", "k", "d"});
                km::Layer l{rd.get<double>(layers[i], "s", f + ".s").value_or(-1),
                            rd.get<double>(layers[i], "k", f + ".k").value_or(-1),
                            rd.get<double>(layers[i], "d", f + ".d").value_or(-1)};
                try
                {
                    l.validate();
                }
                catch (Error const& e)
                {
                    rd.report(layers[i], f, e.what());
                }
                cfg.layers.push_back(l);
            }
    }
    cfg.backing = rd.get<double>(node, "backing", "backing").value_or(0);
    if (!(cfg.backing >= 0) || cfg.backing > 1)
        rd.report(at(node, "backing"), "backing", "backing must lie in [0, 1]");
    YAML::Node const& ratios = node["ratios"];
    if (ratios.IsDefined())
    {
        if (!ratios.IsSequence())
            rd.report(ratios, "ratios", "expected a list of "
                                        "{wavelength, k_over_s}");
        else
            for (std::size_t i = 0; i < ratios.size(); ++i)
            {
                std::string const f = fmt::format("ratios[{}]", i);
                rd.check_keys(ratios[i], f + ".", {"wavelength", "k_over_s"});
                KsRatio r{
                    rd.get<double>(ratios[i], "wavelength", f + ".wavelength")
                        .value_or(0),
                    rd.get<double>(ratios[i], "k_over_s", f + ".k_over_s")
                        .value_or(-1)};
                if (!(r.k_over_s >= 0))
                    rd.report(ratios[i], f + ".k_over_s",
                              "k_over_s must be given and >= 0");
                cfg.ratios.push_back(r);
            }
    }
    if (cfg.layers.empty() && cfg.ratios.empty())
        rd.report(node, "layers", "give at least one layer or ratio");
}

void read_walk(Reader& rd, YAML::Node const& root, ScenarioConfig& cfg)
{
    YAML::Node const lattice = root["lattice"];
    rd.check_keys(lattice, "lattice.", {"size"});
    if (lattice.IsDefined())
        cfg.lattice_size = rd.get<std::size_t>(lattice, "size", "lattice.size");

    YAML::Node const coin = root["coin"];
    if (!coin.IsDefined())
    {
        rd.report(root, "coin", "missing 'coin' section");
    }
    else
    {
        rd.check_keys(coin, "coin.", {"family", "gamma", "impurities",
                                      "sampling"});
        auto fam = rd.get<std::string>(coin, "family", "coin.family");
        try
        {
            cfg.family.tag = parse_family(fam.value_or(""));
        }
        catch (Error const& e)
        {
            rd.report(coin["family"].IsDefined() ? coin["family"] : coin,
                      "coin.family",
                      e.what());
        }
        cfg.family.gamma = rd.get<double>(coin, "gamma", "coin.gamma")
                               .value_or(0);
        cfg.family.impurity_count
            = rd.get<std::size_t>(coin, "impurities", "coin.impurities")
                  .value_or(0);
        if (auto s = rd.get<std::string>(coin, "sampling", "coin.sampling"))
        {
            try
            {
                cfg.family.sampling = parse_sampling(*s);
            }
            catch (Error const& e)
            {
                rd.report(coin["sampling"], "coin.sampling", e.what());
            }
        }
    }

    YAML::Node const ens = root["ensemble"];
    rd.check_keys(ens, "ensemble.", {"seeds"});
    bool seeds_given = false;
    if (ens.IsDefined() && ens["seeds"].IsDefined())
    {
        YAML::Node const s = ens["seeds"];
        try
        {
            if (s.IsSequence() && s.size() == 0)
                cfg.seeds = {1, 0};
            else if (s.IsScalar())
                cfg.seeds = parse_seed_range(s.Scalar());
            else
                throw Error(ErrorCode::config, "expected 'A..B'");
            seeds_given = true;
        }
        catch (Error const& e)
        {
            rd.report(s, "seeds", e.what());
        }
    }

    YAML::Node const time = root["time"];
    rd.check_keys(time, "time.", {"horizon", "snapshots", "series_stride"});
    cfg.horizon = rd.get<long>(time, "horizon", "time.horizon").value_or(0);
    if (time.IsDefined() && at(time, "snapshots").IsDefined())
    {
        if (auto v = rd.get<std::vector<long>>(time, "snapshots",
                                               "snapshot_times"))
            cfg.snapshot_times = *v;
    }
    cfg.series_stride = rd.get<long>(time, "series_stride",
                                     "time.series_stride")
                            .value_or(25);

    YAML::Node const obs = root["observables"];
    if (obs.IsDefined())
    {
        if (!obs.IsSequence())
        {
            rd.report(obs, "observables", "expected a list");
        }
        else
        {
            for (auto const& o : obs)
            {
                auto name = o.as<std::string>();
                if (auto parsed = parse_observable(name))
                    cfg.observables.insert(*parsed);
                else
                    rd.report(o,
                              "observables",
                              fmt::format("unknown observable '{}'", name));
            }
        }
    }
    else
    {
        cfg.observables = {Observable::density, Observable::cog,
                           Observable::alpha,   Observable::sd,
                           Observable::window,  Observable::eta};
    }

    YAML::Node const an = root["analysis"];
    rd.check_keys(an, "analysis.", {"alpha_half_window", "alpha_fit",
                                    "window_half_width", "smoothing",
                                    "laplace_floor", "laplace_front_margin"});
    if (an.IsDefined())
    {
        cfg.alpha_half_window
            = rd.get<int>(an, "alpha_half_window", "analysis.alpha_half_window")
                  .value_or(cfg.alpha_half_window);
        if (auto fit = rd.get<std::vector<long>>(an, "alpha_fit",
                                                 "analysis.alpha_fit"))
        {
            if (fit->size() != 2)
                rd.report(an["alpha_fit"], "analysis.alpha_fit",
                          "expected [t_lo, t_hi]");
            else
            {
                cfg.alpha_fit_lo = (*fit)[0];
                cfg.alpha_fit_hi = (*fit)[1];
            }
        }
        cfg.window_half_width
            = rd.get<long>(an, "window_half_width",
                           "analysis.window_half_width")
                  .value_or(cfg.window_half_width);
        cfg.smoothing_width
            = rd.get<std::size_t>(an, "smoothing", "analysis.smoothing")
                  .value_or(cfg.smoothing_width);
        cfg.laplace_floor = rd.get<double>(an, "laplace_floor",
                                           "analysis.laplace_floor")
                                .value_or(cfg.laplace_floor);
        cfg.laplace_front_margin
            = rd.get<long>(an, "laplace_front_margin",
                           "analysis.laplace_front_margin")
                  .value_or(cfg.laplace_front_margin);
    }

    // Semantic checks
    if (cfg.horizon < 1)
        rd.report(time.IsDefined() ? time : root, "time.horizon",
                  "horizon T must be >= 1");
    try
    {
        cfg.family.validate(cfg.effective_lattice_size());
    }
    catch (Error const& e)
    {
        rd.report(coin, "coin", e.what());
    }
    if (cfg.family.tag == CoinFamilyTag::random_b
        && (!seeds_given || cfg.seeds.empty()))
    {
        rd.report(ens.IsDefined() ? ens : root, "seeds",
                  "random-b needs a non-empty seed range");
    }
    for (long t : cfg.snapshot_times)
    {
        if (t < 0 || t > cfg.horizon)
        {
            rd.report(at(time, "snapshots"), "snapshot_times",
                      fmt::format("snapshot {} outside [0, {}]", t,
                                  cfg.horizon));
        }
    }
    std::sort(cfg.snapshot_times.begin(), cfg.snapshot_times.end());
    cfg.snapshot_times.erase(std::unique(cfg.snapshot_times.begin(),
                                         cfg.snapshot_times.end()),
                             cfg.snapshot_times.end());
    if (cfg.series_stride < 1)
        rd.report(at(time, "series_stride"), "time.series_stride",
                  "stride must be >= 1");
    if (cfg.alpha_half_window < 1)
        rd.report(an, "analysis.alpha_half_window", "must be >= 1");
    if (cfg.smoothing_width % 2 == 0)
        rd.report(an, "analysis.smoothing", "smoothing width must be odd");
    std::size_t const n = cfg.effective_lattice_size();
    if (cfg.lattice_size && *cfg.lattice_size < min_lattice_size)
        rd.report(lattice, "lattice.size", "lattice needs at least 3 sites");
    if (cfg.window_half_width < 0
        || static_cast<std::size_t>(cfg.window_half_width) > n / 2 - 1)
        rd.report(an, "analysis.window_half_width",
                  "window exceeds the lattice");
}
}  // namespace

//---------------------------------------------------------------------------//
std::string Diagnostic::format(std::string_view source) const
{
    if (line > 0)
        return fmt::format("{}:{}:{}: {}: {}", source, line, column, field,
                           message);
    return fmt::format("{}: {}: {}", source, field, message);
}

ConfigError::ConfigError(std::string source, std::vector<Diagnostic> diags)
    : Error(ErrorCode::config,
            [&] {
                std::string msg;
                for (auto const& d : diags)
                {
                    if (!msg.empty())
                        msg += '\n';
                    msg += d.format(source);
                }
                return msg;
            }())
    , diags_(std::move(diags))
{
}

SeedRange parse_seed_range(std::string_view text)
{
    auto parse_u64 = [&](std::string_view s) {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        {
            throw Error(ErrorCode::config,
                        fmt::format("bad seed value '{}' in '{}'", s, text));
        }
        return v;
    };
    if (text.empty())
        return {1, 0};
    auto dots = text.find("..");
    if (dots == std::string_view::npos)
    {
        auto v = parse_u64(text);
        return {v, v};
    }
    SeedRange r{parse_u64(text.substr(0, dots)),
                parse_u64(text.substr(dots + 2))};
    if (r.empty())
    {
        throw Error(ErrorCode::config,
                    fmt::format("seed range '{}' is empty", text));
    }
    return r;
}

ScenarioConfig parse_config(std::string_view text, std::string_view source)
{
    Reader rd;
    YAML::Node root;
    try
    {
        root = YAML::Load(std::string(text));
    }
    catch (YAML::ParserException const& e)
    {
        throw ConfigError(std::string(source),
                          {{"syntax", e.msg, e.mark.line + 1,
                            e.mark.column + 1}});
    }
    if (!root.IsMap())
    {
        throw ConfigError(std::string(source),
                          {{"document", "expected a mapping at top level", 1,
                            1}});
    }

    ScenarioConfig cfg;
    cfg.name = rd.get<std::string>(root, "name", "name").value_or("");
    if (cfg.name.empty())
        rd.report(root, "name", "scenario needs a name");
    auto kind = rd.get<std::string>(root, "kind", "kind").value_or("walk");
    if (kind == "walk")
        cfg.kind = ScenarioKind::walk;
    else if (kind == "optics")
        cfg.kind = ScenarioKind::optics;
    else if (kind == "km")
        cfg.kind = ScenarioKind::km;
    else
        rd.report(root["kind"], "kind",
                  fmt::format("unknown kind '{}' (walk, optics, km)", kind));

    if (auto out = rd.get<std::string>(root, "output_dir", "output_dir"))
        cfg.output_dir = *out;
    if (auto flags = rd.get<std::vector<std::string>>(root, "paper_compat",
                                                      "paper_compat"))
    {
        for (auto const& f : *flags)
        {
            if (f != compat::lattice_6000 && f != compat::konno_printed)
                rd.report(root["paper_compat"], "paper_compat",
                          fmt::format("unknown flag '{}'", f));
            cfg.paper_compat_flags.insert(f);
        }
    }

    switch (cfg.kind)
    {
        case ScenarioKind::walk:
            rd.check_keys(root, "", {"name", "kind", "lattice", "coin",
                                     "ensemble", "time", "observables",
                                     "analysis", "output_dir",
                                     "paper_compat"});
            read_walk(rd, root, cfg);
            break;
        case ScenarioKind::optics: {
            rd.check_keys(root, "", {"name", "kind", "optics", "output_dir",
                                     "paper_compat"});
            YAML::Node const o = root["optics"];
            rd.check_keys(o, "optics.", {"segments", "max_bounces"});
            if (!o.IsDefined())
                rd.report(root, "optics", "missing 'optics' section");
            else
            {
                cfg.segments = read_segments(rd, o["segments"]);
                cfg.max_bounces = rd.get<int>(o, "max_bounces",
                                              "optics.max_bounces")
                                      .value_or(60);
            }
            if (cfg.segments.size() < 2)
                rd.report(o, "optics.segments",
                          "a stack needs at least two segments");
            break;
        }
        case ScenarioKind::km: {
            rd.check_keys(root, "", {"name", "kind", "km", "output_dir",
                                     "paper_compat"});
            YAML::Node const k = root["km"];
            if (!k.IsDefined())
                rd.report(root, "km", "missing 'km' section");
            else
                read_km(rd, k, cfg);
            break;
        }
    }

    if (!rd.diags.empty())
        throw ConfigError(std::string(source), std::move(rd.diags));
    return cfg;
}

namespace
{
std::string read_file(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorCode::io,
                    fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

ScenarioConfig load_config(std::filesystem::path const& path)
{
    return parse_config(read_file(path), path.string());
}

std::vector<Diagnostic>
validate_config_text(std::string_view text, std::string_view source)
{
    try
    {
        parse_config(text, source);
    }
    catch (ConfigError const& e)
    {
        return e.diagnostics();
    }
    return {};
}

std::vector<Diagnostic> validate_config(std::filesystem::path const& path)
{
    return validate_config_text(read_file(path), path.string());
}

std::vector<optics::Segment> load_stack(std::filesystem::path const& path)
{
    std::string const text = read_file(path);
    Reader rd;
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (YAML::ParserException const& e)
    {
        throw ConfigError(path.string(),
                          {{"syntax", e.msg, e.mark.line + 1,
                            e.mark.column + 1}});
    }
    // Accept either a bare stack file or an optics scenario.
    YAML::Node const holder = root["optics"].IsDefined() ? root["optics"]
                                                         : root;
    auto segs = read_segments(rd, at(holder, "segments"));
    if (segs.size() < 2)
        rd.report(holder, "segments", "a stack needs at least two segments");
    if (!rd.diags.empty())
        throw ConfigError(path.string(), std::move(rd.diags));
    return segs;
}

ScenarioConfig load_layers(std::filesystem::path const& path)
{
    std::string const text = read_file(path);
    Reader rd;
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (YAML::ParserException const& e)
    {
        throw ConfigError(path.string(),
                          {{"syntax", e.msg, e.mark.line + 1,
                            e.mark.column + 1}});
    }
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::km;
    cfg.name = path.stem().string();
    read_km(rd, root["km"].IsDefined() ? root["km"] : root, cfg);
    if (!rd.diags.empty())
        throw ConfigError(path.string(), std::move(rd.diags));
    return cfg;
}

}  // namespace qwalk

namespace qwalk
{
std::vector<std::string> list_scenarios()
{
    std::vector<std::string> names;
    for (auto const& s : bundled_scenarios())
        names.emplace_back(s.name);
    return names;
}

std::optional<ScenarioConfig> find_scenario(std::string_view name)
{
    if (name == "hadamard")
        name = "hadamard-t3000";
    for (auto const& s : bundled_scenarios())
    {
        if (s.name == name)
            return parse_config(s.text, fmt::format("<bundled {}>", s.name));
    }
    return std::nullopt;
}
}  // namespace qwalk
