#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "analysis.hpp"
#include "error.hpp"
#include "coin.hpp"
#include "kubelka_munk.hpp"
#include "optics.hpp"

namespace qwalk
{
//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//
enum class ScenarioKind
{
    walk,
    optics,
    km,
};

enum class Observable
{
    density,
    cog,
    alpha,
    sd,
    laplace,
    window,
    eta,
};

std::string_view to_string(ScenarioKind kind);
std::string_view to_string(Observable obs);

//! Compatibility switches that reproduce legacy reference choices.
namespace compat
{
//! Use N = 6000 (center at index 3000) instead of 2T + 1.
inline constexpr std::string_view lattice_6000 = "lattice-6000";
//! Use the unnormalized legacy limit density in oracle output.
inline constexpr std::string_view konno_printed = "konno-printed";
}  // namespace compat

struct SeedRange
{
    std::uint64_t first{1};
    std::uint64_t last{0};

    bool empty() const { return last < first; }
    std::size_t size() const { return empty() ? 0 : last - first + 1; }
};

//! Parse "A..B" or a single integer.
SeedRange parse_seed_range(std::string_view text);

struct KsRatio
{
    double wavelength{0};
    double k_over_s{0};
};

struct ScenarioConfig
{
    std::string name;
    ScenarioKind kind{ScenarioKind::walk};

    // walk
    CoinFamily family;
    std::optional<std::size_t> lattice_size;  //!< default 2T + 1
    long horizon{0};
    SeedRange seeds{1, 1};
    std::vector<long> snapshot_times;
    long series_stride{25};
    std::set<Observable> observables;
    int alpha_half_window{5};
    long alpha_fit_lo{200};
    std::optional<long> alpha_fit_hi;  //!< default horizon
    long window_half_width{50};
    std::size_t smoothing_width{25};
    double laplace_floor{1e-6};
    long laplace_front_margin{10};

    // optics
    std::vector<optics::Segment> segments;
    int max_bounces{60};

    // km
    std::vector<km::Layer> layers;
    double backing{0};
    std::vector<KsRatio> ratios;

    std::filesystem::path output_dir{"results"};
    std::set<std::string> paper_compat_flags;

    bool has(Observable o) const { return observables.count(o) != 0; }
    bool compat(std::string_view flag) const
    {
        return paper_compat_flags.count(std::string(flag)) != 0;
    }

    //! Lattice size after defaults and compatibility flags.
    std::size_t effective_lattice_size() const;

    //! Seeds actually run (a single unseeded run unless random-b).
    std::vector<std::optional<std::uint64_t>> run_seeds() const;

    nlohmann::json to_json() const;
};

//! One configuration problem, with a source location when known (1-based).
struct Diagnostic
{
    std::string field;
    std::string message;
    int line{0};
    int column{0};

    std::string format(std::string_view source) const;
};

class ConfigError : public Error
{
  public:
    ConfigError(std::string source, std::vector<Diagnostic> diagnostics);

    std::vector<Diagnostic> const& diagnostics() const { return diags_; }

  private:
    std::vector<Diagnostic> diags_;
};

//! Parse and validate scenario text; throws ConfigError.
ScenarioConfig
parse_config(std::string_view text, std::string_view source = "<config>");

ScenarioConfig load_config(std::filesystem::path const& path);

//! Problems in a config file; empty when it is valid.
std::vector<Diagnostic> validate_config(std::filesystem::path const& path);
std::vector<Diagnostic>
validate_config_text(std::string_view text, std::string_view source);

//! Segment list from a stack file (`segments:` entries with k and a).
std::vector<optics::Segment> load_stack(std::filesystem::path const& path);

//! Layers, backing and ratios from a layers file (`layers:` with s, k, d).
ScenarioConfig load_layers(std::filesystem::path const& path);

//---------------------------------------------------------------------------//
// Bundled scenarios
//---------------------------------------------------------------------------//
struct BundledScenario
{
    std::string_view name;
    std::string_view text;
};

std::span<BundledScenario const> bundled_scenarios();
std::vector<std::string> list_scenarios();

//! Bundled scenario by name, or nullopt.
std::optional<ScenarioConfig> find_scenario(std::string_view name);

//---------------------------------------------------------------------------//
// Execution
//---------------------------------------------------------------------------//
//! Everything one seed contributes to an ensemble.
struct SeedResult
{
    std::optional<std::uint64_t> seed;
    FieldProvenance provenance;
    std::vector<DensityMoments> moments;  //!< t = 0 .. T
    std::vector<double> eta;  //!< t = 0 .. T
    DensitySnapshots snapshots;
    double seconds{0};
};

struct EnsembleResult
{
    std::size_t lattice_size{0};
    std::size_t origin{0};
    std::vector<FieldProvenance> provenance;
    std::vector<DensityMoments> mean_moments;  //!< per step, t = 0 .. T
    std::vector<double> mean_eta;  //!< per step
    EnsembleDensity mean_density;

    //! Per-step series of the ensemble-mean density.
    TimeSeries cog_series() const;
    TimeSeries sd_series() const;
    TimeSeries window_series() const;
    TimeSeries eta_series() const;
};

//! Subsample every `stride` steps (t = 0, stride, ..., plus the last t).
TimeSeries every(TimeSeries const& s, long stride);

struct RunOptions
{
    std::optional<SeedRange> seeds;
    unsigned workers{0};  //!< 0 = available parallelism
    std::optional<std::filesystem::path> output_dir;
    bool paper_compat{false};
    std::function<void(std::string const&)> progress;
};

//! Evolve one seed and collect its observables.
SeedResult run_seed(ScenarioConfig const& config,
                    std::optional<std::uint64_t> seed);

/*!
 * Run all seeds on a worker pool and merge in seed order, so the result
 * does not depend on the worker count.
 */
EnsembleResult run_ensemble(ScenarioConfig const& config,
                            unsigned workers = 1,
                            std::function<void(std::string const&)> const&
                                progress
                            = {});

struct RunRecord
{
    nlohmann::json config;
    std::vector<FieldProvenance> provenance;
    std::vector<std::filesystem::path> outputs;
    double wall_seconds{0};
    std::string software_version;
    std::string rng_algorithm;
    unsigned workers{1};
    std::string hash;  //!< hex SHA-256 of the reproducibility inputs

    nlohmann::json to_json() const;
};

//! Apply command-line overrides to a config.
ScenarioConfig apply_options(ScenarioConfig config, RunOptions const& opts);

//! Run a scenario and write its CSV / JSON outputs.
RunRecord run_scenario(ScenarioConfig const& config, RunOptions const& opts);

nlohmann::json to_json(FieldProvenance const& p);
nlohmann::json to_json(optics::SMatrix const& s);

//! Hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

//! Shortest-roundtrip-safe formatting with 17 significant digits.
std::string format_double(double v);

std::string_view software_version();

}  // namespace qwalk
