#include "qwalk/coin.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <fmt/format.h>

#include "qwalk/error.hpp"

namespace qwalk
{
std::string_view to_string(CoinFamilyTag tag)
{
    switch (tag)
    {
        case CoinFamilyTag::hadamard: return "hadamard";
        case CoinFamilyTag::a_impurity: return "a-impurity";
        case CoinFamilyTag::b_impurity: return "b-impurity";
        case CoinFamilyTag::random_b: return "random-b";
    }
    return "unknown";
}

std::string_view to_string(SamplingMode mode)
{
    return mode == SamplingMode::relocate ? "relocate" : "distinct";
}

CoinFamilyTag parse_family(std::string_view name)
{
    for (auto tag : {CoinFamilyTag::hadamard,
                     CoinFamilyTag::a_impurity,
                     CoinFamilyTag::b_impurity,
                     CoinFamilyTag::random_b})
    {
        if (name == to_string(tag))
        {
            return tag;
        }
    }
    throw Error(ErrorCode::config,
                fmt::format("unknown coin family '{}' (expected hadamard, "
                            "a-impurity, b-impurity or random-b)",
                            name));
}

SamplingMode parse_sampling(std::string_view name)
{
    if (name == "relocate")
        return SamplingMode::relocate;
    if (name == "distinct")
        return SamplingMode::distinct;
    throw Error(ErrorCode::config,
                fmt::format("unknown sampling mode '{}'", name));
}

//---------------------------------------------------------------------------//
double CoinFamily::density(std::size_t lattice_size) const
{
    return static_cast<double>(impurity_count)
           / static_cast<double>(lattice_size);
}

void CoinFamily::validate(std::size_t lattice_size) const
{
    if (!std::isfinite(gamma) || gamma <= -std::numbers::pi
        || gamma > std::numbers::pi)
    {
        throw Error(ErrorCode::domain,
                    fmt::format("gamma = {} is outside (-pi, pi]", gamma));
    }
    if (tag == CoinFamilyTag::random_b)
    {
        if (impurity_count == 0)
        {
            throw Error(ErrorCode::domain,
                        "random-b needs at least one impurity");
        }
        if (impurity_count >= lattice_size)
        {
            throw Error(ErrorCode::over_occupation,
                        fmt::format("{} impurities cannot fit on {} sites",
                                    impurity_count,
                                    lattice_size));
        }
    }
}

//---------------------------------------------------------------------------//
Coin hadamard_coin()
{
    double const h = 1.0 / std::numbers::sqrt2;
    return {{h, h, h, -h}};
}

Coin a_impurity_coin(double gamma)
{
    double const h = 1.0 / std::numbers::sqrt2;
    Complex const delta = std::polar(1.0, gamma);
    return {{h * delta, h, h, -h * std::conj(delta)}};
}

Coin b_impurity_coin(double gamma)
{
    double const h = 1.0 / std::numbers::sqrt2;
    Complex const delta = std::polar(1.0, gamma);
    return {{h, h * delta, h * std::conj(delta), -h}};
}

//---------------------------------------------------------------------------//
std::size_t relocate_collision(std::span<bool const> occupied, std::size_t site)
{
    std::size_t const n = occupied.size();
    if (site >= n)
    {
        throw Error(ErrorCode::range,
                    fmt::format("site {} outside lattice of {}", site, n));
    }
    if (!occupied[site])
    {
        return site;
    }
    for (std::size_t d = 1; d < n; ++d)
    {
        if (site + d < n && !occupied[site + d])
            return site + d;
        if (d <= site && !occupied[site - d])
            return site - d;
    }
    throw Error(ErrorCode::over_occupation,
                fmt::format("all {} sites are occupied", n));
}

std::vector<std::size_t> sample_impurity_sites(std::size_t lattice_size,
                                               std::size_t count,
                                               SamplingMode mode,
                                               SeededRng& rng)
{
    if (count >= lattice_size)
    {
        throw Error(ErrorCode::over_occupation,
                    fmt::format("{} impurities cannot fit on {} sites",
                                count,
                                lattice_size));
    }
    std::vector<std::size_t> sites;
    sites.reserve(count);
    if (mode == SamplingMode::relocate)
    {
        auto occupied = std::make_unique<bool[]>(lattice_size);
        std::span<bool const> view(occupied.get(), lattice_size);
        for (std::size_t i = 0; i < count; ++i)
        {
            std::size_t s
                = relocate_collision(view, rng.uniform_index(lattice_size));
            occupied[s] = true;
            sites.push_back(s);
        }
    }
    else
    {
        // Partial Fisher-Yates over the site indices.
        std::vector<std::size_t> pool(lattice_size);
        for (std::size_t i = 0; i < lattice_size; ++i)
            pool[i] = i;
        for (std::size_t i = 0; i < count; ++i)
        {
            std::size_t j = i + rng.uniform_index(lattice_size - i);
            std::swap(pool[i], pool[j]);
            sites.push_back(pool[i]);
        }
    }
    std::sort(sites.begin(), sites.end());
    return sites;
}

CoinField build_field(CoinFamily const& family,
                      std::size_t lattice_size,
                      SeededRng* rng)
{
    family.validate(lattice_size);
    if (lattice_size < min_lattice_size)
    {
        throw Error(ErrorCode::invalid_lattice,
                    fmt::format("lattice size {} is below the minimum of {}",
                                lattice_size,
                                min_lattice_size));
    }

    FieldProvenance prov;
    prov.family = std::string(to_string(family.tag));
    prov.gamma = family.gamma;
    prov.lattice_size = lattice_size;

    std::vector<Coin> coins(lattice_size, hadamard_coin());
    std::size_t const origin = lattice_size / 2;
    switch (family.tag)
    {
        case CoinFamilyTag::hadamard: break;
        case CoinFamilyTag::a_impurity:
            coins[origin] = a_impurity_coin(family.gamma);
            prov.impurity_count = 1;
            prov.impurity_sites = {origin};
            break;
        case CoinFamilyTag::b_impurity:
            coins[origin] = b_impurity_coin(family.gamma);
            prov.impurity_count = 1;
            prov.impurity_sites = {origin};
            break;
        case CoinFamilyTag::random_b: {
            if (!rng)
            {
                throw Error(ErrorCode::config,
                            "random-b coin field requires a seeded generator");
            }
            prov.seed = rng->seed();
            prov.rng_algorithm = std::string(SeededRng::algorithm_id);
            prov.sampling = std::string(to_string(family.sampling));
            prov.impurity_count = family.impurity_count;
            prov.impurity_sites = sample_impurity_sites(
                lattice_size, family.impurity_count, family.sampling, *rng);
            Coin const b = b_impurity_coin(family.gamma);
            for (std::size_t s : prov.impurity_sites)
                coins[s] = b;
            break;
        }
    }
    return CoinField(std::move(coins), std::move(prov));
}

}  // namespace qwalk
