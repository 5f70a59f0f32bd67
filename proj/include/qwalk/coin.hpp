#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "rng.hpp"
#include "walk.hpp"

namespace qwalk
{
enum class CoinFamilyTag
{
    hadamard,
    a_impurity,  //!< phase on the diagonal at the origin
    b_impurity,  //!< phase on the off-diagonal at the origin
    random_b,  //!< B-impurities at uniformly random sites
};

//! How random impurity sites are drawn.
enum class SamplingMode
{
    relocate,  //!< i.i.d. draws, collisions moved to the nearest empty site
    distinct,  //!< uniform sample without replacement
};

std::string_view to_string(CoinFamilyTag tag);
std::string_view to_string(SamplingMode mode);
CoinFamilyTag parse_family(std::string_view name);
SamplingMode parse_sampling(std::string_view name);

struct CoinFamily
{
    CoinFamilyTag tag{CoinFamilyTag::hadamard};
    double gamma{0};  //!< phase in (-pi, pi]
    std::size_t impurity_count{0};  //!< random_b only
    SamplingMode sampling{SamplingMode::relocate};

    //! Impurity density M / N.
    double density(std::size_t lattice_size) const;

    //! Throws Error(domain / over_occupation) on an invalid description.
    void validate(std::size_t lattice_size) const;
};

Coin hadamard_coin();
Coin a_impurity_coin(double gamma);
Coin b_impurity_coin(double gamma);

/*!
 * Nearest unoccupied site to `site`, scanning distance 1, 2, ... and trying
 * the positive direction first at each distance. `occupied` spans the whole
 * lattice.
 */
std::size_t
relocate_collision(std::span<bool const> occupied, std::size_t site);

//! Draw impurity sites; the result is sorted.
std::vector<std::size_t> sample_impurity_sites(std::size_t lattice_size,
                                               std::size_t count,
                                               SamplingMode mode,
                                               SeededRng& rng);

/*!
 * Build the coin field for a family on N sites.
 *
 * random_b requires a generator; the other families ignore it.
 */
CoinField build_field(CoinFamily const& family,
                      std::size_t lattice_size,
                      SeededRng* rng = nullptr);

}  // namespace qwalk
