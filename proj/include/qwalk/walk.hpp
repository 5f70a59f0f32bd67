#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mat2.hpp"

namespace qwalk
{
//---------------------------------------------------------------------------//
/*!
 * Quantum-coin matrix for one lattice site.
 *
 * Entries are indexed (++, +-; -+, --): the first row feeds the right-moving
 * component, the second row the left-moving one.
 */
struct Coin
{
    Mat2 entries;

    friend bool operator==(Coin const&, Coin const&) = default;
};

//! Tolerance used for coin unitarity checks.
inline constexpr double coin_unitarity_tol = 1e-12;

bool is_unitary(Coin const& c, double tol = coin_unitarity_tol);

//---------------------------------------------------------------------------//
//! How a coin field was built; serialized into every result file.
struct FieldProvenance
{
    std::string family{"hadamard"};
    double gamma{0};
    std::size_t lattice_size{0};
    std::size_t impurity_count{0};
    std::optional<std::uint64_t> seed;
    std::string rng_algorithm;
    std::string sampling;
    std::vector<std::size_t> impurity_sites;  //!< sorted lattice indices
};

//---------------------------------------------------------------------------//
/*!
 * Per-site coin assignment over a finite lattice.
 *
 * Immutable once built; every entry is unitary.
 */
class CoinField
{
  public:
    CoinField(std::vector<Coin> coins, FieldProvenance provenance);

    std::size_t size() const { return coins_.size(); }
    Coin const& operator[](std::size_t i) const { return coins_[i]; }
    std::span<Coin const> coins() const { return coins_; }
    FieldProvenance const& provenance() const { return provenance_; }

  private:
    std::vector<Coin> coins_;
    FieldProvenance provenance_;
};

//---------------------------------------------------------------------------//
/*!
 * Two-component amplitude on sites [0, N).
 *
 * The site at origin() = N/2 is the system center, relative position 0.
 */
class WalkState
{
  public:
    //! Zero state on N sites.
    explicit WalkState(std::size_t lattice_size);

    std::size_t size() const { return plus_.size(); }
    std::size_t origin() const { return plus_.size() / 2; }

    //! Position of site i relative to the origin.
    long position(std::size_t i) const
    {
        return static_cast<long>(i) - static_cast<long>(origin());
    }

    std::span<Complex const> plus() const { return plus_; }
    std::span<Complex const> minus() const { return minus_; }
    std::span<Complex> plus() { return plus_; }
    std::span<Complex> minus() { return minus_; }

    friend bool operator==(WalkState const&, WalkState const&) = default;

  private:
    std::vector<Complex> plus_;
    std::vector<Complex> minus_;
};

//! Smallest lattice accepted by the walk.
inline constexpr std::size_t min_lattice_size = 3;

//! Smallest lattice on which T steps from the origin never overflow.
constexpr std::size_t lattice_size_for(std::size_t steps)
{
    return 2 * steps + 1;
}

//! Localized state (1, 1)/sqrt(2) at the origin.
WalkState make_initial_state(std::size_t lattice_size);

//! Localized state with arbitrary (normalized) components at the origin.
WalkState
make_initial_state(std::size_t lattice_size, Complex plus, Complex minus);

//! Apply the coin operator once.
WalkState step(WalkState const& state, CoinField const& field);

//! Buffer-reusing form of step; out must have the same size as state.
void step_into(WalkState const& state, CoinField const& field, WalkState& out);

//! Per-site probability |plus|^2 + |minus|^2.
std::vector<double> density(WalkState const& state);

//! Total probability.
double norm(WalkState const& state);

//! Called with (t, state) for t = 0 and after every step.
using Observer = std::function<void(long, WalkState const&)>;

WalkState evolve(WalkState state,
                 CoinField const& field,
                 long steps,
                 std::span<Observer const> observers = {});

}  // namespace qwalk
