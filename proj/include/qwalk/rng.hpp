#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace qwalk
{
//---------------------------------------------------------------------------//
/*!
 * Seeded 64-bit generator with a platform-independent stream.
 *
 * The user seed is passed through one SplitMix64 round before seeding a
 * std::mt19937_64 engine, so consecutive seeds start from well-separated
 * engine states. Bounded integers use rejection sampling rather than
 * std::uniform_int_distribution, whose output is implementation-defined.
 */
class SeededRng
{
  public:
    static constexpr std::string_view algorithm_id
        = "mt19937_64/splitmix64-seed/reject-mod";

    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    //! Next raw 64-bit output.
    std::uint64_t next() { return engine_(); }

    //! Uniform integer in [0, n); n must be positive.
    std::size_t uniform_index(std::size_t n);

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

//! One SplitMix64 output for the given state.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace qwalk
