#include "qwalk/rng.hpp"

#include <limits>

#include "qwalk/error.hpp"

namespace qwalk
{
SeededRng::SeededRng(std::uint64_t seed)
    : seed_(seed), engine_(splitmix64(seed))
{
}

std::size_t SeededRng::uniform_index(std::size_t n)
{
    if (n == 0)
    {
        throw Error(ErrorCode::domain, "uniform_index needs a positive bound");
    }
    auto const bound = static_cast<std::uint64_t>(n);
    constexpr auto max = std::numeric_limits<std::uint64_t>::max();
    // Largest multiple of bound that fits; values at or above it are biased.
    std::uint64_t const limit = max - (max % bound + 1) % bound;
    std::uint64_t x;
    do
    {
        x = engine_();
    } while (x > limit);
    return static_cast<std::size_t>(x % bound);
}

}  // namespace qwalk
