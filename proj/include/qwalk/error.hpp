#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qwalk
{
//! Failure categories surfaced by the library.
enum class ErrorCode
{
    invalid_lattice,
    boundary_overflow,
    shape_mismatch,
    over_occupation,
    undefined_cog,
    domain,
    window_invalid,
    range,
    singular_interface,
    total_reflection_degenerate,
    divergence,
    invalid_scatterer,
    config,
    io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, std::string const& what)
        : std::runtime_error(what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

//! Raised when a step would push nonzero amplitude off the lattice.
class BoundaryOverflow : public Error
{
  public:
    BoundaryOverflow(long step, std::string const& what)
        : Error(ErrorCode::boundary_overflow, what), step_(step)
    {
    }

    //! Index of the step that would have overflowed (1-based), or -1.
    long step() const noexcept { return step_; }

  private:
    long step_;
};

}  // namespace qwalk
