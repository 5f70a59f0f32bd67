#include "qwalk/error.hpp"

namespace qwalk
{
std::string_view to_string(ErrorCode code)
{
    switch (code)
    {
        case ErrorCode::invalid_lattice: return "invalid-lattice";
        case ErrorCode::boundary_overflow: return "boundary-overflow";
        case ErrorCode::shape_mismatch: return "shape";
        case ErrorCode::over_occupation: return "over-occupation";
        case ErrorCode::undefined_cog: return "undefined-cog";
        case ErrorCode::domain: return "domain";
        case ErrorCode::window_invalid: return "window-invalid";
        case ErrorCode::range: return "range";
        case ErrorCode::singular_interface: return "singular-interface";
        case ErrorCode::total_reflection_degenerate:
            return "total-reflection-degenerate";
        case ErrorCode::divergence: return "divergence";
        case ErrorCode::invalid_scatterer: return "invalid-scatterer";
        case ErrorCode::config: return "config";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}
}  // namespace qwalk
