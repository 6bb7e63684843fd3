#include "smartsizer/error.hpp"

namespace smartsizer {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::not_square: return "not_square";
        case Errc::not_symmetric: return "not_symmetric";
        case Errc::not_positive_definite: return "not_positive_definite";
        case Errc::empty_input: return "empty_input";
        case Errc::probability_out_of_range: return "probability_out_of_range";
        case Errc::alpha_out_of_range: return "alpha_out_of_range";
        case Errc::beta_out_of_range: return "beta_out_of_range";
        case Errc::degenerate_pair: return "degenerate_pair";
        case Errc::dimension_mismatch: return "dimension_mismatch";
        case Errc::empty_exclusion_set: return "empty_exclusion_set";
        case Errc::zero_effect: return "zero_effect";
        case Errc::not_reached: return "not_reached";
        case Errc::singular_system: return "singular_system";
        case Errc::parse_error: return "parse_error";
        case Errc::io_error: return "io_error";
        case Errc::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

}  // namespace smartsizer
