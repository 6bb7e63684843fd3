#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smartsizer {

enum class Errc {
    invalid_argument,
    not_square,
    not_symmetric,
    not_positive_definite,
    empty_input,
    probability_out_of_range,
    alpha_out_of_range,
    beta_out_of_range,
    degenerate_pair,
    dimension_mismatch,
    empty_exclusion_set,
    zero_effect,
    not_reached,
    singular_system,
    parse_error,
    io_error,
    numerical_failure,
};

/// Stable snake_case name used in reports and CLI error lines.
std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
          code_(code),
          detail_(detail) {}

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

}  // namespace smartsizer
