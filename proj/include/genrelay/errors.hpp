#pragma once

#include <stdexcept>
#include <string>

namespace genrelay {

enum class Errc {
    prompt_too_small,
    unsupported_variant,
    variant_mismatch,
    shape_mismatch,
    missing_label,
    empty_input,
    non_finite_quality,
    insufficient_samples,
    grid_mismatch,
    below_grid,
    grid_not_covered,
    infeasible,
    unknown_node,
    zero_rate_edge,
    incomplete_profile,
    unreachable,
    no_candidates,
    unknown_variant,
    budget_exhausted,
    metric_incompatible,
    zero_cost,
    zero_latency,
    malformed_row,
    config_invalid,
    scenario_failed,
    file_unreadable,
};

const char *errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string &message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string &message) {
    throw Error(code, message);
}

} // namespace genrelay
