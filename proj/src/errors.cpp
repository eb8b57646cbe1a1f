#include "genrelay/errors.hpp"

namespace genrelay {

const char *errc_name(Errc code) {
    switch (code) {
    case Errc::prompt_too_small: return "PromptTooSmall";
    case Errc::unsupported_variant: return "UnsupportedVariant";
    case Errc::variant_mismatch: return "VariantMismatch";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::missing_label: return "MissingLabel";
    case Errc::empty_input: return "EmptyInput";
    case Errc::non_finite_quality: return "NonFiniteQuality";
    case Errc::insufficient_samples: return "InsufficientSamples";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::below_grid: return "BelowGrid";
    case Errc::grid_not_covered: return "GridNotCovered";
    case Errc::infeasible: return "Infeasible";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::zero_rate_edge: return "ZeroRateEdge";
    case Errc::incomplete_profile: return "IncompleteProfile";
    case Errc::unreachable: return "Unreachable";
    case Errc::no_candidates: return "NoCandidates";
    case Errc::unknown_variant: return "UnknownVariant";
    case Errc::budget_exhausted: return "BudgetExhausted";
    case Errc::metric_incompatible: return "MetricIncompatible";
    case Errc::zero_cost: return "ZeroCost";
    case Errc::zero_latency: return "ZeroLatency";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::scenario_failed: return "ScenarioFailed";
    case Errc::file_unreadable: return "FileUnreadable";
    }
    return "UnknownError";
}

} // namespace genrelay
