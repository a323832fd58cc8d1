#pragma once

#include <stdexcept>
#include <string>

namespace hyprec {

// Kind-pair or link-shape violations when assembling the hierarchy graph.
struct structural_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Prior fitting rejected the input; the caller should apply the fallback prior.
struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An entity was requested that is not present (embedding table, prior map, ...).
struct lookup_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed ingestion input; message carries file:line positions.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hyprec
