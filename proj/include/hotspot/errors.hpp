#pragma once

#include <stdexcept>
#include <string>

namespace hotspot {

/// Input file or flag value could not be parsed.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parsed data violates a structural invariant.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Missing or unreadable file.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hotspot
