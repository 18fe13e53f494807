#pragma once

#include <stdexcept>
#include <string>

namespace qdiff {

/// Invalid lattice/run configuration or malformed input. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation refused because it would exceed its documented size cap. Exit code 3.
class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical a-posteriori check failed (e.g. truncated propagation not unitary).
class CheckFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qdiff
