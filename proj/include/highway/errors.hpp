#pragma once

#include <stdexcept>
#include <string>

namespace highway {

// Bad input data: unreadable/malformed files, inconsistent datasets.
// The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration: unknown keys, out-of-range values, unknown modes.
// The CLI maps this to exit code 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace highway
