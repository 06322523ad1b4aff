#pragma once

#include <stdexcept>
#include <string>

namespace rigidity {

// Malformed input document (missing keys, wrong types, bad indices).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// A structural invariant of the surface does not hold; the message names
// the violated invariant and the offending entity.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Derivative machinery was asked for at a folding state that does not close.
struct NotAConfiguration : std::runtime_error {
    explicit NotAConfiguration(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rigidity
