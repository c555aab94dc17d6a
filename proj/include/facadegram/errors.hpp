#pragma once

#include <stdexcept>
#include <string>

namespace facadegram {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files. Carries the position when known (1-based, 0 = unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = 0, int column = 0)
        : Error(line > 0 ? msg + " at line " + std::to_string(line) + ", column " +
                               std::to_string(column)
                         : msg),
          line_(line),
          column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Structurally well-formed input that breaks a model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Rule sizes do not fit the region being expanded, or derivation does not terminate.
class DerivationError : public Error {
public:
    using Error::Error;
};

// Contradictory linear constraints or impossible target dimensions.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// A region admits no split rule; the layout is outside split-grammar expressivity.
class UnexplainableLayoutError : public Error {
public:
    using Error::Error;
};

}  // namespace facadegram
