#pragma once

#include <stdexcept>
#include <string>

namespace igkls {

enum class ErrorKind {
    Shape,
    NotClosed,
    DecompositionFailed,
    NotIntertwiner,
    NotSameMap,
    NotMinimal,
    NotInvariant,
    FactorizationResidual,
    NotSameGenerator,
    NotEquivalent,
    NotDecoherenceFree,
    NotMaximalAbelian,
    NotDiagonal,
    NotTracePreserving,
    AlgebraClosureFailed,
    NoFixedState,
    PictureMismatch,
    Infeasible,
    ParseError,
    SchemaError,
    InvariantError,
};

const char* error_kind_name(ErrorKind kind);

// True for kinds that signal a failed mathematical verification (CLI exit 1),
// false for input and usage problems (CLI exit 2).
bool is_verification_failure(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, double residual = 0.0)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
          kind_(kind),
          residual_(residual) {}

    ErrorKind kind() const { return kind_; }
    double residual() const { return residual_; }

private:
    ErrorKind kind_;
    double residual_;
};

}  // namespace igkls
