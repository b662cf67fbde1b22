#pragma once

#include <stdexcept>
#include <string>

namespace lindex {

// Every failure raised by the library derives from Error; the concrete type
// names the precondition that was violated.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define LINDEX_DECLARE_ERROR(Name)                                  \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

// jet
LINDEX_DECLARE_ERROR(DivisionByZeroConstantTerm);
LINDEX_DECLARE_ERROR(OrderOverflow);
LINDEX_DECLARE_ERROR(OrderExceeded);
LINDEX_DECLARE_ERROR(ValidityCollapse);
LINDEX_DECLARE_ERROR(NotHolomorphic);

// sampling / geometry
LINDEX_DECLARE_ERROR(EmptyGrid);
LINDEX_DECLARE_ERROR(PolydiscEscapesBall);
LINDEX_DECLARE_ERROR(BallEscapesDomain);

// lfield
LINDEX_DECLARE_ERROR(InvalidBeta);
LINDEX_DECLARE_ERROR(NonFiniteDerivative);
LINDEX_DECLARE_ERROR(InadmissibleL);

// index / criteria
LINDEX_DECLARE_ERROR(NoDominatingStep);
LINDEX_DECLARE_ERROR(ZeroDenominator);
LINDEX_DECLARE_ERROR(TailBoundUnavailable);
LINDEX_DECLARE_ERROR(SandwichViolated);

// growth
LINDEX_DECLARE_ERROR(IntegrandSingularity);

// pde
LINDEX_DECLARE_ERROR(LeadVanishes);
LINDEX_DECLARE_ERROR(MissingBound);
LINDEX_DECLARE_ERROR(ResidualFailure);
LINDEX_DECLARE_ERROR(ZeroH);

// parsing
LINDEX_DECLARE_ERROR(ArityError);
LINDEX_DECLARE_ERROR(DomainError);

#undef LINDEX_DECLARE_ERROR

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, int line, int column)
        : Error("SyntaxError at " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace lindex
