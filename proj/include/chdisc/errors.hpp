#pragma once

#include <stdexcept>
#include <string>

namespace chdisc {

// Base class for all library errors so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct NotAState : Error {
    explicit NotAState(const std::string& what) : Error(what) {}
};

struct NotAChannel : Error {
    explicit NotAChannel(const std::string& what) : Error(what) {}
};

// Thrown when a candidate Choi matrix has a negative eigenvalue beyond tolerance.
struct NotPsd : NotAChannel {
    explicit NotPsd(const std::string& what) : NotAChannel(what) {}
};

// Thrown when the Choi marginal over the output factor deviates from the identity.
struct NotTracePreserving : NotAChannel {
    explicit NotTracePreserving(const std::string& what) : NotAChannel(what) {}
};

struct NotUnitary : Error {
    explicit NotUnitary(const std::string& what) : Error(what) {}
};

struct NotAPovm : Error {
    explicit NotAPovm(const std::string& what) : Error(what) {}
};

struct NotATester : Error {
    explicit NotATester(const std::string& what) : Error(what) {}
};

struct SolverFailure : Error {
    explicit SolverFailure(const std::string& what) : Error(what) {}
};

struct NotMub : Error {
    explicit NotMub(const std::string& what) : Error(what) {}
};

struct ConstCViolated : Error {
    explicit ConstCViolated(const std::string& what) : Error(what) {}
};

struct DecompositionFailed : Error {
    explicit DecompositionFailed(const std::string& what) : Error(what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

} // namespace chdisc
