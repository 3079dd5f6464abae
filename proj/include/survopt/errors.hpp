#pragma once

#include <stdexcept>
#include <string>

namespace survopt {

/// Base class for all library errors. `kind()` is stable and machine-parsable;
/// the CLI prints it on stderr and maps it to an exit code.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidInput : Error {
    explicit InvalidInput(const std::string& what) : Error("InvalidInput", what) {}
};

struct NonRegular : Error {
    explicit NonRegular(const std::string& what) : Error("NonRegular", what) {}
};

struct OutOfSupport : Error {
    explicit OutOfSupport(const std::string& what) : Error("OutOfSupport", what) {}
};

struct BadGrid : Error {
    explicit BadGrid(const std::string& what) : Error("BadGrid", what) {}
};

struct InfeasibleBudget : Error {
    explicit InfeasibleBudget(const std::string& what) : Error("InfeasibleBudget", what) {}
};

struct NonMonotoneInput : Error {
    explicit NonMonotoneInput(const std::string& what) : Error("NonMonotoneInput", what) {}
};

struct NonMonotoneAllocation : Error {
    explicit NonMonotoneAllocation(const std::string& what)
        : Error("NonMonotoneAllocation", what) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

struct ZeroAllocation : Error {
    explicit ZeroAllocation(const std::string& what) : Error("ZeroAllocation", what) {}
};

struct ZeroAdversaryEntry : Error {
    explicit ZeroAdversaryEntry(const std::string& what) : Error("ZeroAdversaryEntry", what) {}
};

struct IndexOutOfRange : Error {
    explicit IndexOutOfRange(const std::string& what) : Error("IndexOutOfRange", what) {}
};

struct TooLarge : Error {
    explicit TooLarge(const std::string& what) : Error("TooLarge", what) {}
};

struct DegenerateNoise : Error {
    explicit DegenerateNoise(const std::string& what) : Error("DegenerateNoise", what) {}
};

struct Infeasible : Error {
    explicit Infeasible(const std::string& what) : Error("Infeasible", what) {}
};

struct SingularGram : Error {
    explicit SingularGram(const std::string& what) : Error("SingularGram", what) {}
};

}  // namespace survopt
