#ifndef TRAPWALK_ERRORS_HPP
#define TRAPWALK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace trapwalk {

// Bad arguments or malformed input data. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical guarantee could not be met (as opposed to bad input).
// CLI maps this to exit code 3.
class GuaranteeError : public std::runtime_error {
public:
    explicit GuaranteeError(const std::string& what) : std::runtime_error(what) {}
};

class EnvironmentTooShort : public ValidationError {
public:
    explicit EnvironmentTooShort(const std::string& what) : ValidationError(what) {}
};

class IndexOrderError : public ValidationError {
public:
    explicit IndexOrderError(const std::string& what) : ValidationError(what) {}
};

class PhiOutOfRange : public ValidationError {
public:
    explicit PhiOutOfRange(const std::string& what) : ValidationError(what) {}
};

class EmptyMeasure : public ValidationError {
public:
    explicit EmptyMeasure(const std::string& what) : ValidationError(what) {}
};

// Monte Carlo truncation error dominates the statistical error, so the
// requested quantity cannot be certified.
class TruncationTooCoarse : public GuaranteeError {
public:
    explicit TruncationTooCoarse(const std::string& what) : GuaranteeError(what) {}
};

} // namespace trapwalk

#endif
