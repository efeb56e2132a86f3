#pragma once

#include <stdexcept>
#include <string>

namespace rgt {

/// Base class for all harness errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class MalformedNameError : public Error {
public:
    using Error::Error;
};

class DiffSyntaxError : public Error {
public:
    using Error::Error;
};

class EmptyDiffError : public Error {
public:
    using Error::Error;
};

class NotApplicableError : public Error {
public:
    using Error::Error;
};

class BuildFailureError : public Error {
public:
    BuildFailureError(const std::string& what, std::string log)
        : Error(what), log_(std::move(log)) {}

    const std::string& log() const { return log_; }

private:
    std::string log_;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainTooLargeError : public Error {
public:
    using Error::Error;
};

class InsufficientRunsError : public Error {
public:
    using Error::Error;
};

class GroundTruthBuildFailureError : public Error {
public:
    using Error::Error;
};

}  // namespace rgt
