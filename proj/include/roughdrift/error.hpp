#pragma once

#include <stdexcept>
#include <string>

namespace roughdrift {

enum class ErrorKind {
    invalid_argument,
    singularity,
    resolution,
    mismatch,
    config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base error for every failure raised by the toolkit.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when the spatial grid cannot represent the heat kernel.
/// `scale` is the offending kernel standard deviation.
class ResolutionError : public Error {
public:
    ResolutionError(const std::string& what, double scale, double spacing)
        : Error(ErrorKind::resolution, what), scale_(scale), spacing_(spacing) {}

    double scale() const noexcept { return scale_; }
    double spacing() const noexcept { return spacing_; }

private:
    double scale_;
    double spacing_;
};

/// Raised when a drift evaluation is non-finite and no cap policy applies.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, long path = -1, long step = -1)
        : Error(ErrorKind::singularity, what), path_(path), step_(step) {}

    long path() const noexcept { return path_; }
    long step() const noexcept { return step_; }

private:
    long path_;
    long step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::invalid_argument, what);
}

}  // namespace roughdrift
