#pragma once

#include <stdexcept>
#include <string>

namespace irbl {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define IRBL_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    }

IRBL_DEFINE_ERROR(EmptySampling);
IRBL_DEFINE_ERROR(EmptyRegion);
IRBL_DEFINE_ERROR(OutsideRegion);
IRBL_DEFINE_ERROR(CoincidentRobots);
IRBL_DEFINE_ERROR(SeedInCollision);
IRBL_DEFINE_ERROR(InfeasibleCell);
IRBL_DEFINE_ERROR(NoPath);
IRBL_DEFINE_ERROR(StartOccupied);
IRBL_DEFINE_ERROR(InfeasibleStart);
IRBL_DEFINE_ERROR(NoFreeSpace);

#undef IRBL_DEFINE_ERROR

/// Configuration failure; `path()` names the offending key (e.g. "fov.f_x").
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& constraint)
        : Error(path + ": " + constraint), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace irbl
