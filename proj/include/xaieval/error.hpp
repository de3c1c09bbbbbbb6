#pragma once

#include <stdexcept>
#include <string>

namespace xaieval {

// Base for every error the harness raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad or unreadable raster file, or a raster that violates its invariants.
class RasterError : public Error {
public:
    using Error::Error;
};

// Two rasters that must share a grid do not.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid manifest, flag, or option combination. Maps to exit status 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Model runner failed: nonzero exit, timeout, missing or bad output.
class RunnerError : public Error {
public:
    using Error::Error;
};

// Metric preconditions violated (empty aggregate, population mismatch).
class MetricError : public Error {
public:
    using Error::Error;
};

// A report was requested for a cell the run result does not contain.
class ReportError : public Error {
public:
    using Error::Error;
};

}  // namespace xaieval
