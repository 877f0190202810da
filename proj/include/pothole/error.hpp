#pragma once

#include <stdexcept>
#include <string>

namespace pothole {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Image too small for an operation, or mismatched raster sizes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input violates a documented precondition or type invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Unreadable or unwritable file, or malformed file contents.
class IoError : public Error {
public:
    using Error::Error;
};

/// Degenerate histogram: no level separates the image into two classes.
class NoThresholdError : public Error {
public:
    NoThresholdError() : Error("no threshold exists: image intensities are constant") {}
};

/// Segmentation produced no foreground component.
class NoPotholeFound : public Error {
public:
    NoPotholeFound() : Error("no pothole found") {}
};

/// Image file carries no usable EXIF GPS position.
class NoGeotagError : public Error {
public:
    explicit NoGeotagError(const std::string& what) : Error("no geotag: " + what) {}
};

/// Metric conversion requested without a ground sample distance.
class UncalibratedError : public Error {
public:
    UncalibratedError() : Error("uncalibrated: ground sample distance (m/px) not supplied") {}
};

}  // namespace pothole
