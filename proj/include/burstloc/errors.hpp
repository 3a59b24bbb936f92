#pragma once

#include <stdexcept>
#include <string>

namespace burstloc {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define BURSTLOC_ERROR(Name) \
  struct Name : Error {      \
    using Error::Error;      \
  }

// network model / INP parsing
BURSTLOC_ERROR(MalformedSection);
BURSTLOC_ERROR(DanglingEndpoint);
BURSTLOC_ERROR(DuplicateId);
BURSTLOC_ERROR(MissingFlow);
BURSTLOC_ERROR(UnknownNode);
BURSTLOC_ERROR(UnknownLink);

// traces
BURSTLOC_ERROR(PositionOutOfRange);
BURSTLOC_ERROR(MalformedRow);
BURSTLOC_ERROR(NonMonotoneTime);
BURSTLOC_ERROR(NonUniformSpacing);

// detectors
BURSTLOC_ERROR(LengthMismatch);
BURSTLOC_ERROR(WindowTooShort);
BURSTLOC_ERROR(NoEvents);

// localization pipeline
BURSTLOC_ERROR(FeedClosed);
BURSTLOC_ERROR(NoPredecessor);

// reporting
BURSTLOC_ERROR(ZeroTotal);

// configuration values outside their documented ranges
BURSTLOC_ERROR(InvalidConfig);

// file open/write failures
BURSTLOC_ERROR(IoError);

#undef BURSTLOC_ERROR

}  // namespace burstloc
