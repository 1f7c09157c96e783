#pragma once

#include <stdexcept>
#include <string>

namespace studyplan {

// Base for every domain error raised by the library. Callers that only care
// about "something in the input was wrong" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or directory could not be read.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace studyplan
