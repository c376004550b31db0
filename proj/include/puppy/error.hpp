#pragma once

#include <stdexcept>
#include <string>

namespace puppy {

// Every failure the engine reports derives from Error. The CLI maps each
// concrete class to a fixed exit code (see tools/puppy.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class NotSimple : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

// A forbidden degenerate pivot configuration (type 1, 2a or 3a) or an
// inconsistent node in the critical set.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class NonGenericTestLine : public Error {
 public:
  using Error::Error;
};

class NoStablePoint : public Error {
 public:
  using Error::Error;
};

class ArcEnded : public Error {
 public:
  using Error::Error;
};

class NoSuchHandedStrategy : public Error {
 public:
  using Error::Error;
};

class DiagramPrecondition : public Error {
 public:
  using Error::Error;
};

class CoverageGap : public Error {
 public:
  using Error::Error;
};

class NotOrthogonal : public Error {
 public:
  using Error::Error;
};

class VerificationFailed : public Error {
 public:
  using Error::Error;
};

class EpsilonTooLarge : public Error {
 public:
  using Error::Error;
};

class SelectionFailed : public Error {
 public:
  using Error::Error;
};

class PullbackFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace puppy
