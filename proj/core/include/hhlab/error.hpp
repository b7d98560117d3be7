#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hhlab {

enum class ErrorKind {
  InvalidArgument,
  OffShell,
  Unbounded,
  NonFinite,
  NoCrossings,
  TooShort,
  EmptyLine,
  NoReturn,
  NoIntersections,
  NotClosed,
  LibraryTooSmall,
  RankDeficient,
  AllClean,
  NoRelation,
  UnknownKey,
  Io,
};

// Stable lower-case name, used as the machine-readable error category.
std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hhlab
