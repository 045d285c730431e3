#pragma once

#include <stdexcept>
#include <string>

namespace setsketch {

class InvalidParamsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidKeyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParamsMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class WireErrorKind {
  BadMagic,
  BadVersion,
  BadCrc,
  TruncatedFrame,
  FieldRange,
};

class WireError : public std::runtime_error {
 public:
  WireError(WireErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  WireErrorKind kind() const noexcept { return kind_; }

 private:
  WireErrorKind kind_;
};

}  // namespace setsketch
