#pragma once

#include <stdexcept>
#include <string>

namespace cudi {

// Shape/group/size combinations that no layer or kernel can accept.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller broke a documented precondition (mismatched shapes, out-of-range value).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptCheckpoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RoleMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ImageDecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedStatistic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace cudi
