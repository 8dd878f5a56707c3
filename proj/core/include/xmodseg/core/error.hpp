#pragma once

#include <stdexcept>
#include <string>

namespace xmodseg {

// Contract violations (bad arguments, shape mismatches, invalid configs).
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Failures of the environment (missing files, unwritable directories, corrupt data).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

inline void check_io(bool cond, const std::string& msg) {
  if (!cond) throw IoError(msg);
}

}  // namespace xmodseg
