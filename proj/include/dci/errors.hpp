#pragma once

#include <stdexcept>
#include <string>

namespace dci {

// Exit-code contract of the CLI: usage/config errors -> 1, data errors -> 2,
// internal consistency errors -> 3.

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

class internal_error : public std::runtime_error {
 public:
  explicit internal_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dci
