#pragma once

#include <stdexcept>
#include <string>

namespace skysweep {

// Caller violated a documented precondition (shape mismatch, bad argument).
class contract_error : public std::logic_error {
 public:
  explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// A computation produced NaN/Inf from finite inputs.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that admits no meaningful result (empty mask,
// empty overlap region, nothing visible).
class degenerate_error : public std::runtime_error {
 public:
  explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file or directory layout; the message names the offending path.
class format_error : public std::runtime_error {
 public:
  explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace skysweep
