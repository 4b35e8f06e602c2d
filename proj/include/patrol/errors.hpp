#pragma once

#include <stdexcept>
#include <string>

namespace patrol {

// Malformed instance document (bad JSON, wrong types, unknown fields).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid document that violates a model invariant; the message
// names the invariant (e.g. "deadline >= 1").
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// An exact solver was asked for more work than its configured budget allows.
struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace patrol
