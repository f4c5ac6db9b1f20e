#pragma once

#include <stdexcept>
#include <string>

namespace popsynth {

// Malformed or inconsistent input data (bad category, duplicate rows, ...).
class DataError : public std::runtime_error {
  public:
    explicit DataError(const std::string &what) : std::runtime_error(what) {}
};

// Numerical failure (divergent training, degenerate statistic).
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string &what) : std::runtime_error(what) {}
};

// Filesystem / stream failure.
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string &what) : std::runtime_error(what) {}
};

// Sampling budget exhausted before the requested rows were produced.
class BudgetError : public std::runtime_error {
  public:
    explicit BudgetError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace popsynth
