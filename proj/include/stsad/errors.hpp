// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace stsad {

// Base class for all library failures. CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data (CSV, JSON, series invariants).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what) {}
};

// Numerical breakdown inside the Kalman recursion.
class FilterError : public Error {
public:
    explicit FilterError(const std::string& what) : Error(what) {}
};

// Parameter estimation could not produce a usable optimum.
class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(what) {}
};

// Every candidate in a model-selection run failed.
class SelectionError : public Error {
public:
    explicit SelectionError(const std::string& what) : Error(what) {}
};

// A structural spec cannot be built at the given granularity/data.
class SpecInapplicableError : public Error {
public:
    explicit SpecInapplicableError(const std::string& what) : Error(what) {}
};

}  // namespace stsad
