#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace latocc {

// Failure classes map one-to-one onto CLI exit codes (see src/cli/commands.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- numerics -------------------------------------------------------------

class DomainError : public Error {
public:
    using Error::Error;
};

class BracketError : public Error {
public:
    using Error::Error;
};

class FactorizationError : public Error {
public:
    FactorizationError(const std::string& what, std::size_t pivot)
        : Error(what), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

// --- data ------------------------------------------------------------------

class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t row)
        : DataError(what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class GapError : public DataError {
public:
    GapError(const std::string& what, std::string first_missing)
        : DataError(what), first_missing_(std::move(first_missing)) {}
    const std::string& first_missing() const noexcept { return first_missing_; }

private:
    std::string first_missing_;
};

// --- model -----------------------------------------------------------------

class EstimationError : public Error {
public:
    explicit EstimationError(const std::string& what)
        : Error(what), failures_{what} {}
    EstimationError(const std::string& what, std::vector<std::string> failures)
        : Error(what), failures_(std::move(failures)) {}
    const std::vector<std::string>& failures() const noexcept { return failures_; }

private:
    std::vector<std::string> failures_;
};

class DegenerateMarginalError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class InsufficientDataError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class AdjustmentError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

// --- simulate / evaluate ---------------------------------------------------

class SimulationError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};

}  // namespace latocc
