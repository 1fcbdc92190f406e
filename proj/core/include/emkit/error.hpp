#pragma once

#include <stdexcept>
#include <string>

namespace emkit {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorCategory {
    Data,        // malformed input, parse failures, infeasible configuration
    Backend,     // provider / network / fixture failures
    Invariant,   // an emitted or loaded object violates its invariants
    Precondition // caller passed arguments outside the contract
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category), message_(what) {}

    ErrorCategory category() const noexcept { return category_; }
    const char* what() const noexcept override { return message_.c_str(); }

    // Prefixes location context ("line 3: ") while keeping the dynamic type.
    void add_context(const std::string& prefix) { message_ = prefix + message_; }

private:
    ErrorCategory category_;
    std::string message_;
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class BackendError : public Error {
public:
    explicit BackendError(const std::string& what) : Error(ErrorCategory::Backend, what) {}
};

class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(ErrorCategory::Invariant, what) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what)
        : Error(ErrorCategory::Precondition, what) {}
};

}  // namespace emkit
