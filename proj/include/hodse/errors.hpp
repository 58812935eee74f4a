#pragma once

#include <stdexcept>
#include <string>

namespace hodse {

/// Base class for all library errors.  The CLI maps the concrete type to a
/// stable process exit code, so new error conditions should pick one of the
/// subclasses below rather than throwing std::runtime_error directly.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed user input: unparseable CSV/config, unknown keys, bad grammar.
class input_error : public error {
public:
    explicit input_error(const std::string& what) : error(what) {}
};

/// A documented precondition of an operation was violated by the caller
/// (wrong dimensions, un-centered data, missing smoothing, order too large).
class contract_error : public error {
public:
    explicit contract_error(const std::string& what) : error(what) {}
};

/// A work-budget refusal: the requested computation is legal but exceeds the
/// configured size budget (e.g. dense tensors with d^k too large).  Treated
/// as a contract violation for exit-code purposes.
class capacity_error : public contract_error {
public:
    explicit capacity_error(const std::string& what) : contract_error(what) {}
};

/// Numerical failure at runtime: quadrature that refuses to converge,
/// an oscillation guard tripping, non-finite intermediates.
class numeric_error : public error {
public:
    explicit numeric_error(const std::string& what) : error(what) {}
};

} // namespace hodse
