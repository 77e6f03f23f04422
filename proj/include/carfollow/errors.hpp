#pragma once

#include <stdexcept>
#include <string>

namespace carfollow {

/// Invalid gain, limit or model parameter.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside the domain of an operation (non-finite value, negative speed, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Unknown scenario or figure name.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed or inconsistent configuration file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time-domain string-stability oracle did not reach a periodic steady state.
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace carfollow
