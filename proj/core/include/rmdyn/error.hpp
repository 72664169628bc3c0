#pragma once

#include <stdexcept>
#include <string>

namespace rmdyn {

/// Invalid setup: grid mismatch, padding violation, bad config value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state that cannot be normalized or a target vector with no support.
class DegenerateStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Arguments outside the domain where a relation is defined.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigendecomposition or other numerical kernel failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Config file problem, carrying the offending key and line (0 if unknown).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string key, int line, const std::string& what)
        : std::runtime_error(format(key, line, what)), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& key, int line, const std::string& what) {
        std::string out = key.empty() ? std::string("config") : key;
        if (line > 0) out += " (line " + std::to_string(line) + ")";
        return out + ": " + what;
    }

    std::string key_;
    int line_;
};

}  // namespace rmdyn
