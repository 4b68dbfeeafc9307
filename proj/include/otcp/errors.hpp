#pragma once

#include <stdexcept>
#include <string>

namespace otcp {

// Bad user-facing configuration (flag combinations, unreachable levels).
// CLI maps this to exit code 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// File and format problems.  CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public IoError {
public:
    ParseError(const std::string& what, long line)
        : IoError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Iteration caps and sampling caps.  CLI maps this to exit code 4.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

class SamplingError : public std::runtime_error {
public:
    explicit SamplingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace otcp
