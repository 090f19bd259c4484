#pragma once

#include <stdexcept>
#include <string>

namespace hmf {

// Base for everything thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input geometry/arguments: dimension mismatch, out-of-range k, etc.
class domain_error : public error {
public:
    explicit domain_error(const std::string& msg) : error(msg) {}
};

// Point outside the grid box, or a requested space-time window not covered
// by recorded snapshots.
class coverage_error : public error {
public:
    explicit coverage_error(const std::string& msg) : error(msg) {}
};

// A numeric guard tripped: degenerate projection step, non-termination
// guard, cost guard.
class guard_error : public error {
public:
    explicit guard_error(const std::string& msg) : error(msg) {}
};

// Violated structural precondition on data (non-disjoint packing, unit
// constraint broken, covering fault).
class structural_error : public error {
public:
    explicit structural_error(const std::string& msg) : error(msg) {}
};

// Config file problems: parse errors, unknown keys, invalid values.
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

// A pipeline stage input produced by an earlier stage is missing.
class dependency_error : public error {
public:
    explicit dependency_error(const std::string& msg) : error(msg) {}
};

} // namespace hmf
