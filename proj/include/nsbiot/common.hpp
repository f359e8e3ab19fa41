#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nsbiot {

using Index = int;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure surfaced by the library derives from Error so
// callers (CLI, Python bindings) can map categories to exit codes.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Text-format parse failure; `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Mesh invariant violation tied to an entity (triangle, edge or vertex index).
class MeshError : public Error {
public:
    MeshError(const std::string& what, Index entity)
        : Error(what + " (entity " + std::to_string(entity) + ")"), entity_(entity) {}
    Index entity() const { return entity_; }

private:
    Index entity_;
};

class GeometryMismatch : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    SingularMatrix(const std::string& what, Index pivot)
        : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
    Index pivot() const { return pivot_; }

private:
    Index pivot_;
};

class StepFailure : public Error {
public:
    StepFailure(const std::string& what, double residual, int step = -1)
        : Error(what), residual_(residual), step_(step) {}
    double residual() const { return residual_; }
    int step() const { return step_; }

private:
    double residual_;
    int step_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

inline constexpr double pi = 3.14159265358979323846;

} // namespace nsbiot
