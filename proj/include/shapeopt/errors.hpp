#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapeopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mesh violates one of its structural invariants.
class MeshValidityError : public Error {
public:
    using Error::Error;
};

/// A triangle ended up with non-positive signed area.
class InvertedElementError : public MeshValidityError {
public:
    InvertedElementError(std::size_t triangle, double area)
        : MeshValidityError("inverted element: triangle " + std::to_string(triangle) +
                            " has signed area " + std::to_string(area)),
          triangle_(triangle), area_(area) {}

    [[nodiscard]] std::size_t triangle() const noexcept { return triangle_; }
    [[nodiscard]] double area() const noexcept { return area_; }

private:
    std::size_t triangle_;
    double area_;
};

class PointNotFoundError : public Error {
public:
    using Error::Error;
};

/// Linear solve failed: indefinite matrix, singular system or residual above tolerance.
class SolverError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

/// An outer optimization iteration failed; carries the iteration index.
class IterationError : public Error {
public:
    IterationError(int iteration, const std::string& what)
        : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

    [[nodiscard]] int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace shapeopt
