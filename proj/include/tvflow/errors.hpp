#pragma once

#include <stdexcept>
#include <string>

namespace tvflow {

// Base class for every error raised by the library. CLI entry points catch
// this, print the message and exit nonzero.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Point has no unique closest point on the target manifold.
class OutsideTube : public Error {
public:
  explicit OutsideTube(const std::string& msg) : Error("OutsideTube: " + msg) {}
};

// Logarithm requested at or past the cut locus (antipode, angle pi).
class CutLocus : public Error {
public:
  explicit CutLocus(const std::string& msg) : Error("CutLocus: " + msg) {}
};

// Two tangent vectors span no 2-plane.
class DegeneratePlane : public Error {
public:
  explicit DegeneratePlane(const std::string& msg) : Error("DegeneratePlane: " + msg) {}
};

// Field values fall outside the geodesic ball an operation requires.
class RadiusViolation : public Error {
public:
  explicit RadiusViolation(const std::string& msg) : Error("RadiusViolation: " + msg) {}
};

class NoConvergence : public Error {
public:
  explicit NoConvergence(const std::string& msg) : Error("NoConvergence: " + msg) {}
};

// Discrete energy increased beyond tolerance between snapshots.
class Instability : public Error {
public:
  explicit Instability(const std::string& msg) : Error("Instability: " + msg) {}
};

class NoExtinction : public Error {
public:
  explicit NoExtinction(const std::string& msg) : Error("NoExtinction: " + msg) {}
};

class DomainNotConvex : public Error {
public:
  explicit DomainNotConvex(const std::string& msg) : Error("DomainNotConvex: " + msg) {}
};

class EpsilonTooLarge : public Error {
public:
  explicit EpsilonTooLarge(const std::string& msg) : Error("EpsilonTooLarge: " + msg) {}
};

class EmptyMask : public Error {
public:
  explicit EmptyMask(const std::string& msg) : Error("EmptyMask: " + msg) {}
};

class UnknownSuite : public Error {
public:
  explicit UnknownSuite(const std::string& msg) : Error("UnknownSuite: " + msg) {}
};

class UnsupportedFormat : public Error {
public:
  explicit UnsupportedFormat(const std::string& msg) : Error("UnsupportedFormat: " + msg) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error("ConfigError: " + msg) {}
};

}  // namespace tvflow
