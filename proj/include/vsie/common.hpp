// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vsie {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Dyad = Eigen::Matrix3cd;

inline constexpr double kPi = 3.14159265358979323846;

// CODATA 2018 vacuum constants.
inline constexpr double kMu0 = 1.25663706212e-6;
inline constexpr double kEps0 = 8.8541878128e-12;
inline constexpr double kC0 = 299792458.0;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument: bad index, dimension mismatch, out-of-range parameter.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent geometry (degenerate patch, overlap, grid margin).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Green's function evaluated at coincident points.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// A size guard refused the request (e.g. too many unknowns for dense assembly).
class LimitError : public Error {
public:
    using Error::Error;
};

/// Malformed scene document. Carries the offending key and source line.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::string key, int line)
        : Error(format(msg, key, line)), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& msg, const std::string& key, int line) {
        std::string out = msg;
        if (!key.empty()) out += " [key '" + key + "']";
        if (line > 0) out += " (line " + std::to_string(line) + ")";
        return out;
    }

    std::string key_;
    int line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace vsie
