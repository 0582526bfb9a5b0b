#pragma once

#include <array>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mgtc {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Matrix3c = Eigen::Matrix3cd;

enum class Phase : int { A = 0, B = 1, C = 2 };

inline constexpr std::array<Phase, 3> kPhases{Phase::A, Phase::B, Phase::C};

/// Nominal angle of a phase: A = 0, B = -2pi/3, C = +2pi/3.
constexpr double phase_angle(Phase p) {
    switch (p) {
    case Phase::A: return 0.0;
    case Phase::B: return -2.0 * std::numbers::pi / 3.0;
    case Phase::C: return 2.0 * std::numbers::pi / 3.0;
    }
    return 0.0;
}

inline cplx phase_rotation(Phase p) { return std::polar(1.0, phase_angle(p)); }

inline char phase_name(Phase p) { return "ABC"[static_cast<int>(p)]; }

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Topology problems: disconnected graph, bad incidence, missing slack.
class StructuralError : public Error {
  public:
    using Error::Error;
};

/// Malformed numeric input: wrong dimensions, non-finite values, out-of-range parameters.
class InputError : public Error {
  public:
    using Error::Error;
};

/// Inconsistent scenario options (e.g. reserve enabled without batteries).
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace mgtc
