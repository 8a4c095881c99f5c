#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace decohist {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

enum class ErrorKind {
    InvalidDimension,
    Invalid,
    InvalidInput,
    InvalidFamily,
    StreamUnderflow,
    ExhaustedDesign,
    UnsupportedRegime,
    NumericFailure,
    DegenerateSpectrum,
    RankDeficient,
    SpanViolation,
    NullHistory,
    InvalidBranch,
    TooLarge,
    InvalidConfig,
    InvalidResult,
    UndefinedSnr,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool ok, ErrorKind kind, const std::string& what) {
    if (!ok) throw Error(kind, what);
}

}  // namespace decohist
