#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace epj {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using RowVectorXc = Eigen::RowVectorXcd;
using MatrixXc = Eigen::MatrixXcd;
using Matrix2c = Eigen::Matrix2cd;

/// Riemann sheet of sqrt(z). First: cut along [0, +inf), arg z in [0, 2pi).
/// Second: the negative of First (continuation through the cut).
enum class Sheet { First, Second };

inline const char* to_string(Sheet s) { return s == Sheet::First ? "first" : "second"; }

inline Sheet other(Sheet s) { return s == Sheet::First ? Sheet::Second : Sheet::First; }

enum class ErrorCode {
    InvalidArgument,
    NonConvergence,
    DerivativeVanished,
    DefectiveMatrix,
    NotSolvable,
    ZeroEnergy,
    RootFindingFailed,
    KernelDimensionError,
    DiabolicPoint,
    AccidentalDegeneracy,
    BranchAmbiguity,
    DegenerateOverlap,
    DegeneratePair,
    LabelAmbiguity,
    PoorFit,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DerivativeVanished: return "DerivativeVanished";
    case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorCode::NotSolvable: return "NotSolvable";
    case ErrorCode::ZeroEnergy: return "ZeroEnergy";
    case ErrorCode::RootFindingFailed: return "RootFindingFailed";
    case ErrorCode::KernelDimensionError: return "KernelDimensionError";
    case ErrorCode::DiabolicPoint: return "DiabolicPoint";
    case ErrorCode::AccidentalDegeneracy: return "AccidentalDegeneracy";
    case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorCode::DegenerateOverlap: return "DegenerateOverlap";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::LabelAmbiguity: return "LabelAmbiguity";
    case ErrorCode::PoorFit: return "PoorFit";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Bilinear pairing (no complex conjugation). Left and right vectors of a
/// non-Hermitian problem are independent objects, so this is the only
/// product used between them.
template<typename A, typename B>
auto bilinear(const Eigen::MatrixBase<A>& left, const Eigen::MatrixBase<B>& right) {
    return (left.transpose() * right).value();
}

} // namespace epj
