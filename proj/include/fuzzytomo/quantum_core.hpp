#pragma once

// Complex linear-algebra substrate: pure states, density matrices,
// purifications and Bloch-sphere parameterization.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace fuzzytomo {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kStateTolerance = 1e-12;

/// Spherical angles of a pure qubit state plus its global phase.
///   |psi> = exp(i chi) (cos(theta/2), sin(theta/2) exp(i phi))
struct BlochAngles {
    double theta = 0.0;
    double phi = 0.0;
    double chi = 0.0;

    /// Maps arbitrary real angles onto theta in [0, pi], phi and chi in
    /// [0, 2pi) describing the same ray.
    [[nodiscard]] BlochAngles normalized() const;
};

/// Unit-norm state vector.
class PureState {
public:
    /// Throws InvalidArgument unless |amplitudes| = 1 within 1e-12.
    explicit PureState(CVector amplitudes);

    /// Rescales a nonzero vector to unit norm.
    static PureState normalized(const CVector& v);

    [[nodiscard]] const CVector& amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return amplitudes_.size(); }
    [[nodiscard]] CMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

private:
    CVector amplitudes_;
};

/// Hermitian, positive semidefinite, unit-trace matrix.
class DensityMatrix {
public:
    /// Validates hermiticity, eigenvalues >= -1e-12 and unit trace.
    explicit DensityMatrix(CMatrix matrix);

    static DensityMatrix from_pure(const PureState& state);

    [[nodiscard]] const CMatrix& matrix() const noexcept { return matrix_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return matrix_.rows(); }

private:
    CMatrix matrix_;
};

/// s x r block matrix psi with rho = psi psi^dagger.
///
/// The column-stacked form c puts the second column under the first
/// one and so on (column-major order), which is what the realified
/// information-matrix code expects.
class PurifiedState {
public:
    /// Throws InvalidArgument unless Tr(psi psi^dagger) = 1 within 1e-12.
    explicit PurifiedState(CMatrix psi);

    static PurifiedState from_pure(const PureState& state);
    static PurifiedState from_column_stacked(const CVector& c, Eigen::Index dim,
                                             Eigen::Index rank);

    [[nodiscard]] const CMatrix& psi() const noexcept { return psi_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return psi_.rows(); }
    [[nodiscard]] Eigen::Index rank() const noexcept { return psi_.cols(); }
    [[nodiscard]] CVector column_stacked() const;

private:
    CMatrix psi_;
};

[[nodiscard]] PureState bloch_to_state(const BlochAngles& angles);

/// |<a|b>|^2. Throws InvalidArgument on dimension mismatch.
[[nodiscard]] double fidelity_pure(const PureState& a, const PureState& b);

/// Eigen-decomposition based purification. Columns are sqrt(l_i) v_i in
/// descending eigenvalue order with the largest-magnitude entry of every
/// eigenvector made real positive. Throws InvalidArgument if rank is
/// smaller than the numerical rank of rho (eigenvalues above 1e-12) or
/// larger than its dimension.
[[nodiscard]] PurifiedState purify(const DensityMatrix& rho, Eigen::Index rank);

[[nodiscard]] DensityMatrix density_of(const PurifiedState& state);

/// Leading eigenvector of psi psi^dagger as a pure state.
[[nodiscard]] PureState dominant_state(const PurifiedState& state);

/// Bloch vector (<sx>, <sy>, <sz>) of a 2x2 Hermitian operator.
[[nodiscard]] Eigen::Vector3d bloch_vector(const CMatrix& op);

/// Entrywise maximum of |a - b|.
[[nodiscard]] double max_abs_diff(const CMatrix& a, const CMatrix& b);

}  // namespace fuzzytomo
