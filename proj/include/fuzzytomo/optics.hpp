#pragma once

// Birefringent dispersion and wave-plate Jones matrices.

#include <Eigen/Dense>

#include "fuzzytomo/quantum_core.hpp"

namespace fuzzytomo {

using Jones = Eigen::Matrix2cd;

enum class PlateKind { half, quarter };
enum class Crystal { quartz };

/// Wavelength window (micrometers) in which the quartz dispersion fit is used.
inline constexpr double kQuartzMinWavelengthUm = 0.4;
inline constexpr double kQuartzMaxWavelengthUm = 1.0;

struct RefractiveIndices {
    double n_o = 0.0;
    double n_e = 0.0;

    [[nodiscard]] double birefringence() const noexcept { return n_e > n_o ? n_e - n_o : n_o - n_e; }
};

class WavePlateSpec {
public:
    /// Throws InvalidArgument for a non-positive thickness.
    WavePlateSpec(PlateKind kind, double thickness_um, Crystal crystal = Crystal::quartz);

    [[nodiscard]] PlateKind kind() const noexcept { return kind_; }
    [[nodiscard]] double thickness_um() const noexcept { return thickness_um_; }
    [[nodiscard]] Crystal crystal() const noexcept { return crystal_; }

private:
    PlateKind kind_;
    double thickness_um_;
    Crystal crystal_;
};

/// HWP and QWP fast-axis angles to the vertical, stored modulo pi.
class PlateConfig {
public:
    PlateConfig() = default;
    PlateConfig(double alpha, double beta);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }

    friend bool operator==(const PlateConfig&, const PlateConfig&) = default;

private:
    double alpha_ = 0.0;
    double beta_ = 0.0;
};


/// Ghosh (1999) Sellmeier fit for crystalline quartz. Throws InvalidArgument
/// outside [0.4, 1.0] um.
[[nodiscard]] RefractiveIndices quartz_indices(double lambda_um);
[[nodiscard]] RefractiveIndices crystal_indices(Crystal crystal, double lambda_um);

/// Retardance pi h |n_o - n_e| / lambda in radians.
[[nodiscard]] double optical_thickness(const WavePlateSpec& plate, double lambda_um);

/// Jones matrix of a plate with retardance delta and fast axis at alpha:
///   [[cos d - i sin d cos 2a, -i sin d sin 2a],
///    [-i sin d sin 2a,        cos d + i sin d cos 2a]]
[[nodiscard]] Jones waveplate_unitary(double delta, double alpha);

/// U = U_QWP(beta) * U_HWP(alpha) at the given wavelength; the photon
/// crosses the HWP first.
[[nodiscard]] Jones basis_change_unitary(const PlateConfig& config, const WavePlateSpec& hwp,
                                         const WavePlateSpec& qwp, double lambda_um);

/// Thickness giving retardance (order + 1/2) pi (half) or (order + 1/4) pi
/// (quarter) at lambda0.
[[nodiscard]] double thickness_for_order(PlateKind kind, int order, double lambda0_um,
                                         Crystal crystal = Crystal::quartz);

inline constexpr int kReferenceOrder = 10;
inline constexpr double kReferenceLambda0Um = 0.65;

/// The HWP + QWP pair in front of the polarizing beam splitter. Defaults to
/// quartz plates of order 10 designed for 650 nm.
struct PlatePair {
    WavePlateSpec hwp{PlateKind::half, thickness_for_order(PlateKind::half, kReferenceOrder, kReferenceLambda0Um)};
    WavePlateSpec qwp{PlateKind::quarter,
                      thickness_for_order(PlateKind::quarter, kReferenceOrder, kReferenceLambda0Um)};
};

/// HWP and QWP of the same order designed for lambda0.
[[nodiscard]] PlatePair design_plates(int order, double lambda0_um, Crystal crystal = Crystal::quartz);

[[nodiscard]] Jones basis_change_unitary(const PlateConfig& config, const PlatePair& plates,
                                         double lambda_um);

/// 3x3 rotation acting on Bloch vectors: R_ij = Tr(sigma_i U sigma_j U^dagger) / 2.
[[nodiscard]] Eigen::Matrix3d bloch_rotation(const Jones& u);

}  // namespace fuzzytomo
