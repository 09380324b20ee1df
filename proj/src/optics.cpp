#include "fuzzytomo/optics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fuzzytomo/errors.hpp"

namespace fuzzytomo {
namespace {

struct SellmeierTerms {
    double a;
    double b1;
    double c1;
    double b2;
    double c2;

    [[nodiscard]] double index(double lambda_um) const {
        const double l2 = lambda_um * lambda_um;
        return std::sqrt(a + b1 * l2 / (l2 - c1) + b2 * l2 / (l2 - c2));
    }
};

// Ghosh, Opt. Commun. 163 (1999), room-temperature quartz fit.
constexpr SellmeierTerms kQuartzOrdinary{1.28604141, 1.07044083, 0.0100585997, 1.10202242, 100.0};
constexpr SellmeierTerms kQuartzExtraordinary{1.28851804, 1.09509924, 0.0102101864, 1.15662475, 100.0};

double wrap_pi(double x) {
    double r = std::fmod(x, std::numbers::pi);
    if (r < 0.0) r += std::numbers::pi;
    if (r >= std::numbers::pi) r = 0.0;
    return r;
}

}  // namespace

WavePlateSpec::WavePlateSpec(PlateKind kind, double thickness_um, Crystal crystal)
    : kind_(kind), thickness_um_(thickness_um), crystal_(crystal) {
    if (!(thickness_um > 0.0) || !std::isfinite(thickness_um)) {
        throw InvalidArgument("WavePlateSpec: thickness must be positive, got " + std::to_string(thickness_um));
    }
}

PlateConfig::PlateConfig(double alpha, double beta) : alpha_(wrap_pi(alpha)), beta_(wrap_pi(beta)) {}

RefractiveIndices quartz_indices(double lambda_um) {
    if (!(lambda_um >= kQuartzMinWavelengthUm && lambda_um <= kQuartzMaxWavelengthUm)) {
        throw InvalidArgument("quartz_indices: wavelength " + std::to_string(lambda_um) +
                              " um outside the [0.4, 1.0] um fit window");
    }
    return {kQuartzOrdinary.index(lambda_um), kQuartzExtraordinary.index(lambda_um)};
}

RefractiveIndices crystal_indices(Crystal crystal, double lambda_um) {
    switch (crystal) {
        case Crystal::quartz:
            return quartz_indices(lambda_um);
    }
    throw InvalidArgument("crystal_indices: unknown crystal");
}

double optical_thickness(const WavePlateSpec& plate, double lambda_um) {
    const RefractiveIndices n = crystal_indices(plate.crystal(), lambda_um);
    return std::numbers::pi * plate.thickness_um() * n.birefringence() / lambda_um;
}

Jones waveplate_unitary(double delta, double alpha) {
    const Complex i(0.0, 1.0);
    const double c = std::cos(delta);
    const double s = std::sin(delta);
    const double c2 = std::cos(2.0 * alpha);
    const double s2 = std::sin(2.0 * alpha);
    Jones u;
    u << c - i * s * c2, -i * s * s2,
         -i * s * s2,    c + i * s * c2;
    return u;
}

Jones basis_change_unitary(const PlateConfig& config, const WavePlateSpec& hwp, const WavePlateSpec& qwp,
                           double lambda_um) {
    return waveplate_unitary(optical_thickness(qwp, lambda_um), config.beta()) *
           waveplate_unitary(optical_thickness(hwp, lambda_um), config.alpha());
}

Jones basis_change_unitary(const PlateConfig& config, const PlatePair& plates, double lambda_um) {
    return basis_change_unitary(config, plates.hwp, plates.qwp, lambda_um);
}

double thickness_for_order(PlateKind kind, int order, double lambda0_um, Crystal crystal) {
    if (order < 0) throw InvalidArgument("thickness_for_order: order must be >= 0");
    const double fraction = kind == PlateKind::half ? 0.5 : 0.25;
    const double target = (order + fraction) * std::numbers::pi;
    const double dn = crystal_indices(crystal, lambda0_um).birefringence();
    return target * lambda0_um / (std::numbers::pi * dn);
}

PlatePair design_plates(int order, double lambda0_um, Crystal crystal) {
    return {WavePlateSpec(PlateKind::half, thickness_for_order(PlateKind::half, order, lambda0_um, crystal), crystal),
            WavePlateSpec(PlateKind::quarter, thickness_for_order(PlateKind::quarter, order, lambda0_um, crystal),
                          crystal)};
}

Eigen::Matrix3d bloch_rotation(const Jones& u) {
    const Complex i(0.0, 1.0);
    Jones sigma[3];
    sigma[0] << 0, 1, 1, 0;
    sigma[1] << 0, -i, i, 0;
    sigma[2] << 1, 0, 0, -1;
    Eigen::Matrix3d r;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            r(a, b) = 0.5 * (sigma[a] * u * sigma[b] * u.adjoint()).trace().real();
        }
    }
    return r;
}

}  // namespace fuzzytomo
