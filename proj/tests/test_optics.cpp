#include <doctest.h>

#include <cmath>
#include <random>

#include "fuzzytomo/errors.hpp"
#include "fuzzytomo/optics.hpp"
#include "test_support.hpp"

using namespace fuzzytomo;
using fuzzytomo::testing::kPi;
using fuzzytomo::testing::pauli;

namespace {

// Rotated retarder R(alpha) diag(e^{-i d}, e^{i d}) R(alpha)^T, built
// without the closed form used by the library.
Jones rotated_retarder(double delta, double alpha) {
    Eigen::Matrix2d r;
    r << std::cos(alpha), -std::sin(alpha), std::sin(alpha), std::cos(alpha);
    Jones d = Jones::Zero();
    d(0, 0) = std::exp(Complex(0.0, -delta));
    d(1, 1) = std::exp(Complex(0.0, delta));
    return r.cast<Complex>() * d * r.transpose().cast<Complex>();
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis, double angle) {
    Eigen::Matrix3d k;
    k << 0, -axis(2), axis(1), axis(2), 0, -axis(0), -axis(1), axis(0), 0;
    return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1 - std::cos(angle)) * k * k;
}

}  // namespace

TEST_CASE("quartz dispersion") {
    const auto n = quartz_indices(0.65);
    CHECK(n.n_e > n.n_o);
    CHECK(n.birefringence() == doctest::Approx(0.0090256).epsilon(1e-4));
    CHECK(quartz_indices(0.5).birefringence() > quartz_indices(0.9).birefringence());
    CHECK_THROWS_AS(quartz_indices(0.39), InvalidArgument);
    CHECK_THROWS_AS(quartz_indices(1.01), InvalidArgument);
    CHECK_NOTHROW(quartz_indices(0.4));
    CHECK_NOTHROW(quartz_indices(1.0));
}

TEST_CASE("design thicknesses") {
    CHECK(std::abs(thickness_for_order(PlateKind::half, 10, 0.65) - 756.0) <= 1.0);
    CHECK(std::abs(thickness_for_order(PlateKind::quarter, 10, 0.65) - 738.0) <= 1.0);
    // (1/4) * 0.65 / 0.0090256
    CHECK(thickness_for_order(PlateKind::quarter, 0, 0.65) == doctest::Approx(18.004).epsilon(1e-3));
    CHECK_THROWS_AS(thickness_for_order(PlateKind::half, -1, 0.65), InvalidArgument);
    CHECK_THROWS_AS(WavePlateSpec(PlateKind::half, 0.0), InvalidArgument);
}

TEST_CASE("retardance of the rounded plates") {
    const WavePlateSpec hwp(PlateKind::half, 756.0);
    const WavePlateSpec qwp(PlateKind::quarter, 738.0);
    CHECK(optical_thickness(hwp, 0.65) / kPi == doctest::Approx(10.5).epsilon(0.01));
    CHECK(optical_thickness(qwp, 0.65) / kPi == doctest::Approx(10.25).epsilon(0.01));
    const WavePlateSpec doubled(PlateKind::half, 1512.0);
    CHECK(optical_thickness(doubled, 0.65) == 2.0 * optical_thickness(hwp, 0.65));
}

TEST_CASE("thickness and retardance round trip") {
    for (int order = 0; order <= 20; order += 5) {
        for (double l0 : {0.45, 0.65, 0.8}) {
            const double h = thickness_for_order(PlateKind::half, order, l0);
            const double q = thickness_for_order(PlateKind::quarter, order, l0);
            const double dh = optical_thickness(WavePlateSpec(PlateKind::half, h), l0);
            const double dq = optical_thickness(WavePlateSpec(PlateKind::quarter, q), l0);
            CHECK(std::abs(dh / ((order + 0.5) * kPi) - 1.0) < 1e-9);
            CHECK(std::abs(dq / ((order + 0.25) * kPi) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("waveplate unitary special cases") {
    const Complex i(0.0, 1.0);
    for (double a : {0.0, 0.3, 1.7}) {
        CHECK((waveplate_unitary(kPi, a) + Jones::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    }
    Jones expected;
    expected << -i, 0, 0, i;
    CHECK((waveplate_unitary(kPi / 2, 0.0) - expected).cwiseAbs().maxCoeff() < 1e-15);
    expected << 0, -i, -i, 0;
    CHECK((waveplate_unitary(kPi / 2, kPi / 4) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("waveplate unitary matches a rotated retarder") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double d = u(rng);
        const double a = u(rng);
        const Jones w = waveplate_unitary(d, a);
        CHECK((w - rotated_retarder(d, a)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((w * w.adjoint() - Jones::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(std::abs(w.determinant()) - 1.0) < 1e-12);
    }
}

TEST_CASE("bloch rotation of a waveplate") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    for (int trial = 0; trial < 200; ++trial) {
        const double d = u(rng);
        const double a = u(rng);
        const Eigen::Matrix3d r = bloch_rotation(waveplate_unitary(d, a));
        const Eigen::Vector3d axis(std::sin(2 * a), 0.0, std::cos(2 * a));
        // U sigma_j U^dagger = sum_i R_ij sigma_i, so R acts on Bloch vectors of
        // states transformed by U; its rotation sense follows from
        // U = exp(-i d n.sigma).
        CHECK((r - rodrigues(axis, 2 * d)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("basis change at the design wavelength") {
    const PlatePair plates;
    const Jones u3 = basis_change_unitary(PlateConfig(kPi / 2, kPi / 2), plates, 0.65);
    CHECK(std::abs(u3(0, 1)) < 1e-12);
    CHECK(std::abs(u3(1, 0)) < 1e-12);

    const Jones u1 = basis_change_unitary(PlateConfig(5 * kPi / 8, kPi / 2), plates, 0.65);
    const Eigen::Vector2cd v = u1.adjoint() * Eigen::Vector2cd(1.0, 0.0);
    CHECK(std::abs(std::abs(v(0)) - M_SQRT1_2) < 1e-12);
    CHECK(std::abs(v(1) / v(0) - Complex(1.0, 0.0)) < 1e-12);

    // Order of the product: QWP after HWP.
    const double dh = optical_thickness(plates.hwp, 0.7);
    const double dq = optical_thickness(plates.qwp, 0.7);
    const PlateConfig c(0.4, 1.3);
    const Jones direct = rotated_retarder(dq, 1.3) * rotated_retarder(dh, 0.4);
    CHECK((basis_change_unitary(c, plates, 0.7) - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("basis change is unitary and continuous in wavelength") {
    const PlatePair plates;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ang(0.0, kPi);
    std::uniform_real_distribution<double> lam(0.4, 0.999);
    for (int trial = 0; trial < 200; ++trial) {
        const PlateConfig c(ang(rng), ang(rng));
        const double l = lam(rng);
        const Jones a = basis_change_unitary(c, plates, l);
        const Jones b = basis_change_unitary(c, plates, l + 1e-6);
        CHECK((a * a.adjoint() - Jones::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-3);
    }
}

TEST_CASE("plate configs are stored modulo pi") {
    const PlateConfig c(kPi + 0.25, -0.5);
    CHECK(c.alpha() == doctest::Approx(0.25));
    CHECK(c.beta() == doctest::Approx(kPi - 0.5));
    CHECK(std::abs(bloch_rotation(Jones::Identity()).trace() - 3.0) < 1e-15);
    (void)pauli;
}
