#include <doctest.h>

#include <cmath>
#include <random>

#include "fuzzytomo/errors.hpp"
#include "fuzzytomo/fidelity.hpp"
#include "fuzzytomo/stats.hpp"
#include "test_support.hpp"

using namespace fuzzytomo;
using fuzzytomo::testing::kPi;

namespace {

MeasurementModel model_for(const Protocol& p, double bw) {
    return build_model(ModelKind::fuzzy, p.configs, PlatePair{}, spectral_grid(0.65, bw));
}

// Classical Fisher information in the (theta, phi) chart with central
// differences, mapped to mean infidelity through the Fubini-Study metric
// 1 - F ~ (d theta^2 + sin^2 theta d phi^2) / 4.
double cramer_rao_infidelity(double theta, double phi, const MeasurementModel& m, double n_tot) {
    const double n_op = n_tot / static_cast<double>(m.config_count());
    auto probs = [&](double t, double f) {
        const CVector a = bloch_to_state({t, f, 0.0}).amplitudes();
        std::vector<double> p;
        for (std::size_t j = 0; j < m.operator_count(); ++j) p.push_back((a.adjoint() * m.op(j) * a)(0, 0).real());
        return p;
    };
    const double h = 1e-5;
    const auto p0 = probs(theta, phi);
    const auto tp = probs(theta + h, phi);
    const auto tm = probs(theta - h, phi);
    const auto fp = probs(theta, phi + h);
    const auto fm = probs(theta, phi - h);
    Eigen::Matrix2d fisher = Eigen::Matrix2d::Zero();
    for (std::size_t j = 0; j < p0.size(); ++j) {
        const Eigen::Vector2d g((tp[j] - tm[j]) / (2 * h), (fp[j] - fm[j]) / (2 * h));
        fisher += n_op * g * g.transpose() / p0[j];
    }
    Eigen::Matrix2d metric = Eigen::Matrix2d::Zero();
    metric(0, 0) = 0.25;
    metric(1, 1) = 0.25 * std::sin(theta) * std::sin(theta);
    return (metric * fisher.inverse()).trace();
}

}  // namespace

TEST_CASE("realified identity and sigma_y") {
    CHECK(realify_operator(CMatrix::Identity(2, 2), 1).isApprox(RMatrix::Identity(4, 4)));

    const RMatrix r = realify_operator(fuzzytomo::testing::pauli(1), 1);
    RMatrix expected(4, 4);
    // [[Re, -Im], [Im, Re]] with Im sigma_y = [[0, -1], [1, 0]].
    expected << 0, 0, 0, 1,
                0, 0, -1, 0,
                0, -1, 0, 0,
                1, 0, 0, 0;
    CHECK((r - expected).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()(1) == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()(2) == doctest::Approx(1.0));
    CHECK(es.eigenvalues()(3) == doctest::Approx(1.0));

    // <+i| sigma_y |+i> = 1
    const auto plus_i = PurifiedState::from_pure(bloch_to_state({kPi / 2, kPi / 2, 0.0}));
    const RVector v = realify_state(plus_i);
    CHECK(v.dot(r * v) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("realified quadratic form matches the complex one") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index s = 2 + trial % 2;
        const Eigen::Index r = 1 + trial % s;
        const CMatrix a = fuzzytomo::testing::random_complex(s, s, rng);
        const CMatrix op = a + a.adjoint();
        CMatrix psi = fuzzytomo::testing::random_complex(s, r, rng);
        psi /= psi.norm();
        const PurifiedState state(psi);
        const RVector v = realify_state(state);
        const double complex_value = (psi.adjoint() * op * psi).trace().real();
        CHECK(v.dot(realify_operator(op, r) * v) == doctest::Approx(complex_value).epsilon(1e-12));

        // The realified operator also reproduces the complex action on c.
        const CVector c = state.column_stacked();
        CMatrix block = CMatrix::Zero(s * r, s * r);
        for (Eigen::Index b = 0; b < r; ++b) block.block(b * s, b * s, s, s) = op;
        const CVector lc = block * c;
        const RVector lv = realify_operator(op, r) * v;
        CHECK((lv.head(s * r) - lc.real()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((lv.tail(s * r) - lc.imag()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("information matrix eigenstructure") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> bw_dist(0.0, 0.05);
    for (const auto& proto : {cube_protocol(), octahedron_protocol()}) {
        for (int trial = 0; trial < 200; ++trial) {
            const double bw = trial < 20 ? 0.0 : bw_dist(rng);
            const auto m = model_for(proto, bw);
            const auto state = fuzzytomo::testing::random_pure(2, rng);
            const double n_tot = 1e3 * (1 + trial % 7);
            const RMatrix h = information_matrix(PurifiedState::from_pure(state), m, equal_trials_per_operator(m, n_tot));
            Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
            const RVector ev = es.eigenvalues();
            int norm_count = 0;
            int null_count = 0;
            int informative = 0;
            for (Eigen::Index i = 0; i < ev.size(); ++i) {
                if (std::abs(ev(i) - 2 * n_tot) <= 1e-6 * 2 * n_tot) {
                    ++norm_count;
                } else if (std::abs(ev(i)) < 1e-6 * 2 * n_tot) {
                    ++null_count;
                } else {
                    ++informative;
                }
            }
            CHECK(norm_count == 1);
            CHECK(null_count == 1);
            CHECK(informative == 2);
            const auto spec = loss_spectrum(h, n_tot, 2, 1);
            CHECK(spec.h.size() == 2);
            CHECK(spec.null_eigenvalues.size() == 1);
        }
    }
}

TEST_CASE("eigenstates of ideal projectors are degenerate") {
    const auto m = model_for(cube_protocol(), 0.0);
    const auto zero = PurifiedState::from_pure(bloch_to_state({0.0, 0.0, 0.0}));
    CHECK_THROWS_AS(information_matrix(zero, m, equal_trials_per_operator(m, 3000)), DegenerateModel);
}

TEST_CASE("information matrix is linear in the trials") {
    const auto m = model_for(octahedron_protocol(), 0.01);
    const auto s = PurifiedState::from_pure(bloch_to_state({0.9111, 2.4504, 0.0}));
    const RMatrix h1 = information_matrix(s, m, equal_trials_per_operator(m, 1000));
    const RMatrix h2 = information_matrix(s, m, equal_trials_per_operator(m, 2000));
    CHECK((h2 - 2 * h1).cwiseAbs().maxCoeff() <= 1e-12 * h2.cwiseAbs().maxCoeff());
}

TEST_CASE("loss agrees with the Cramer-Rao bound in Bloch coordinates") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& proto : {cube_protocol(), octahedron_protocol()}) {
        for (double bw : {0.0, 0.005, 0.01, 0.02}) {
            const auto m = model_for(proto, bw);
            for (int trial = 0; trial < 20; ++trial) {
                const double theta = 0.2 + 2.7 * u(rng);
                const double phi = 2 * kPi * u(rng);
                const double n_tot = 1e4;
                const auto res = loss_function(bloch_to_state({theta, phi, 0.0}), m, n_tot);
                const double oracle = cramer_rao_infidelity(theta, phi, m, n_tot);
                CHECK(res.spectrum.mean_infidelity() == doctest::Approx(oracle).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("loss does not depend on the sample size") {
    std::mt19937_64 rng(53);
    const auto m = model_for(cube_protocol(), 0.01);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = fuzzytomo::testing::random_pure(2, rng);
        const double a = loss_function(s, m, 1e4).loss;
        const double b = loss_function(s, m, 1e5).loss;
        CHECK(std::abs(a - b) <= 1e-10 * a);
    }
}

TEST_CASE("loss values at reference states") {
    const auto plus = bloch_to_state({kPi / 2, 0.0, 0.0});
    const double l_plus = loss_function(plus, model_for(cube_protocol(), 0.01)).loss;
    CHECK(l_plus >= 1.216 - 0.02);
    CHECK(l_plus <= 1.857 + 0.02);

    CVector a(2);
    a << std::sqrt(0.999), Complex(0.0, std::sqrt(0.001));
    const auto near_pole = PureState::normalized(a);
    CHECK(loss_function(near_pole, model_for(cube_protocol(), 0.0)).loss == doctest::Approx(1.125).epsilon(1e-3));
    CHECK(std::abs(loss_function(near_pole, model_for(cube_protocol(), 0.01)).loss - 1.235) < 0.02);
}

TEST_CASE("generalized chi-squared draws") {
    const auto m = model_for(octahedron_protocol(), 0.01);
    const auto res = loss_function(bloch_to_state({0.9111, 2.4504, 0.0}), m, 1e4);
    const auto& spec = res.spectrum;
    const std::int64_t n = 100000;
    const auto draws = infidelity_distribution(spec, n, 99);
    const double mu = spec.mean_infidelity();
    const double var = spec.infidelity_variance();
    CHECK(std::abs(mean(draws) - mu) < 5 * std::sqrt(var / n));
    // Var of a sample variance: (mu4 - var^2) / n, with mu4 = 12 sum d^4 + 3 var^2.
    double d4 = 0.0;
    for (double d : spec.d) d4 += d * d * d * d;
    const double mu4 = 12 * d4 + 3 * var * var;
    CHECK(std::abs(variance(draws) - var) < 5 * std::sqrt((mu4 - var * var) / n));

    // A single coefficient gives d * chi^2(1).
    LossSpectrum one;
    one.d = {0.25};
    const auto single = infidelity_distribution(one, 20000, 3);
    const auto ks = ks_test(single, [](double x) { return chi_squared_cdf(x / 0.25, 1); });
    CHECK(ks.p_value > 0.01);
    CHECK_THROWS_AS(infidelity_distribution(one, 0, 3), InvalidArgument);
}
