#include "fuzzytomo/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fuzzytomo/errors.hpp"
#include "fuzzytomo/rng.hpp"

namespace fuzzytomo {

RVector realify_state(const PurifiedState& state) {
    const CVector c = state.column_stacked();
    RVector v(2 * c.size());
    v.head(c.size()) = c.real();
    v.tail(c.size()) = c.imag();
    return v;
}

RMatrix realify_operator(const CMatrix& op, Eigen::Index rank) {
    if (op.rows() != op.cols()) throw InvalidArgument("realify_operator: operator must be square");
    if (rank < 1) throw InvalidArgument("realify_operator: rank must be >= 1");
    const Eigen::Index s = op.rows();
    const Eigen::Index n = s * rank;
    CMatrix block = CMatrix::Zero(n, n);
    for (Eigen::Index b = 0; b < rank; ++b) block.block(b * s, b * s, s, s) = op;
    RMatrix out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = block.real();
    out.topRightCorner(n, n) = -block.imag();
    out.bottomLeftCorner(n, n) = block.imag();
    out.bottomRightCorner(n, n) = block.real();
    return out;
}

RMatrix information_matrix(const PurifiedState& state, const MeasurementModel& model,
                           std::span<const double> trials_per_operator) {
    if (state.dim() != model.dim()) throw InvalidArgument("information_matrix: dimension mismatch");
    if (trials_per_operator.size() != model.operator_count()) {
        throw InvalidArgument("information_matrix: one trial count per operator required");
    }
    const RVector v = realify_state(state);
    RMatrix h = RMatrix::Zero(v.size(), v.size());
    for (std::size_t j = 0; j < model.operator_count(); ++j) {
        const double n = trials_per_operator[j];
        if (n == 0.0) continue;
        const RVector lv = realify_operator(model.op(j), state.rank()) * v;
        const double p = v.dot(lv);
        if (p < kVanishingProbability) {
            throw DegenerateModel("information_matrix: operator " + std::to_string(j) +
                                  " has vanishing probability " + std::to_string(p));
        }
        h.noalias() += (2.0 * n / p) * lv * lv.transpose();
    }
    return 0.5 * (h + h.transpose());
}

std::vector<double> equal_trials_per_operator(const MeasurementModel& model, double n_tot) {
    if (!(n_tot > 0.0)) throw InvalidArgument("equal_trials_per_operator: n_tot must be positive");
    return std::vector<double>(model.operator_count(), n_tot / static_cast<double>(model.config_count()));
}

double LossSpectrum::mean_infidelity() const { return std::accumulate(d.begin(), d.end(), 0.0); }

double LossSpectrum::infidelity_variance() const {
    return 2.0 * std::inner_product(d.begin(), d.end(), d.begin(), 0.0);
}

LossSpectrum loss_spectrum(const RMatrix& h, double n_tot, Eigen::Index dim, Eigen::Index rank) {
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(h, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("loss_spectrum: eigendecomposition failed");
    std::vector<double> ev(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), std::greater<>());

    const double norm_value = 2.0 * n_tot;
    const auto r2 = static_cast<std::size_t>(rank * rank);
    const auto nu_p = static_cast<std::size_t>((2 * dim - rank) * rank - 1);
    if (ev.size() != 1 + r2 + nu_p) throw NumericalError("loss_spectrum: matrix size does not match dim/rank");

    // The normalization direction is the eigenvalue closest to 2 n_tot.
    std::size_t norm_index = 0;
    for (std::size_t i = 1; i < ev.size(); ++i) {
        if (std::abs(ev[i] - norm_value) < std::abs(ev[norm_index] - norm_value)) norm_index = i;
    }
    if (std::abs(ev[norm_index] - norm_value) > kEigenClassTolerance * norm_value) {
        throw NumericalError("loss_spectrum: no eigenvalue equals 2 n_tot");
    }

    LossSpectrum out;
    out.n_tot = n_tot;
    out.normalization_eigenvalue = ev[norm_index];
    std::vector<double> rest;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (i != norm_index) rest.push_back(ev[i]);
    }
    // rest is descending: the last r^2 entries are the gauge null space.
    const double zero_threshold = kEigenClassTolerance * norm_value;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        const bool null_slot = i >= nu_p;
        if (null_slot) {
            if (std::abs(rest[i]) >= zero_threshold) {
                throw NumericalError("loss_spectrum: expected " + std::to_string(r2) + " null eigenvalues");
            }
            out.null_eigenvalues.push_back(rest[i]);
        } else {
            if (rest[i] < zero_threshold) {
                throw NumericalError("loss_spectrum: informative eigenvalue below threshold (incomplete protocol)");
            }
            out.h.push_back(rest[i]);
            out.d.push_back(1.0 / (2.0 * rest[i]));
        }
    }
    return out;
}

LossResult loss_function(const PureState& state, const MeasurementModel& model, double n_tot) {
    const auto psi = PurifiedState::from_pure(state);
    const auto trials = equal_trials_per_operator(model, n_tot);
    const RMatrix h = information_matrix(psi, model, trials);
    LossResult out;
    out.spectrum = loss_spectrum(h, n_tot, state.dim(), 1);
    out.loss = n_tot * out.spectrum.mean_infidelity();
    return out;
}

std::vector<double> infidelity_distribution(const LossSpectrum& spectrum, std::int64_t draws, std::uint64_t seed) {
    if (draws < 1) throw InvalidArgument("infidelity_distribution: draws must be >= 1");
    auto gen = substream_engine(seed, 0x696e66ULL, 0);
    std::normal_distribution<double> normal;
    std::vector<double> out(static_cast<std::size_t>(draws));
    for (auto& x : out) {
        double acc = 0.0;
        for (double dk : spectrum.d) {
            const double xi = normal(gen);
            acc += dk * xi * xi;
        }
        x = acc;
    }
    return out;
}

}  // namespace fuzzytomo
