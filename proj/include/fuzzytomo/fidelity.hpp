#pragma once

// Information-matrix fidelity theory: realification, the complete
// information matrix H, its loss spectrum d_k = 1/(2 h_k), the loss function
// L = n_tot <1 - F> and the generalized chi-squared law of 1 - F.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fuzzytomo/measurement.hpp"
#include "fuzzytomo/quantum_core.hpp"

namespace fuzzytomo {

/// (Re c; Im c) of the column-stacked purification.
[[nodiscard]] RVector realify_state(const PurifiedState& state);

/// r-fold block-diagonal copy of Lambda mapped to [[Re, -Im], [Im, Re]].
[[nodiscard]] RMatrix realify_operator(const CMatrix& op, Eigen::Index rank);

inline constexpr double kVanishingProbability = 1e-14;

/// H = 2 sum_j n_j (L_j v)(L_j v)^T / p_j in the realified space. Throws
/// DegenerateModel when an operator with n_j > 0 has p_j < 1e-14.
[[nodiscard]] RMatrix information_matrix(const PurifiedState& state, const MeasurementModel& model,
                                         std::span<const double> trials_per_operator);

/// n_tot split equally over configurations, as real numbers (theory does
/// not need integral trials).
[[nodiscard]] std::vector<double> equal_trials_per_operator(const MeasurementModel& model, double n_tot);

struct LossSpectrum {
    std::vector<double> h;  ///< informative eigenvalues, descending
    std::vector<double> d;  ///< 1 / (2 h_k)
    double normalization_eigenvalue = 0.0;
    std::vector<double> null_eigenvalues;
    double n_tot = 0.0;

    [[nodiscard]] double mean_infidelity() const;
    [[nodiscard]] double infidelity_variance() const;
};

inline constexpr double kEigenClassTolerance = 1e-6;

/// Splits the spectrum of H into the 2 n_tot eigenvalue, r^2 null
/// eigenvalues and (2s - r) r - 1 informative ones. Throws NumericalError
/// when that structure is absent.
[[nodiscard]] LossSpectrum loss_spectrum(const RMatrix& h, double n_tot, Eigen::Index dim, Eigen::Index rank);

struct LossResult {
    double loss = 0.0;
    LossSpectrum spectrum;
};

/// L = n_tot * sum_k d_k for a pure state (rank 1).
[[nodiscard]] LossResult loss_function(const PureState& state, const MeasurementModel& model,
                                       double n_tot = 1e4);

/// Samples of sum_k d_k xi_k^2 with independent standard normal xi_k.
[[nodiscard]] std::vector<double> infidelity_distribution(const LossSpectrum& spectrum, std::int64_t draws,
                                                          std::uint64_t seed);

}  // namespace fuzzytomo
