#pragma once

// Maximum-likelihood reconstruction through the quasilinear likelihood
// equation I psi = J(psi) psi, plus the chi-squared adequacy test.

#include <cstdint>
#include <memory>
#include <vector>

#include "fuzzytomo/measurement.hpp"
#include "fuzzytomo/quantum_core.hpp"

namespace fuzzytomo {

/// Observed counts k_j and trials n_j per operator, in the operator order of
/// the attached model (config-major: V then H). Counts are real so exact
/// expectations can be fed in directly.
struct ExperimentRecord {
    std::shared_ptr<const MeasurementModel> model;
    std::vector<double> counts;
    std::vector<double> trials;

    [[nodiscard]] double total_trials() const;

    /// Per config: both operators share n, k_V + k_H = n, 0 <= k <= n.
    void validate() const;
};

/// Builds a record from per-config (k_V, k_H) counts.
[[nodiscard]] ExperimentRecord make_record(std::shared_ptr<const MeasurementModel> model,
                                           const std::vector<std::pair<double, double>>& counts_per_config);

/// Record whose counts equal n_cfg * p_j(true state) exactly.
[[nodiscard]] ExperimentRecord expected_record(std::shared_ptr<const MeasurementModel> model,
                                               const PurifiedState& state,
                                               const std::vector<std::int64_t>& trials_per_config);

/// p_j = Tr(psi psi^dagger Lambda_j) for every operator of the model.
[[nodiscard]] std::vector<double> outcome_probabilities(const PurifiedState& state,
                                                        const MeasurementModel& model);

struct MleOptions {
    double damping = 0.5;
    double tolerance = 1e-10;
    std::int64_t max_iterations = 100000;
    double probability_floor = 1e-12;
    std::uint64_t seed = 1;
    /// Starting point; a seeded complex Gaussian draw when empty.
    std::shared_ptr<const PurifiedState> initial;
};

struct MleResult {
    PurifiedState psi_hat;
    std::int64_t iterations = 0;
    bool converged = false;
    double final_step_norm = 0.0;
    double log_likelihood = 0.0;
    /// Iterations where the full damped step lowered the likelihood and was halved.
    std::int64_t backtracks = 0;
    /// Restarts taken to leave saddle points of the likelihood.
    int escapes = 0;
};

/// Damped fixed-point iteration psi <- (1-mu) psi + mu J(psi) psi / n_tot with
/// unit-trace renormalization. A converged point where J/n_tot still has an
/// eigenvalue above one outside span(psi) is a saddle; the iteration restarts
/// from a start tilted toward that eigenvector and keeps the result if the
/// likelihood rises. Throws DegenerateModel if an outcome with k_j > 0 ends
/// with p_j below the probability floor.
[[nodiscard]] MleResult mle_reconstruct(const ExperimentRecord& record, Eigen::Index rank,
                                        const MleOptions& options = {});

[[nodiscard]] double log_likelihood(const ExperimentRecord& record, const std::vector<double>& probabilities);

struct ChiSquaredReport {
    double chi2 = 0.0;
    int nu = 0;
    double p_value = 1.0;
    int nu_p = 0;
    int nu_norm = 0;
    int excluded_terms = 0;
};

/// Pearson chi^2 with nu = l s - ((2s - r) r - 1) - l. Throws DegenerateModel
/// when nu <= 0 or a zero-expectation cell carries counts.
[[nodiscard]] ChiSquaredReport chi_squared_test(const PurifiedState& psi_hat, const ExperimentRecord& record);

}  // namespace fuzzytomo
