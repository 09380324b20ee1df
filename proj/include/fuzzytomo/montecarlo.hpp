#pragma once

// Loss maps, bandwidth sweeps and Monte Carlo model comparison.
//
// The grid evaluation and the experiment loop each come in two flavours:
// an OpenMP kernel and a plain serial loop over the same per-item function.
// The serial path is the reference the parallel one is tested against, and
// both produce bit-identical results.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fuzzytomo/fidelity.hpp"
#include "fuzzytomo/measurement.hpp"
#include "fuzzytomo/protocol.hpp"
#include "fuzzytomo/stats.hpp"
#include "fuzzytomo/tomography.hpp"

namespace fuzzytomo {

enum class Execution { serial, parallel };

// ---------------------------------------------------------------------------
// Loss maps

struct GridSpec {
    int n_theta = 50;
    int n_phi = 100;
    int refine_rounds = 3;
    double reference_n_tot = 1e4;
};

struct Extremum {
    double theta = 0.0;
    double phi = 0.0;
    double loss = 0.0;
};

struct LossMap {
    std::vector<double> thetas;
    std::vector<double> phis;
    std::vector<double> loss;  ///< theta-major; NaN where the model is degenerate
    int degenerate_points = 0;
    Extremum grid_min;
    Extremum grid_max;
    Extremum min;  ///< after golden-section refinement
    Extremum max;

    [[nodiscard]] double at(std::size_t i_theta, std::size_t i_phi) const {
        return loss[i_theta * phis.size() + i_phi];
    }
};

/// Below this outcome probability the 1/p_j terms of H are dominated by
/// roundoff in p_j (absolute error ~1e-17), so the point is treated as
/// degenerate.
inline constexpr double kReliableProbability = 1e-9;

/// L(theta, phi), or nullopt when some outcome probability falls below
/// kReliableProbability (at or next to eigenstates of ideal projectors).
[[nodiscard]] std::optional<double> loss_at(double theta, double phi, const MeasurementModel& model,
                                            double n_tot = 1e4);

/// Uniform (theta, phi) grid with endpoints, coarse extrema, then alternating
/// golden-section searches on theta and phi around each extremum.
[[nodiscard]] LossMap loss_map(const MeasurementModel& model, const GridSpec& spec = {},
                               Execution exec = Execution::parallel);

struct SweepRow {
    double bandwidth_um = 0.0;
    double loss_min = 0.0;
    double loss_max = 0.0;
    double condition_number = 0.0;
    Extremum argmin;
    Extremum argmax;
};

/// Fuzzy model per bandwidth: refined loss extrema and condition number.
[[nodiscard]] std::vector<SweepRow> bandwidth_sweep(const std::vector<PlateConfig>& configs,
                                                    const PlatePair& plates, double lambda0_um,
                                                    const std::vector<double>& bandwidths,
                                                    const GridSpec& spec = {},
                                                    int spectral_samples = kDefaultSpectralSamples,
                                                    Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Monte Carlo

/// Per config: k_V ~ Binomial(n_cfg, p_V), k_H = n_cfg - k_V, drawn from the
/// substream (seed, stream, config).
[[nodiscard]] ExperimentRecord simulate_counts(const PureState& true_state,
                                               std::shared_ptr<const MeasurementModel> true_model,
                                               const std::vector<std::int64_t>& trials_per_config,
                                               std::uint64_t seed, std::uint64_t stream = 0);

struct SimulationPlan {
    PureState true_state;
    Protocol protocol;
    PlatePair plates;
    double lambda0_um = 0.65;
    double true_bandwidth_um = 0.01;
    int spectral_samples = kDefaultSpectralSamples;
    std::vector<ModelKind> reconstruction_models{ModelKind::fuzzy, ModelKind::ideal_projective};
    std::vector<std::int64_t> n_tot_values{1000};
    std::int64_t n_experiments = 1000;
    std::uint64_t seed = 1;
    double damping = 0.5;
    double tolerance = 1e-10;
    std::int64_t max_iterations = 100000;

    void validate() const;
};

struct ExperimentRow {
    std::int64_t n_tot = 0;
    std::int64_t experiment = 0;
    ModelKind model = ModelKind::fuzzy;
    double fidelity = 0.0;
    double chi2 = 0.0;
    int nu = 0;
    double p_value = 0.0;
    bool converged = false;
    std::int64_t iterations = 0;
    std::string error;

    [[nodiscard]] bool usable() const noexcept { return converged && error.empty(); }
};

struct TheoryReference {
    std::int64_t n_tot = 0;
    double loss = 0.0;
    double mean_infidelity = 0.0;
    double infidelity_variance = 0.0;
    std::vector<double> d;
    Histogram infidelity_histogram;  ///< of generalized chi-squared draws
    std::int64_t draws = 0;
};

struct ModelSummary {
    ModelKind model = ModelKind::fuzzy;
    std::int64_t n_tot = 0;
    std::int64_t n_experiments = 0;
    std::int64_t n_excluded = 0;  ///< non-converged or failed reconstructions
    double fidelity_q25 = 0.0;
    double fidelity_q50 = 0.0;
    double fidelity_q75 = 0.0;
    double mean_infidelity = 0.0;
    double mean_chi2 = 0.0;
    int nu = 0;
    KsResult chi2_ks;
    Histogram infidelity_histogram;
    Histogram chi2_histogram;
};

struct ComparisonSummary {
    std::vector<ExperimentRow> rows;   ///< ordered by (n_tot, experiment, model)
    std::vector<ModelSummary> models;  ///< ordered by (n_tot, model)
    std::vector<TheoryReference> theory;

    [[nodiscard]] const ModelSummary& summary(ModelKind kind, std::int64_t n_tot) const;
    [[nodiscard]] const TheoryReference& theory_for(std::int64_t n_tot) const;
};

inline constexpr int kHistogramBins = 50;
inline constexpr double kChi2HistogramMax = 10.0;
inline constexpr std::int64_t kTheoryDraws = 100000;

[[nodiscard]] ComparisonSummary run_comparison(const SimulationPlan& plan, Execution exec = Execution::parallel);

}  // namespace fuzzytomo
