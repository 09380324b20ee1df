#pragma once

// Ideal and chromatic-aberration-averaged (fuzzy) measurement operators,
// and the measurement matrix used to judge protocol completeness.

#include <cstddef>
#include <string>
#include <vector>

#include "fuzzytomo/optics.hpp"
#include "fuzzytomo/protocol.hpp"
#include "fuzzytomo/quantum_core.hpp"

namespace fuzzytomo {

inline constexpr int kDefaultSpectralSamples = 257;

struct SpectralSample {
    double lambda_um = 0.0;
    double weight = 0.0;
};

struct SpectralGrid {
    double lambda0_um = 0.65;
    double bandwidth_um = 0.0;
    std::vector<SpectralSample> samples;

    /// Weights sum to one, are nonnegative and every node lies inside the band.
    void validate() const;
};

/// Uniform spectrum on [lambda0 - bw/2, lambda0 + bw/2] sampled by the
/// midpoint rule. A zero bandwidth always yields the single node lambda0.
[[nodiscard]] SpectralGrid spectral_grid(double lambda0_um, double bandwidth_um,
                                         int n_samples = kDefaultSpectralSamples);

/// Two-outcome POVM of one plate configuration: first = V port, second = H port.
struct OperatorPair {
    CMatrix first;
    CMatrix second;
};

enum class ModelKind { ideal_projective, fuzzy };

[[nodiscard]] std::string to_string(ModelKind kind);
[[nodiscard]] ModelKind model_kind_from_string(const std::string& name);

struct MeasurementModel {
    ModelKind kind = ModelKind::fuzzy;
    std::vector<PlateConfig> configs;
    std::vector<OperatorPair> pairs;
    PlatePair plates;
    SpectralGrid grid;

    [[nodiscard]] std::size_t config_count() const noexcept { return pairs.size(); }
    [[nodiscard]] std::size_t operator_count() const noexcept { return 2 * pairs.size(); }
    [[nodiscard]] Eigen::Index dim() const { return pairs.empty() ? 0 : pairs.front().first.rows(); }

    /// Operator j in config-major order: config j/2, outcome j%2.
    [[nodiscard]] const CMatrix& op(std::size_t j) const {
        return j % 2 == 0 ? pairs[j / 2].first : pairs[j / 2].second;
    }
};

[[nodiscard]] OperatorPair fuzzy_operators(const PlateConfig& config, const WavePlateSpec& hwp,
                                           const WavePlateSpec& qwp, const SpectralGrid& grid);
[[nodiscard]] OperatorPair ideal_projectors(const PlateConfig& config, const WavePlateSpec& hwp,
                                            const WavePlateSpec& qwp, double lambda0_um);

/// Fuzzy model over grid, or the ideal projectors at grid.lambda0_um.
[[nodiscard]] MeasurementModel build_model(ModelKind kind, const std::vector<PlateConfig>& configs,
                                           const PlatePair& plates, const SpectralGrid& grid);

struct MeasurementMatrix {
    CMatrix b;
    std::vector<double> singular_values;
    double condition_number = 0.0;
    int nonzero_singular_values = 0;

    [[nodiscard]] bool informationally_complete() const noexcept {
        return nonzero_singular_values == static_cast<int>(b.cols());
    }
};

inline constexpr double kSingularValueThreshold = 1e-10;

/// Row-major flattening of every operator into one row of B (ls x s^2).
/// K = sigma_max / sigma_min, infinite when B is rank deficient. Throws
/// DegenerateModel if every singular value is below threshold.
[[nodiscard]] MeasurementMatrix measurement_matrix(const MeasurementModel& model);

}  // namespace fuzzytomo
