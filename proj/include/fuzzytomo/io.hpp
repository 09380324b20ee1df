#pragma once

// JSON, CSV and SVG encodings shared by the command-line tool.
//
// Conventions (schema fuzzytomo/1): complex numbers are [re, im] pairs,
// matrices are row-major arrays of rows, angles are radians and every
// wavelength or thickness is in micrometers (keys end in _um).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fuzzytomo/measurement.hpp"
#include "fuzzytomo/montecarlo.hpp"
#include "fuzzytomo/protocol.hpp"
#include "fuzzytomo/tomography.hpp"

namespace fuzzytomo::io {

using nlohmann::json;

inline constexpr std::string_view kSchemaVersion = "fuzzytomo/1";
inline constexpr std::string_view kCountsSchema = "fuzzytomo.counts/1";

[[nodiscard]] json complex_to_json(Complex z);
[[nodiscard]] Complex complex_from_json(const json& j);
[[nodiscard]] json matrix_to_json(const CMatrix& m);
[[nodiscard]] CMatrix matrix_from_json(const json& j);
[[nodiscard]] json vector_to_json(const CVector& v);
[[nodiscard]] CVector vector_from_json(const json& j);

[[nodiscard]] json plates_to_json(const PlatePair& plates);
[[nodiscard]] PlatePair plates_from_json(const json& j);
[[nodiscard]] json protocol_to_json(const Protocol& protocol);
[[nodiscard]] json model_to_json(const MeasurementModel& model);

/// Counts file consumed by `reconstruct`:
///   { "schema": "fuzzytomo.counts/1", "model": "fuzzy"|"ideal",
///     "plates": {...}, "spectrum": {"lambda0_um", "bandwidth_um", "samples"},
///     "configs": [{"alpha", "beta", "n", "k0", "k1"}, ...],
///     "true_state": [[re, im], [re, im]]   (optional) }
struct CountsFile {
    ModelKind model = ModelKind::fuzzy;
    PlatePair plates;
    double lambda0_um = 0.65;
    double bandwidth_um = 0.0;
    int spectral_samples = kDefaultSpectralSamples;
    std::vector<PlateConfig> configs;
    std::vector<double> trials;
    std::vector<double> k0;
    std::vector<double> k1;
    std::optional<CVector> true_state;

    /// Builds the measurement model and record described by the file.
    [[nodiscard]] ExperimentRecord to_record() const;
};

[[nodiscard]] json counts_to_json(const CountsFile& file);
/// Throws InvalidArgument naming the offending field.
[[nodiscard]] CountsFile counts_from_json(const json& j);

/// FNV-1a 64 of the compact dump, printed as 16 hex digits.
[[nodiscard]] std::string config_hash(const json& config);

/// `# key=value` lines prepended to every CSV output.
[[nodiscard]] std::string csv_metadata(const json& config, std::uint64_t seed);
[[nodiscard]] json metadata_json(const json& config, std::uint64_t seed);

[[nodiscard]] std::string loss_map_csv(const LossMap& map);
[[nodiscard]] std::string sweep_csv(const std::vector<SweepRow>& rows);
[[nodiscard]] std::string experiments_csv(const ComparisonSummary& summary);
[[nodiscard]] json summary_to_json(const ComparisonSummary& summary);
[[nodiscard]] json loss_map_to_json(const LossMap& map);

/// Equirectangular theta-phi heatmap, color scale fixed at L in [1, 2].
[[nodiscard]] std::string loss_map_svg(const LossMap& map, std::string_view title);

/// Writes through a sibling temp file and rename.
void write_atomic(const std::filesystem::path& path, std::string_view content);

[[nodiscard]] std::string format_double(double x);

}  // namespace fuzzytomo::io
