#include "fuzzytomo/measurement.hpp"

#include <cmath>
#include <limits>

#include "fuzzytomo/errors.hpp"

namespace fuzzytomo {
namespace {

CMatrix hermitian_part(const Jones& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

void SpectralGrid::validate() const {
    if (samples.empty()) throw InvalidArgument("SpectralGrid: no samples");
    double total = 0.0;
    const double half = 0.5 * bandwidth_um + 1e-12;
    for (const auto& s : samples) {
        if (s.weight < 0.0) throw InvalidArgument("SpectralGrid: negative weight");
        if (std::abs(s.lambda_um - lambda0_um) > half) throw InvalidArgument("SpectralGrid: node outside band");
        total += s.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("SpectralGrid: weights do not sum to 1");
}

SpectralGrid spectral_grid(double lambda0_um, double bandwidth_um, int n_samples) {
    if (n_samples < 1) throw InvalidArgument("spectral_grid: n_samples must be >= 1");
    if (!(bandwidth_um >= 0.0) || !std::isfinite(bandwidth_um)) {
        throw InvalidArgument("spectral_grid: bandwidth must be >= 0");
    }
    SpectralGrid grid;
    grid.lambda0_um = lambda0_um;
    grid.bandwidth_um = bandwidth_um;
    const int n = bandwidth_um == 0.0 ? 1 : n_samples;
    grid.samples.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double offset = bandwidth_um * (k + 0.5 - 0.5 * n) / n;
        grid.samples.push_back({lambda0_um + offset, 1.0 / n});
    }
    return grid;
}

std::string to_string(ModelKind kind) {
    return kind == ModelKind::fuzzy ? "fuzzy" : "ideal";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "fuzzy") return ModelKind::fuzzy;
    if (name == "ideal" || name == "ideal_projective" || name == "standard") return ModelKind::ideal_projective;
    throw InvalidArgument("unknown model kind '" + name + "' (expected fuzzy or ideal)");
}

OperatorPair fuzzy_operators(const PlateConfig& config, const WavePlateSpec& hwp, const WavePlateSpec& qwp,
                             const SpectralGrid& grid) {
    if (grid.samples.empty()) throw InvalidArgument("fuzzy_operators: empty spectral grid");
    Jones lambda0 = Jones::Zero();
    Jones lambda1 = Jones::Zero();
    for (const auto& sample : grid.samples) {
        const Jones u = basis_change_unitary(config, hwp, qwp, sample.lambda_um);
        // U^dagger P_j U = (row j of U)^dagger (row j of U).
        lambda0 += sample.weight * (u.row(0).adjoint() * u.row(0));
        lambda1 += sample.weight * (u.row(1).adjoint() * u.row(1));
    }
    return {hermitian_part(lambda0), hermitian_part(lambda1)};
}

OperatorPair ideal_projectors(const PlateConfig& config, const WavePlateSpec& hwp, const WavePlateSpec& qwp,
                              double lambda0_um) {
    const Jones u = basis_change_unitary(config, hwp, qwp, lambda0_um);
    return {hermitian_part(u.row(0).adjoint() * u.row(0)), hermitian_part(u.row(1).adjoint() * u.row(1))};
}

MeasurementModel build_model(ModelKind kind, const std::vector<PlateConfig>& configs, const PlatePair& plates,
                             const SpectralGrid& grid) {
    if (configs.empty()) throw InvalidArgument("build_model: no configurations");
    MeasurementModel model;
    model.kind = kind;
    model.configs = configs;
    model.plates = plates;
    model.grid = kind == ModelKind::fuzzy ? grid : spectral_grid(grid.lambda0_um, 0.0, 1);
    model.pairs.reserve(configs.size());
    for (const auto& cfg : configs) {
        model.pairs.push_back(kind == ModelKind::fuzzy
                                  ? fuzzy_operators(cfg, plates.hwp, plates.qwp, model.grid)
                                  : ideal_projectors(cfg, plates.hwp, plates.qwp, grid.lambda0_um));
    }
    return model;
}

MeasurementMatrix measurement_matrix(const MeasurementModel& model) {
    if (model.pairs.empty()) throw InvalidArgument("measurement_matrix: model has no configurations");
    const Eigen::Index s = model.dim();
    const auto rows = static_cast<Eigen::Index>(model.operator_count());
    MeasurementMatrix out;
    out.b.resize(rows, s * s);
    for (Eigen::Index j = 0; j < rows; ++j) {
        const CMatrix& op = model.op(static_cast<std::size_t>(j));
        // Second matrix row goes to the right of the first.
        for (Eigen::Index r = 0; r < s; ++r) {
            for (Eigen::Index c = 0; c < s; ++c) out.b(j, r * s + c) = op(r, c);
        }
    }
    Eigen::JacobiSVD<CMatrix> svd(out.b);
    const auto& sv = svd.singularValues();
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    if (!(smax > 0.0)) throw DegenerateModel("measurement_matrix: all singular values vanish");
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > kSingularValueThreshold * smax) ++out.nonzero_singular_values;
    }
    out.condition_number = out.informationally_complete() ? smax / sv[sv.size() - 1]
                                                          : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace fuzzytomo
