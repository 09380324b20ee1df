#include "fuzzytomo/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fuzzytomo/errors.hpp"
#include "fuzzytomo/rng.hpp"

namespace fuzzytomo::io {
namespace {

const json& require(const json& j, const char* key, const std::string& context) {
    if (!j.is_object() || !j.contains(key)) throw InvalidArgument(context + ": missing field '" + key + "'");
    return j.at(key);
}

double require_number(const json& j, const char* key, const std::string& context) {
    const json& v = require(j, key, context);
    if (!v.is_number()) throw InvalidArgument(context + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::string kind_name(PlateKind k) { return k == PlateKind::half ? "half" : "quarter"; }

struct Rgb {
    double r, g, b;
};

// Piecewise-linear approximation of viridis.
Rgb color_for(double t) {
    static constexpr std::array<Rgb, 5> anchors{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * (anchors.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(t), anchors.size() - 2);
    const double f = t - static_cast<double>(i);
    const Rgb& a = anchors[i];
    const Rgb& b = anchors[i + 1];
    return {a.r + f * (b.r - a.r), a.g + f * (b.g - a.g), a.b + f * (b.b - a.b)};
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.12g", x);
    return buf.data();
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw InvalidArgument("complex numbers must be [re, im] pairs");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw InvalidArgument("matrix must be an array of rows");
    CMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != j[0].size()) throw InvalidArgument("matrix rows have different lengths");
        for (std::size_t c = 0; c < j[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = complex_from_json(j[r][c]);
        }
    }
    return m;
}

json vector_to_json(const CVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
    return out;
}

CVector vector_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw InvalidArgument("state must be a nonempty array of [re, im] pairs");
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
    return v;
}

json plates_to_json(const PlatePair& plates) {
    auto one = [](const WavePlateSpec& p) {
        return json{{"kind", kind_name(p.kind())}, {"thickness_um", p.thickness_um()}, {"crystal", "quartz"}};
    };
    return {{"hwp", one(plates.hwp)}, {"qwp", one(plates.qwp)}};
}

PlatePair plates_from_json(const json& j) {
    auto one = [](const json& p, PlateKind kind, const std::string& ctx) {
        if (p.contains("crystal") && p.at("crystal") != "quartz") {
            throw InvalidArgument(ctx + ": field 'crystal' must be \"quartz\"");
        }
        const double h = require_number(p, "thickness_um", ctx);
        if (!(h > 0.0)) throw InvalidArgument(ctx + ": field 'thickness_um' must be positive");
        return WavePlateSpec(kind, h);
    };
    return {one(require(j, "hwp", "plates"), PlateKind::half, "plates.hwp"),
            one(require(j, "qwp", "plates"), PlateKind::quarter, "plates.qwp")};
}

json protocol_to_json(const Protocol& protocol) {
    json configs = json::array();
    for (std::size_t i = 0; i < protocol.configs.size(); ++i) {
        json c{{"alpha", protocol.configs[i].alpha()}, {"beta", protocol.configs[i].beta()}};
        if (i < protocol.trials_per_config.size()) c["n"] = protocol.trials_per_config[i];
        configs.push_back(std::move(c));
    }
    return {{"label", protocol.label}, {"configs", std::move(configs)}};
}

json model_to_json(const MeasurementModel& model) {
    json configs = json::array();
    for (std::size_t i = 0; i < model.pairs.size(); ++i) {
        configs.push_back({{"alpha", model.configs[i].alpha()},
                           {"beta", model.configs[i].beta()},
                           {"lambda0", matrix_to_json(model.pairs[i].first)},
                           {"lambda1", matrix_to_json(model.pairs[i].second)}});
    }
    return {{"model", to_string(model.kind)},
            {"plates", plates_to_json(model.plates)},
            {"spectrum",
             {{"lambda0_um", model.grid.lambda0_um},
              {"bandwidth_um", model.grid.bandwidth_um},
              {"samples", model.grid.samples.size()}}},
            {"configs", std::move(configs)}};
}

ExperimentRecord CountsFile::to_record() const {
    auto model = std::make_shared<const MeasurementModel>(
        build_model(this->model, configs, plates, spectral_grid(lambda0_um, bandwidth_um, spectral_samples)));
    ExperimentRecord rec;
    rec.model = std::move(model);
    for (std::size_t c = 0; c < configs.size(); ++c) {
        rec.counts.push_back(k0[c]);
        rec.counts.push_back(k1[c]);
        rec.trials.push_back(trials[c]);
        rec.trials.push_back(trials[c]);
    }
    rec.validate();
    return rec;
}

json counts_to_json(const CountsFile& file) {
    json configs = json::array();
    for (std::size_t c = 0; c < file.configs.size(); ++c) {
        configs.push_back({{"alpha", file.configs[c].alpha()},
                           {"beta", file.configs[c].beta()},
                           {"n", file.trials[c]},
                           {"k0", file.k0[c]},
                           {"k1", file.k1[c]}});
    }
    json out{{"schema", kCountsSchema},
             {"model", to_string(file.model)},
             {"plates", plates_to_json(file.plates)},
             {"spectrum",
              {{"lambda0_um", file.lambda0_um},
               {"bandwidth_um", file.bandwidth_um},
               {"samples", file.spectral_samples}}},
             {"configs", std::move(configs)}};
    if (file.true_state) out["true_state"] = vector_to_json(*file.true_state);
    return out;
}

CountsFile counts_from_json(const json& j) {
    const std::string ctx = "counts";
    if (j.contains("schema") && j.at("schema") != kCountsSchema) {
        throw InvalidArgument("counts: field 'schema' must be \"" + std::string(kCountsSchema) + "\"");
    }
    CountsFile f;
    if (j.contains("model")) f.model = model_kind_from_string(j.at("model").get<std::string>());
    f.plates = plates_from_json(require(j, "plates", ctx));
    const json& spec = require(j, "spectrum", ctx);
    f.lambda0_um = require_number(spec, "lambda0_um", "counts.spectrum");
    f.bandwidth_um = require_number(spec, "bandwidth_um", "counts.spectrum");
    if (spec.contains("samples")) f.spectral_samples = spec.at("samples").get<int>();
    const json& configs = require(j, "configs", ctx);
    if (!configs.is_array() || configs.empty()) throw InvalidArgument("counts: field 'configs' must be a nonempty array");
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const std::string c = "counts.configs[" + std::to_string(i) + "]";
        f.configs.emplace_back(require_number(configs[i], "alpha", c), require_number(configs[i], "beta", c));
        f.trials.push_back(require_number(configs[i], "n", c));
        f.k0.push_back(require_number(configs[i], "k0", c));
        f.k1.push_back(require_number(configs[i], "k1", c));
    }
    if (j.contains("true_state")) f.true_state = vector_from_json(j.at("true_state"));
    return f;
}

std::string config_hash(const json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
    return buf.data();
}

json metadata_json(const json& config, std::uint64_t seed) {
    return {{"tool", "fuzzytomo"},
            {"version", FUZZYTOMO_VERSION},
            {"schema", kSchemaVersion},
            {"seed", seed},
            {"rng", kRngAlgorithm},
            {"config_hash", config_hash(config)}};
}

std::string csv_metadata(const json& config, std::uint64_t seed) {
    std::ostringstream os;
    os << "# tool=fuzzytomo version=" << FUZZYTOMO_VERSION << " schema=" << kSchemaVersion << "\n"
       << "# seed=" << seed << " rng=" << kRngAlgorithm << " config_hash=" << config_hash(config) << "\n";
    return os.str();
}

std::string loss_map_csv(const LossMap& map) {
    std::ostringstream os;
    os << "theta,phi,L\n";
    for (std::size_t i = 0; i < map.thetas.size(); ++i) {
        for (std::size_t k = 0; k < map.phis.size(); ++k) {
            os << format_double(map.thetas[i]) << ',' << format_double(map.phis[k]) << ','
               << format_double(map.at(i, k)) << '\n';
        }
    }
    return os.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "bandwidth_um,L_min,L_max,K,theta_min,phi_min,theta_max,phi_max\n";
    for (const auto& r : rows) {
        os << format_double(r.bandwidth_um) << ',' << format_double(r.loss_min) << ',' << format_double(r.loss_max)
           << ',' << format_double(r.condition_number) << ',' << format_double(r.argmin.theta) << ','
           << format_double(r.argmin.phi) << ',' << format_double(r.argmax.theta) << ','
           << format_double(r.argmax.phi) << '\n';
    }
    return os.str();
}

std::string experiments_csv(const ComparisonSummary& summary) {
    std::ostringstream os;
    os << "n_tot,experiment,model,fidelity,chi2,nu,p_value,converged,iterations\n";
    for (const auto& r : summary.rows) {
        os << r.n_tot << ',' << r.experiment << ',' << to_string(r.model) << ',' << format_double(r.fidelity) << ','
           << format_double(r.chi2) << ',' << r.nu << ',' << format_double(r.p_value) << ','
           << (r.converged ? 1 : 0) << ',' << r.iterations << '\n';
    }
    return os.str();
}

namespace {
json histogram_to_json(const Histogram& h) {
    return {{"lo", h.lo},        {"hi", h.hi},           {"counts", h.counts},
            {"underflow", h.underflow}, {"overflow", h.overflow}, {"invalid", h.invalid}};
}
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
}  // namespace

json summary_to_json(const ComparisonSummary& summary) {
    json models = json::array();
    for (const auto& m : summary.models) {
        models.push_back({{"model", to_string(m.model)},
                          {"n_tot", m.n_tot},
                          {"n_experiments", m.n_experiments},
                          {"n_excluded", m.n_excluded},
                          {"fidelity_quantiles", {finite_or_null(m.fidelity_q25), finite_or_null(m.fidelity_q50),
                                                  finite_or_null(m.fidelity_q75)}},
                          {"mean_infidelity", finite_or_null(m.mean_infidelity)},
                          {"mean_chi2", finite_or_null(m.mean_chi2)},
                          {"nu", m.nu},
                          {"chi2_ks", {{"statistic", m.chi2_ks.statistic}, {"p_value", m.chi2_ks.p_value}}},
                          {"infidelity_histogram", histogram_to_json(m.infidelity_histogram)},
                          {"chi2_histogram", histogram_to_json(m.chi2_histogram)}});
    }
    json theory = json::array();
    for (const auto& t : summary.theory) {
        theory.push_back({{"n_tot", t.n_tot},
                          {"L", t.loss},
                          {"mean_infidelity", t.mean_infidelity},
                          {"infidelity_variance", t.infidelity_variance},
                          {"d", t.d},
                          {"draws", t.draws},
                          {"infidelity_histogram", histogram_to_json(t.infidelity_histogram)}});
    }
    return {{"models", std::move(models)}, {"theory", std::move(theory)}};
}

json loss_map_to_json(const LossMap& map) {
    auto ext = [](const Extremum& e) { return json{{"theta", e.theta}, {"phi", e.phi}, {"L", e.loss}}; };
    return {{"n_theta", map.thetas.size()},
            {"n_phi", map.phis.size()},
            {"degenerate_points", map.degenerate_points},
            {"grid_min", ext(map.grid_min)},
            {"grid_max", ext(map.grid_max)},
            {"min", ext(map.min)},
            {"max", ext(map.max)}};
}

std::string loss_map_svg(const LossMap& map, std::string_view title) {
    constexpr double cell = 6.0;
    constexpr double margin = 40.0;
    const double width = cell * static_cast<double>(map.phis.size());
    const double height = cell * static_cast<double>(map.thetas.size());
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width + 2 * margin + 60 << "\" height=\""
       << height + 2 * margin << "\">\n";
    os << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
       << "</text>\n";
    for (std::size_t i = 0; i < map.thetas.size(); ++i) {
        for (std::size_t k = 0; k < map.phis.size(); ++k) {
            const double l = map.at(i, k);
            std::string fill = "#808080";
            if (!std::isnan(l)) {
                const Rgb c = color_for(l - 1.0);
                std::array<char, 8> buf{};
                std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", static_cast<int>(c.r), static_cast<int>(c.g),
                              static_cast<int>(c.b));
                fill = buf.data();
            }
            os << "<rect x=\"" << margin + cell * static_cast<double>(k) << "\" y=\""
               << margin + cell * static_cast<double>(i) << "\" width=\"" << cell << "\" height=\"" << cell
               << "\" fill=\"" << fill << "\"/>\n";
        }
    }
    // Color bar for L in [1, 2].
    const double bar_x = width + margin + 15;
    for (int b = 0; b < 50; ++b) {
        const Rgb c = color_for(1.0 - b / 49.0);
        std::array<char, 8> buf{};
        std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", static_cast<int>(c.r), static_cast<int>(c.g),
                      static_cast<int>(c.b));
        os << "<rect x=\"" << bar_x << "\" y=\"" << margin + height * b / 50.0 << "\" width=\"12\" height=\""
           << height / 50.0 + 0.5 << "\" fill=\"" << buf.data() << "\"/>\n";
    }
    os << "<text x=\"" << bar_x + 16 << "\" y=\"" << margin + 10 << "\" font-size=\"10\">2.0</text>\n";
    os << "<text x=\"" << bar_x + 16 << "\" y=\"" << margin + height << "\" font-size=\"10\">1.0</text>\n";
    os << "<text x=\"" << margin << "\" y=\"" << height + margin + 20
       << "\" font-size=\"11\">phi: 0 .. 2pi (horizontal), theta: 0 .. pi (vertical)</text>\n";
    os << "</svg>\n";
    return os.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace fuzzytomo::io
