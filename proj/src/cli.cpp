#include "fuzzytomo/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fuzzytomo/errors.hpp"
#include "fuzzytomo/fidelity.hpp"
#include "fuzzytomo/io.hpp"
#include "fuzzytomo/montecarlo.hpp"
#include "fuzzytomo/optics.hpp"
#include "fuzzytomo/protocol.hpp"
#include "fuzzytomo/tomography.hpp"

namespace fuzzytomo::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kOutDirEnv = "FUZZYTOMO_OUT_DIR";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr const char* kConventions =
    "Conventions: angles in radians; wavelengths, bandwidths and plate thicknesses in micrometers (*_um);\n"
    "complex numbers serialized as [re, im]; JSON documents carry schema \"fuzzytomo/1\"\n"
    "(schema/config.schema.json and schema/counts.schema.json in the source tree).\n"
    "Every option may also be given as a key of a JSON file passed with --config (dashes become underscores);\n"
    "explicit flags win over the file. Output directory: --out-dir, else $FUZZYTOMO_OUT_DIR, else '.'.\n"
    "Exit status: 0 ok, 1 numerical failure, 2 invalid configuration, 64 unknown subcommand.";

struct Settings {
    std::string config_file;
    std::string out_dir;
    std::uint64_t seed = 20200101;
    std::string protocol = "cube";
    double lambda0_um = 0.65;
    int plate_order = 10;
    double hwp_um = 0.0;
    double qwp_um = 0.0;
    int spectral_samples = kDefaultSpectralSamples;
    double bandwidth_um = 0.01;
    std::vector<double> bandwidths_um{0.0, 0.002, 0.004, 0.006, 0.008, 0.01, 0.012, 0.014, 0.016, 0.018, 0.02};
    std::string model = "fuzzy";
    int config_index = -1;
    int n_theta = 50;
    int n_phi = 100;
    int refine_rounds = 3;
    bool svg = false;
    double state_theta = std::numbers::pi / 2.0;
    double state_phi = 0.0;
    std::vector<std::int64_t> n_tot{1000};
    std::int64_t experiments = 1000;
    std::vector<std::string> models{"fuzzy", "ideal"};
    bool expected_counts = false;
    std::string counts_file;
    int rank = 1;
};

std::string dashify(std::string key) {
    for (auto& c : key) {
        if (c == '_') c = '-';
    }
    return key;
}

template <class T>
struct is_vector : std::false_type {};
template <class T, class A>
struct is_vector<std::vector<T, A>> : std::true_type {};

// Registers options on one subcommand and remembers how to read each of
// them from a JSON config and how to echo the effective value.
class Binder {
public:
    explicit Binder(CLI::App* app) : app_(app) {}

    template <class T>
    void add(const std::string& key, T& var, const std::string& desc) {
        CLI::Option* opt = app_->add_option("--" + dashify(key), var, desc)->capture_default_str();
        if constexpr (is_vector<T>::value) opt->delimiter(',');
        bindings_.push_back({key, opt,
                             [&var, key](const json& j) {
                                 try {
                                     var = j.get<T>();
                                 } catch (const json::exception&) {
                                     throw ConfigError("field '" + key + "' has the wrong type");
                                 }
                             },
                             [&var] { return json(var); }});
    }

    void add_flag(const std::string& key, bool& var, const std::string& desc) {
        CLI::Option* opt = app_->add_flag("--" + dashify(key), var, desc);
        bindings_.push_back({key, opt,
                             [&var, key](const json& j) {
                                 if (!j.is_boolean()) throw ConfigError("field '" + key + "' must be a boolean");
                                 var = j.get<bool>();
                             },
                             [&var] { return json(var); }});
    }

    void apply_config(const json& config) const {
        if (!config.is_object()) throw ConfigError("config file must hold a JSON object");
        for (const auto& [key, value] : config.items()) {
            const auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) {
                return b.key == key;
            });
            if (it == bindings_.end()) throw ConfigError("unknown field '" + key + "' for subcommand " + app_->get_name());
            if (it->option->count() == 0) it->apply(value);
        }
    }

    [[nodiscard]] json effective() const {
        json j = json::object();
        for (const auto& b : bindings_) {
            if (b.key == "config" || b.key == "out_dir") continue;
            j[b.key] = b.dump();
        }
        return j;
    }

private:
    struct Binding {
        std::string key;
        CLI::Option* option;
        std::function<void(const json&)> apply;
        std::function<json()> dump;
    };
    CLI::App* app_;
    std::vector<Binding> bindings_;
};

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError("field '" + field + "' " + what);
}

void validate_common(const Settings& s) {
    require(s.lambda0_um >= kQuartzMinWavelengthUm && s.lambda0_um <= kQuartzMaxWavelengthUm, "lambda0_um",
            "must lie in [0.4, 1.0] um");
    require(s.plate_order >= 0, "plate_order", "must be >= 0");
    require(s.hwp_um >= 0.0, "hwp_um", "must be >= 0 (0 selects the design thickness)");
    require(s.qwp_um >= 0.0, "qwp_um", "must be >= 0 (0 selects the design thickness)");
    require(s.spectral_samples >= 1, "spectral_samples", "must be >= 1");
    require(s.protocol == "cube" || s.protocol == "octahedron", "protocol", "must be cube or octahedron");
}

void validate_band(const Settings& s, double bw, const std::string& field) {
    require(std::isfinite(bw) && bw >= 0.0, field, "must be >= 0");
    require(s.lambda0_um - bw / 2 >= kQuartzMinWavelengthUm && s.lambda0_um + bw / 2 <= kQuartzMaxWavelengthUm,
            field, "pushes the band outside [0.4, 1.0] um");
}

PlatePair plates_for(const Settings& s) {
    PlatePair design = design_plates(s.plate_order, s.lambda0_um);
    return {WavePlateSpec(PlateKind::half, s.hwp_um > 0.0 ? s.hwp_um : design.hwp.thickness_um()),
            WavePlateSpec(PlateKind::quarter, s.qwp_um > 0.0 ? s.qwp_um : design.qwp.thickness_um())};
}

fs::path out_dir(const Settings& s) {
    if (!s.out_dir.empty()) return s.out_dir;
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
    return ".";
}

json document(const json& config, std::uint64_t seed, json body) {
    body["metadata"] = io::metadata_json(config, seed);
    body["config"] = config;
    return body;
}

void emit(const fs::path& path, const std::string& content, std::ostream& out) {
    io::write_atomic(path, content);
    out << "wrote " << path.string() << "\n";
}

// --- subcommands -----------------------------------------------------------

int cmd_protocol(const Settings& s, const json& config, std::ostream& out) {
    require(s.protocol == "cube" || s.protocol == "octahedron", "name", "must be cube or octahedron");
    validate_common(s);
    const Protocol protocol = protocol_by_name(s.protocol, s.protocol == "cube" ? 3000 : 4000);
    const PlatePair plates = plates_for(s);
    json body = io::protocol_to_json(protocol);
    for (std::size_t i = 0; i < protocol.size(); ++i) {
        const auto proj = ideal_projectors(protocol.configs[i], plates.hwp, plates.qwp, s.lambda0_um);
        const Eigen::Vector3d v = bloch_vector(proj.first);
        const Eigen::Vector3d h = bloch_vector(proj.second);
        body["configs"][i]["bloch_v"] = {v.x(), v.y(), v.z()};
        body["configs"][i]["bloch_h"] = {h.x(), h.y(), h.z()};
    }
    body["plates"] = io::plates_to_json(plates);
    const json doc = document(config, s.seed, {{"protocol", body}});
    out << doc["protocol"].dump(2) << "\n";
    emit(out_dir(s) / "protocol.json", doc.dump(2) + "\n", out);
    return kExitOk;
}

int cmd_operators(const Settings& s, const json& config, std::ostream& out) {
    validate_common(s);
    validate_band(s, s.bandwidth_um, "bandwidth_um");
    const ModelKind kind = [&] {
        try {
            return model_kind_from_string(s.model);
        } catch (const InvalidArgument&) {
            throw ConfigError("field 'model' must be fuzzy or ideal");
        }
    }();
    Protocol protocol = protocol_by_name(s.protocol, s.protocol == "cube" ? 3000 : 4000);
    if (s.config_index >= 0) {
        require(s.config_index < static_cast<int>(protocol.size()), "config_index", "exceeds the protocol size");
        protocol.configs = {protocol.configs[static_cast<std::size_t>(s.config_index)]};
    }
    const auto model = build_model(kind, protocol.configs, plates_for(s),
                                   spectral_grid(s.lambda0_um, s.bandwidth_um, s.spectral_samples));
    json body = io::model_to_json(model);
    const MeasurementMatrix mm = measurement_matrix(model);
    body["measurement_matrix"] = {{"rows", io::matrix_to_json(mm.b)},
                                  {"singular_values", mm.singular_values},
                                  {"nonzero_singular_values", mm.nonzero_singular_values},
                                  {"condition_number", std::isfinite(mm.condition_number)
                                                           ? json(mm.condition_number)
                                                           : json(nullptr)}};
    emit(out_dir(s) / "operators.json", document(config, s.seed, body).dump(2) + "\n", out);
    out << "K=" << io::format_double(mm.condition_number) << "\n";
    return kExitOk;
}

GridSpec grid_for(const Settings& s) {
    require(s.n_theta >= 2, "n_theta", "must be >= 2");
    require(s.n_phi >= 2, "n_phi", "must be >= 2");
    require(s.refine_rounds >= 0, "refine_rounds", "must be >= 0");
    GridSpec g;
    g.n_theta = s.n_theta;
    g.n_phi = s.n_phi;
    g.refine_rounds = s.refine_rounds;
    return g;
}

int cmd_loss_map(const Settings& s, const json& config, std::ostream& out) {
    validate_common(s);
    validate_band(s, s.bandwidth_um, "bandwidth_um");
    const GridSpec grid = grid_for(s);
    const Protocol protocol = protocol_by_name(s.protocol, 1000);
    const auto model = build_model(ModelKind::fuzzy, protocol.configs, plates_for(s),
                                   spectral_grid(s.lambda0_um, s.bandwidth_um, s.spectral_samples));
    const LossMap map = loss_map(model, grid);
    const fs::path dir = out_dir(s);
    emit(dir / "loss_map.csv", io::csv_metadata(config, s.seed) + io::loss_map_csv(map), out);
    emit(dir / "loss_map.json", document(config, s.seed, {{"loss_map", io::loss_map_to_json(map)}}).dump(2) + "\n",
         out);
    if (s.svg) {
        std::ostringstream title;
        title << "L(theta, phi), " << s.protocol << ", bandwidth " << s.bandwidth_um << " um";
        emit(dir / "loss_map.svg", io::loss_map_svg(map, title.str()), out);
    }
    out << "L_min=" << io::format_double(map.min.loss) << " L_max=" << io::format_double(map.max.loss) << "\n";
    return kExitOk;
}

int cmd_sweep(const Settings& s, const json& config, std::ostream& out) {
    validate_common(s);
    require(!s.bandwidths_um.empty(), "bandwidths_um", "must not be empty");
    for (double bw : s.bandwidths_um) validate_band(s, bw, "bandwidths_um");
    const GridSpec grid = grid_for(s);
    const Protocol protocol = protocol_by_name(s.protocol, 1000);
    const auto rows = bandwidth_sweep(protocol.configs, plates_for(s), s.lambda0_um, s.bandwidths_um, grid,
                                      s.spectral_samples);
    const fs::path dir = out_dir(s);
    emit(dir / "sweep.csv", io::csv_metadata(config, s.seed) + io::sweep_csv(rows), out);
    json table = json::array();
    for (const auto& r : rows) {
        table.push_back({{"bandwidth_um", r.bandwidth_um},
                         {"L_min", r.loss_min},
                         {"L_max", r.loss_max},
                         {"K", r.condition_number}});
    }
    emit(dir / "sweep.json", document(config, s.seed, {{"sweep", table}}).dump(2) + "\n", out);
    return kExitOk;
}

int cmd_simulate(const Settings& s, const json& config, std::ostream& out) {
    validate_common(s);
    validate_band(s, s.bandwidth_um, "bandwidth_um");
    require(!s.n_tot.empty(), "n_tot", "must not be empty");
    const Protocol base = protocol_by_name(s.protocol, 1000);
    for (auto n : s.n_tot) require(n >= static_cast<std::int64_t>(base.size()), "n_tot", "must cover every configuration");
    require(s.experiments >= 1, "experiments", "must be >= 1");
    require(!s.models.empty(), "models", "must not be empty");

    std::vector<ModelKind> kinds;
    for (const auto& m : s.models) {
        try {
            kinds.push_back(model_kind_from_string(m));
        } catch (const InvalidArgument&) {
            throw ConfigError("field 'models' entries must be fuzzy or ideal");
        }
    }
    const PureState truth = bloch_to_state({s.state_theta, s.state_phi, 0.0});
    SimulationPlan plan{.true_state = truth,
                        .protocol = base,
                        .plates = plates_for(s),
                        .lambda0_um = s.lambda0_um,
                        .true_bandwidth_um = s.bandwidth_um,
                        .spectral_samples = s.spectral_samples,
                        .reconstruction_models = kinds,
                        .n_tot_values = s.n_tot,
                        .n_experiments = s.experiments,
                        .seed = s.seed};
    const ComparisonSummary summary = run_comparison(plan);

    const fs::path dir = out_dir(s);
    emit(dir / "experiments.csv", io::csv_metadata(config, s.seed) + io::experiments_csv(summary), out);
    emit(dir / "summary.json", document(config, s.seed, {{"summary", io::summary_to_json(summary)}}).dump(2) + "\n",
         out);

    // Counts of the first experiment at the first n_tot (or their exact
    // expectations), described by the true model so `reconstruct` can replay them.
    const Protocol alloc = base.with_total_trials(s.n_tot.front());
    auto true_model = std::make_shared<const MeasurementModel>(build_model(
        ModelKind::fuzzy, base.configs, plan.plates, spectral_grid(s.lambda0_um, s.bandwidth_um, s.spectral_samples)));
    const ExperimentRecord rec =
        s.expected_counts ? expected_record(true_model, PurifiedState::from_pure(truth), alloc.trials_per_config)
                          : simulate_counts(truth, true_model, alloc.trials_per_config, s.seed, 0);
    io::CountsFile counts;
    counts.model = ModelKind::fuzzy;
    counts.plates = plan.plates;
    counts.lambda0_um = s.lambda0_um;
    counts.bandwidth_um = s.bandwidth_um;
    counts.spectral_samples = s.spectral_samples;
    counts.configs = base.configs;
    for (std::size_t c = 0; c < base.size(); ++c) {
        counts.trials.push_back(rec.trials[2 * c]);
        counts.k0.push_back(rec.counts[2 * c]);
        counts.k1.push_back(rec.counts[2 * c + 1]);
    }
    counts.true_state = truth.amplitudes();
    json counts_doc = io::counts_to_json(counts);
    counts_doc["metadata"] = io::metadata_json(config, s.seed);
    emit(dir / "counts.json", counts_doc.dump(2) + "\n", out);

    for (const auto& m : summary.models) {
        out << to_string(m.model) << " n_tot=" << m.n_tot << " median_F=" << io::format_double(m.fidelity_q50)
            << " mean_chi2=" << io::format_double(m.mean_chi2) << " excluded=" << m.n_excluded << "\n";
    }
    return kExitOk;
}

int cmd_reconstruct(const Settings& s, const json& config, std::ostream& out) {
    require(!s.counts_file.empty(), "counts_file", "is required");
    require(s.rank >= 1 && s.rank <= 2, "rank", "must be 1 or 2");
    std::ifstream in(s.counts_file);
    if (!in) throw ConfigError("field 'counts_file': cannot open " + s.counts_file);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field 'counts_file': invalid JSON: ") + e.what());
    }
    io::CountsFile counts;
    try {
        counts = io::counts_from_json(doc);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    const ExperimentRecord record = counts.to_record();

    MleOptions opts;
    opts.seed = s.seed;
    const MleResult mle = mle_reconstruct(record, s.rank, opts);
    json body{{"psi", io::matrix_to_json(mle.psi_hat.psi())},
              {"density_matrix", io::matrix_to_json(density_of(mle.psi_hat).matrix())},
              {"iterations", mle.iterations},
              {"converged", mle.converged},
              {"final_step_norm", mle.final_step_norm},
              {"escapes", mle.escapes},
              {"log_likelihood", mle.log_likelihood}};
    try {
        const ChiSquaredReport chi = chi_squared_test(mle.psi_hat, record);
        body["chi2"] = {{"chi2", chi.chi2},   {"nu", chi.nu},         {"p_value", chi.p_value},
                        {"nu_P", chi.nu_p},   {"nu_norm", chi.nu_norm}, {"excluded_terms", chi.excluded_terms}};
    } catch (const DegenerateModel& e) {
        body["chi2"] = {{"error", e.what()}};
    }
    if (counts.true_state) {
        const PureState truth = PureState::normalized(*counts.true_state);
        const double f = fidelity_pure(dominant_state(mle.psi_hat), truth);
        body["fidelity"] = f;
        out << "fidelity=" << io::format_double(f) << "\n";
    }
    emit(out_dir(s) / "reconstruction.json", document(config, s.seed, body).dump(2) + "\n", out);
    return mle.converged ? kExitOk : kExitNumerical;
}

const std::set<std::string> kSubcommands{"protocol", "operators", "loss-map", "sweep", "simulate", "reconstruct"};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty()) {
        err << "usage: fuzzytomo <protocol|operators|loss-map|sweep|simulate|reconstruct> [options]\n";
        return kExitUsage;
    }
    const std::string& first = args.front();
    const bool help_request = first == "-h" || first == "--help";
    if (!help_request && !kSubcommands.contains(first)) {
        err << "unknown subcommand '" << first << "'\n";
        return kExitUsage;
    }

    Settings s;
    CLI::App app{"Polarization-qubit tomography under waveplate chromatic aberration", "fuzzytomo"};
    app.footer(kConventions);
    app.require_subcommand(1);

    std::vector<std::pair<CLI::App*, std::unique_ptr<Binder>>> subs;
    auto make = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        auto binder = std::make_unique<Binder>(sub);
        binder->add("config", s.config_file, "JSON file with option values");
        binder->add("out_dir", s.out_dir, "output directory");
        binder->add("seed", s.seed, "master seed");
        Binder* b = binder.get();
        subs.emplace_back(sub, std::move(binder));
        return b;
    };
    auto add_optics = [&](Binder* b, bool with_protocol = true) {
        if (with_protocol) b->add("protocol", s.protocol, "cube | octahedron");
        b->add("lambda0_um", s.lambda0_um, "central wavelength [um]");
        b->add("plate_order", s.plate_order, "wave-plate order at lambda0");
        b->add("hwp_um", s.hwp_um, "HWP thickness [um]; 0 = design thickness for plate_order");
        b->add("qwp_um", s.qwp_um, "QWP thickness [um]; 0 = design thickness for plate_order");
        b->add("spectral_samples", s.spectral_samples, "midpoint nodes across the band");
    };
    auto add_grid = [&](Binder* b) {
        b->add("n_theta", s.n_theta, "theta grid points");
        b->add("n_phi", s.n_phi, "phi grid points");
        b->add("refine_rounds", s.refine_rounds, "golden-section refinement rounds");
    };

    Binder* b_protocol = make("protocol", "emit the cube or octahedron plate-angle table");
    b_protocol->add("name", s.protocol, "cube | octahedron");
    add_optics(b_protocol, false);

    Binder* b_operators = make("operators", "emit fuzzy or ideal operators and the measurement matrix");
    add_optics(b_operators);
    b_operators->add("bandwidth_um", s.bandwidth_um, "spectral bandwidth [um]");
    b_operators->add("model", s.model, "fuzzy | ideal");
    b_operators->add("config_index", s.config_index, "restrict to one configuration (-1 = all)");

    Binder* b_map = make("loss-map", "loss function over the Bloch sphere (CSV, JSON, optional SVG)");
    add_optics(b_map);
    add_grid(b_map);
    b_map->add("bandwidth_um", s.bandwidth_um, "spectral bandwidth [um]");
    b_map->add_flag("svg", s.svg, "also write an SVG heatmap");

    Binder* b_sweep = make("sweep", "L_min, L_max and condition number versus bandwidth");
    add_optics(b_sweep);
    add_grid(b_sweep);
    b_sweep->add("bandwidths_um", s.bandwidths_um, "comma-separated bandwidths [um]");

    Binder* b_sim = make("simulate", "Monte Carlo comparison of reconstruction models");
    add_optics(b_sim);
    b_sim->add("bandwidth_um", s.bandwidth_um, "true spectral bandwidth [um]");
    b_sim->add("state_theta", s.state_theta, "true state polar angle [rad]");
    b_sim->add("state_phi", s.state_phi, "true state azimuth [rad]");
    b_sim->add("n_tot", s.n_tot, "comma-separated total sample sizes");
    b_sim->add("experiments", s.experiments, "experiments per sample size");
    b_sim->add("models", s.models, "comma-separated reconstruction models (fuzzy, ideal)");
    b_sim->add_flag("expected_counts", s.expected_counts, "write exact expected counts to counts.json");

    Binder* b_rec = make("reconstruct", "maximum-likelihood reconstruction of a counts file");
    b_rec->add("counts_file", s.counts_file, "counts JSON (schema fuzzytomo.counts/1)");
    b_rec->add("rank", s.rank, "purification rank");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help() << "\n";
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All) << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help() << "\n";
            return kExitOk;
        }
        err << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    }

    CLI::App* chosen = app.get_subcommands().front();
    Binder* binder = nullptr;
    for (auto& [sub, b] : subs) {
        if (sub == chosen) binder = b.get();
    }

    try {
        if (!s.config_file.empty()) {
            std::ifstream in(s.config_file);
            if (!in) throw ConfigError("field 'config': cannot open " + s.config_file);
            json cfg;
            try {
                cfg = json::parse(in);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("field 'config': invalid JSON: ") + e.what());
            }
            binder->apply_config(cfg);
        }
        json effective = binder->effective();
        effective["command"] = chosen->get_name();
        effective["schema"] = io::kSchemaVersion;

        const std::string& name = chosen->get_name();
        if (name == "protocol") return cmd_protocol(s, effective, out);
        if (name == "operators") return cmd_operators(s, effective, out);
        if (name == "loss-map") return cmd_loss_map(s, effective, out);
        if (name == "sweep") return cmd_sweep(s, effective, out);
        if (name == "simulate") return cmd_simulate(s, effective, out);
        return cmd_reconstruct(s, effective, out);
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        err << "invalid config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace fuzzytomo::cli
