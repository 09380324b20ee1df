#include "fuzzytomo/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fuzzytomo/errors.hpp"
#include "fuzzytomo/rng.hpp"

namespace fuzzytomo {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInvGolden = 0.6180339887498949;
constexpr int kGoldenIterations = 60;

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return v;
}

// Minimizes f over [a, b] without evaluating the endpoints.
template <class F>
std::pair<double, double> golden_section(F&& f, double a, double b) {
    double x1 = b - kInvGolden * (b - a);
    double x2 = a + kInvGolden * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int i = 0; i < kGoldenIterations; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvGolden * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvGolden * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// sign = +1 refines a minimum, -1 a maximum.
Extremum refine(const Extremum& start, double sign, double dtheta, double dphi, int rounds,
                const MeasurementModel& model, double n_tot) {
    auto objective = [&](double theta, double phi) {
        const auto l = loss_at(theta, phi, model, n_tot);
        return l ? sign * *l : std::numeric_limits<double>::infinity();
    };
    Extremum best = start;
    for (int round = 0; round < rounds; ++round) {
        const double scale = std::ldexp(1.0, -round);
        const double t_lo = std::max(0.0, best.theta - scale * dtheta);
        const double t_hi = std::min(kPi, best.theta + scale * dtheta);
        auto [theta, ft] = golden_section([&](double t) { return objective(t, best.phi); }, t_lo, t_hi);
        if (ft < sign * best.loss) best = {theta, best.phi, sign * ft};
        auto [phi, fp] = golden_section([&](double p) { return objective(best.theta, p); },
                                        best.phi - scale * dphi, best.phi + scale * dphi);
        if (fp < sign * best.loss) best = {best.theta, std::fmod(phi + 2.0 * kPi, 2.0 * kPi), sign * fp};
    }
    return best;
}

std::uint64_t experiment_stream(std::size_t n_tot_index, std::int64_t experiment) {
    return (static_cast<std::uint64_t>(n_tot_index) << 32) ^ static_cast<std::uint64_t>(experiment);
}

}  // namespace

std::optional<double> loss_at(double theta, double phi, const MeasurementModel& model, double n_tot) {
    const PureState state = bloch_to_state({theta, phi, 0.0});
    const auto p = outcome_probabilities(PurifiedState::from_pure(state), model);
    if (*std::min_element(p.begin(), p.end()) < kReliableProbability) return std::nullopt;
    try {
        return loss_function(state, model, n_tot).loss;
    } catch (const DegenerateModel&) {
        return std::nullopt;
    }
}

LossMap loss_map(const MeasurementModel& model, const GridSpec& spec, Execution exec) {
    if (spec.n_theta < 2 || spec.n_phi < 2) throw InvalidArgument("loss_map: grid needs >= 2 points per axis");
    if (spec.refine_rounds < 0) throw InvalidArgument("loss_map: refine_rounds must be >= 0");
    LossMap map;
    map.thetas = linspace(0.0, kPi, spec.n_theta);
    map.phis = linspace(0.0, 2.0 * kPi, spec.n_phi);
    const auto n_theta = static_cast<std::int64_t>(map.thetas.size());
    const auto n_phi = static_cast<std::int64_t>(map.phis.size());
    const std::int64_t total = n_theta * n_phi;
    map.loss.assign(static_cast<std::size_t>(total), kNaN);

    auto kernel = [&](std::int64_t idx) {
        const auto i = static_cast<std::size_t>(idx / n_phi);
        const auto j = static_cast<std::size_t>(idx % n_phi);
        const auto l = loss_at(map.thetas[i], map.phis[j], model, spec.reference_n_tot);
        map.loss[static_cast<std::size_t>(idx)] = l ? *l : kNaN;
    };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t idx = 0; idx < total; ++idx) kernel(idx);
    } else {
        for (std::int64_t idx = 0; idx < total; ++idx) kernel(idx);
    }

    bool any = false;
    for (std::size_t idx = 0; idx < map.loss.size(); ++idx) {
        const double l = map.loss[idx];
        if (std::isnan(l)) {
            ++map.degenerate_points;
            continue;
        }
        const Extremum e{map.thetas[idx / map.phis.size()], map.phis[idx % map.phis.size()], l};
        if (!any || l < map.grid_min.loss) map.grid_min = e;
        if (!any || l > map.grid_max.loss) map.grid_max = e;
        any = true;
    }
    if (!any) throw DegenerateModel("loss_map: every grid point is degenerate");

    const double dtheta = map.thetas[1] - map.thetas[0];
    const double dphi = map.phis[1] - map.phis[0];
    map.min = refine(map.grid_min, 1.0, dtheta, dphi, spec.refine_rounds, model, spec.reference_n_tot);
    map.max = refine(map.grid_max, -1.0, dtheta, dphi, spec.refine_rounds, model, spec.reference_n_tot);
    return map;
}

std::vector<SweepRow> bandwidth_sweep(const std::vector<PlateConfig>& configs, const PlatePair& plates,
                                      double lambda0_um, const std::vector<double>& bandwidths,
                                      const GridSpec& spec, int spectral_samples, Execution exec) {
    std::vector<SweepRow> rows;
    rows.reserve(bandwidths.size());
    for (double bw : bandwidths) {
        if (!(bw >= 0.0)) throw InvalidArgument("bandwidth_sweep: bandwidths must be >= 0");
        const auto model = build_model(ModelKind::fuzzy, configs, plates, spectral_grid(lambda0_um, bw, spectral_samples));
        const LossMap map = loss_map(model, spec, exec);
        SweepRow row;
        row.bandwidth_um = bw;
        row.loss_min = map.min.loss;
        row.loss_max = map.max.loss;
        row.argmin = map.min;
        row.argmax = map.max;
        row.condition_number = measurement_matrix(model).condition_number;
        rows.push_back(row);
    }
    return rows;
}

ExperimentRecord simulate_counts(const PureState& true_state, std::shared_ptr<const MeasurementModel> true_model,
                                 const std::vector<std::int64_t>& trials_per_config, std::uint64_t seed,
                                 std::uint64_t stream) {
    if (!true_model || trials_per_config.size() != true_model->config_count()) {
        throw InvalidArgument("simulate_counts: trials do not match the model configurations");
    }
    const auto p = outcome_probabilities(PurifiedState::from_pure(true_state), *true_model);
    ExperimentRecord rec;
    rec.model = std::move(true_model);
    for (std::size_t c = 0; c < trials_per_config.size(); ++c) {
        const std::int64_t n = trials_per_config[c];
        if (n < 1) throw InvalidArgument("simulate_counts: trials must be positive");
        auto gen = substream_engine(seed, stream, c);
        std::binomial_distribution<std::int64_t> binom(n, std::clamp(p[2 * c], 0.0, 1.0));
        const std::int64_t k0 = binom(gen);
        rec.counts.push_back(static_cast<double>(k0));
        rec.counts.push_back(static_cast<double>(n - k0));
        rec.trials.push_back(static_cast<double>(n));
        rec.trials.push_back(static_cast<double>(n));
    }
    return rec;
}

void SimulationPlan::validate() const {
    protocol.validate();
    if (true_state.dim() != 2) throw InvalidArgument("SimulationPlan: only qubit states are supported");
    if (!(true_bandwidth_um >= 0.0)) throw InvalidArgument("SimulationPlan: true_bandwidth must be >= 0");
    if (reconstruction_models.empty()) throw InvalidArgument("SimulationPlan: no reconstruction models");
    if (n_tot_values.empty()) throw InvalidArgument("SimulationPlan: no n_tot values");
    for (auto n : n_tot_values) {
        if (n < static_cast<std::int64_t>(protocol.size())) {
            throw InvalidArgument("SimulationPlan: n_tot smaller than the number of configurations");
        }
    }
    if (n_experiments < 1) throw InvalidArgument("SimulationPlan: n_experiments must be >= 1");
    if (spectral_samples < 1) throw InvalidArgument("SimulationPlan: spectral_samples must be >= 1");
}

const ModelSummary& ComparisonSummary::summary(ModelKind kind, std::int64_t n_tot) const {
    for (const auto& m : models) {
        if (m.model == kind && m.n_tot == n_tot) return m;
    }
    throw InvalidArgument("ComparisonSummary: no summary for " + to_string(kind) + " at n_tot " +
                          std::to_string(n_tot));
}

const TheoryReference& ComparisonSummary::theory_for(std::int64_t n_tot) const {
    for (const auto& t : theory) {
        if (t.n_tot == n_tot) return t;
    }
    throw InvalidArgument("ComparisonSummary: no theory reference for n_tot " + std::to_string(n_tot));
}

ComparisonSummary run_comparison(const SimulationPlan& plan, Execution exec) {
    plan.validate();
    const auto grid = spectral_grid(plan.lambda0_um, plan.true_bandwidth_um, plan.spectral_samples);
    auto true_model = std::make_shared<const MeasurementModel>(
        build_model(ModelKind::fuzzy, plan.protocol.configs, plan.plates, grid));
    std::vector<std::shared_ptr<const MeasurementModel>> recon_models;
    for (auto kind : plan.reconstruction_models) {
        recon_models.push_back(kind == ModelKind::fuzzy
                                   ? true_model
                                   : std::make_shared<const MeasurementModel>(
                                         build_model(kind, plan.protocol.configs, plan.plates, grid)));
    }

    const std::size_t n_models = recon_models.size();
    const auto n_exp = static_cast<std::size_t>(plan.n_experiments);
    const std::size_t per_ntot = n_exp * n_models;
    ComparisonSummary out;
    out.rows.resize(plan.n_tot_values.size() * per_ntot);

    std::vector<std::vector<std::int64_t>> allocations;
    for (auto n : plan.n_tot_values) allocations.push_back(plan.protocol.with_total_trials(n).trials_per_config);

    const auto tasks = static_cast<std::int64_t>(plan.n_tot_values.size() * n_exp);
    auto kernel = [&](std::int64_t task) {
        const auto t = static_cast<std::size_t>(task);
        const std::size_t ni = t / n_exp;
        const auto e = static_cast<std::int64_t>(t % n_exp);
        const std::uint64_t stream = experiment_stream(ni, e);
        ExperimentRecord record;
        std::string sim_error;
        try {
            record = simulate_counts(plan.true_state, true_model, allocations[ni], plan.seed, stream);
        } catch (const std::exception& ex) {
            sim_error = ex.what();
        }
        for (std::size_t m = 0; m < n_models; ++m) {
            ExperimentRow& row = out.rows[ni * per_ntot + static_cast<std::size_t>(e) * n_models + m];
            row.n_tot = plan.n_tot_values[ni];
            row.experiment = e;
            row.model = recon_models[m]->kind;
            row.fidelity = kNaN;
            row.chi2 = kNaN;
            row.p_value = kNaN;
            if (!sim_error.empty()) {
                row.error = sim_error;
                continue;
            }
            try {
                ExperimentRecord rec = record;
                rec.model = recon_models[m];
                MleOptions opts;
                opts.damping = plan.damping;
                opts.tolerance = plan.tolerance;
                opts.max_iterations = plan.max_iterations;
                opts.seed = substream_seed(plan.seed, stream, 0xffffffffULL);
                const MleResult mle = mle_reconstruct(rec, 1, opts);
                row.converged = mle.converged;
                row.iterations = mle.iterations;
                row.fidelity = fidelity_pure(dominant_state(mle.psi_hat), plan.true_state);
                const ChiSquaredReport chi = chi_squared_test(mle.psi_hat, rec);
                row.chi2 = chi.chi2;
                row.nu = chi.nu;
                row.p_value = chi.p_value;
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
        }
    };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::int64_t task = 0; task < tasks; ++task) kernel(task);
    } else {
        for (std::int64_t task = 0; task < tasks; ++task) kernel(task);
    }

    // Aggregation runs serially in a fixed order.
    for (std::size_t ni = 0; ni < plan.n_tot_values.size(); ++ni) {
        const std::int64_t n_tot = plan.n_tot_values[ni];
        TheoryReference theory;
        theory.n_tot = n_tot;
        const LossResult lr = loss_function(plan.true_state, *true_model, static_cast<double>(n_tot));
        theory.loss = lr.loss;
        theory.mean_infidelity = lr.spectrum.mean_infidelity();
        theory.infidelity_variance = lr.spectrum.infidelity_variance();
        theory.d = lr.spectrum.d;
        theory.draws = kTheoryDraws;
        const auto draws = infidelity_distribution(lr.spectrum, kTheoryDraws, substream_seed(plan.seed, ni, 0x7468ULL));
        const double infid_hi = 10.0 * theory.mean_infidelity;
        theory.infidelity_histogram = make_histogram(draws, 0.0, infid_hi, kHistogramBins);

        for (std::size_t m = 0; m < n_models; ++m) {
            ModelSummary s;
            s.model = recon_models[m]->kind;
            s.n_tot = n_tot;
            s.n_experiments = plan.n_experiments;
            std::vector<double> fid, infid_all, chi_all, chi_ok;
            for (std::size_t e = 0; e < n_exp; ++e) {
                const ExperimentRow& row = out.rows[ni * per_ntot + e * n_models + m];
                if (row.nu > 0) s.nu = row.nu;
                if (!row.usable()) {
                    ++s.n_excluded;
                    infid_all.push_back(kNaN);
                    chi_all.push_back(kNaN);
                    continue;
                }
                fid.push_back(row.fidelity);
                infid_all.push_back(1.0 - row.fidelity);
                chi_all.push_back(row.chi2);
                chi_ok.push_back(row.chi2);
            }
            s.infidelity_histogram = make_histogram(infid_all, 0.0, infid_hi, kHistogramBins);
            s.chi2_histogram = make_histogram(chi_all, 0.0, kChi2HistogramMax, kHistogramBins);
            if (!fid.empty()) {
                s.fidelity_q25 = quantile(fid, 0.25);
                s.fidelity_q50 = quantile(fid, 0.5);
                s.fidelity_q75 = quantile(fid, 0.75);
                std::vector<double> infid;
                for (double f : fid) infid.push_back(1.0 - f);
                s.mean_infidelity = mean(infid);
                s.mean_chi2 = mean(chi_ok);
                if (s.nu > 0) {
                    const int nu = s.nu;
                    s.chi2_ks = ks_test(chi_ok, [nu](double x) { return chi_squared_cdf(x, nu); });
                }
            } else {
                s.fidelity_q25 = s.fidelity_q50 = s.fidelity_q75 = kNaN;
                s.mean_infidelity = s.mean_chi2 = kNaN;
            }
            out.models.push_back(std::move(s));
        }
        out.theory.push_back(std::move(theory));
    }
    return out;
}

}  // namespace fuzzytomo
