#include "fuzzytomo/tomography.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fuzzytomo/errors.hpp"
#include "fuzzytomo/rng.hpp"
#include "fuzzytomo/stats.hpp"

namespace fuzzytomo {
namespace {

constexpr double kZeroExpectation = 1e-12;

void probabilities_into(const CMatrix& psi, const MeasurementModel& model, std::vector<double>& out) {
    out.resize(model.operator_count());
    for (std::size_t j = 0; j < out.size(); ++j) {
        // Tr(psi psi^dagger L) = sum over columns of psi_c^dagger L psi_c.
        out[j] = (psi.adjoint() * model.op(j) * psi).trace().real();
    }
}

CMatrix random_start(Eigen::Index s, Eigen::Index r, std::uint64_t seed) {
    std::mt19937_64 gen(substream_seed(seed, 0x6d6c65ULL, 0));
    std::normal_distribution<double> normal;
    CMatrix psi(s, r);
    for (Eigen::Index c = 0; c < r; ++c) {
        for (Eigen::Index i = 0; i < s; ++i) {
            const double re = normal(gen);
            const double im = normal(gen);
            psi(i, c) = Complex(re, im);
        }
    }
    return psi / psi.norm();
}

}  // namespace

double ExperimentRecord::total_trials() const {
    return std::accumulate(trials.begin(), trials.end(), 0.0) / 2.0;
}

void ExperimentRecord::validate() const {
    if (!model) throw InvalidArgument("ExperimentRecord: no measurement model attached");
    const std::size_t m = model->operator_count();
    if (counts.size() != m || trials.size() != m) {
        throw InvalidArgument("ExperimentRecord: expected " + std::to_string(m) + " operator entries");
    }
    for (std::size_t c = 0; c < model->config_count(); ++c) {
        const double n0 = trials[2 * c];
        const double n1 = trials[2 * c + 1];
        const double k0 = counts[2 * c];
        const double k1 = counts[2 * c + 1];
        if (!(n0 > 0.0) || n0 != n1) {
            throw InvalidArgument("ExperimentRecord: config " + std::to_string(c) +
                                  " needs equal positive trials for both outcomes");
        }
        if (k0 < 0.0 || k1 < 0.0 || k0 > n0 || k1 > n0) {
            throw InvalidArgument("ExperimentRecord: config " + std::to_string(c) + " counts outside [0, n]");
        }
        if (std::abs(k0 + k1 - n0) > 1e-9 * n0) {
            throw InvalidArgument("ExperimentRecord: config " + std::to_string(c) + " counts do not sum to trials");
        }
    }
}

ExperimentRecord make_record(std::shared_ptr<const MeasurementModel> model,
                             const std::vector<std::pair<double, double>>& counts_per_config) {
    ExperimentRecord rec;
    rec.model = std::move(model);
    for (const auto& [k0, k1] : counts_per_config) {
        rec.counts.push_back(k0);
        rec.counts.push_back(k1);
        rec.trials.push_back(k0 + k1);
        rec.trials.push_back(k0 + k1);
    }
    rec.validate();
    return rec;
}

ExperimentRecord expected_record(std::shared_ptr<const MeasurementModel> model, const PurifiedState& state,
                                 const std::vector<std::int64_t>& trials_per_config) {
    if (!model || trials_per_config.size() != model->config_count()) {
        throw InvalidArgument("expected_record: trials do not match the model configurations");
    }
    const auto p = outcome_probabilities(state, *model);
    ExperimentRecord rec;
    rec.model = std::move(model);
    for (std::size_t c = 0; c < trials_per_config.size(); ++c) {
        const auto n = static_cast<double>(trials_per_config[c]);
        // Outcome pairs sum to one only up to roundoff; keep k_V + k_H = n exact.
        const double k0 = n * p[2 * c];
        rec.counts.push_back(k0);
        rec.counts.push_back(n - k0);
        rec.trials.push_back(n);
        rec.trials.push_back(n);
    }
    rec.validate();
    return rec;
}

std::vector<double> outcome_probabilities(const PurifiedState& state, const MeasurementModel& model) {
    if (state.dim() != model.dim()) throw InvalidArgument("outcome_probabilities: dimension mismatch");
    std::vector<double> p;
    probabilities_into(state.psi(), model, p);
    return p;
}

double log_likelihood(const ExperimentRecord& record, const std::vector<double>& probabilities) {
    double ll = 0.0;
    for (std::size_t j = 0; j < record.counts.size(); ++j) {
        if (record.counts[j] > 0.0) ll += record.counts[j] * std::log(std::max(probabilities[j], 1e-300));
    }
    return ll;
}

namespace {

struct IterationState {
    CMatrix psi;
    std::vector<double> p;
    double ll = 0.0;
    std::int64_t iterations = 0;
    std::int64_t backtracks = 0;
    double step = 0.0;
    bool converged = false;
};

CMatrix j_operator(const ExperimentRecord& record, const std::vector<double>& p, double floor) {
    const MeasurementModel& model = *record.model;
    CMatrix j_matrix = CMatrix::Zero(model.dim(), model.dim());
    for (std::size_t j = 0; j < model.operator_count(); ++j) {
        if (record.counts[j] == 0.0) continue;
        j_matrix += (record.counts[j] / std::max(p[j], floor)) * model.op(j);
    }
    return j_matrix;
}

// Damped fixed-point iteration from psi until the max-entry step drops below
// the tolerance or the iteration budget runs out.
IterationState iterate(const ExperimentRecord& record, CMatrix psi, const MleOptions& options,
                       std::int64_t budget) {
    const MeasurementModel& model = *record.model;
    // Per-config POVMs give I = n_tot E, so I^{-1} is a scalar.
    const double n_tot = record.total_trials();

    IterationState st;
    st.psi = std::move(psi);
    probabilities_into(st.psi, model, st.p);
    st.ll = log_likelihood(record, st.p);

    CMatrix next;
    std::vector<double> next_p;
    while (st.iterations < budget) {
        const CMatrix target = j_operator(record, st.p, options.probability_floor) * st.psi / n_tot;

        double mu = options.damping;
        double next_ll = st.ll;
        for (int attempt = 0;; ++attempt) {
            next = (1.0 - mu) * st.psi + mu * target;
            next /= next.norm();
            probabilities_into(next, model, next_p);
            next_ll = log_likelihood(record, next_p);
            if (next_ll >= st.ll - 1e-12 * std::max(1.0, std::abs(st.ll)) || attempt >= 30) break;
            mu *= 0.5;
            ++st.backtracks;
        }

        st.step = (next - st.psi).cwiseAbs().maxCoeff();
        st.psi.swap(next);
        st.p.swap(next_p);
        st.ll = next_ll;
        ++st.iterations;
        if (st.step < options.tolerance) {
            st.converged = true;
            break;
        }
    }
    return st;
}

// Every stationary point of the likelihood solves J psi = n_tot psi, saddles
// included, and the damped map can settle on one. At a saddle J/n_tot has an
// eigenvalue above one whose eigenvector leaves the column span of psi;
// returns a start tilted toward it, or an empty matrix when there is none.
CMatrix escape_direction(const ExperimentRecord& record, const IterationState& st, double floor) {
    const double n_tot = record.total_trials();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(j_operator(record, st.p, floor) / n_tot);
    const Eigen::Index s = st.psi.rows();
    const double top = es.eigenvalues()(s - 1);
    if (!(top > 1.0 + 1e-6)) return {};
    const CVector v = es.eigenvectors().col(s - 1);
    const Eigen::HouseholderQR<CMatrix> qr(st.psi);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(s, st.psi.cols());
    const CVector outside = v - q * (q.adjoint() * v);
    if (outside.squaredNorm() < 1e-6) return {};
    CMatrix start = st.psi;
    start.col(0) += outside.normalized() * st.psi.col(0).norm();
    return start / start.norm();
}

constexpr int kMaxEscapes = 4;

}  // namespace

MleResult mle_reconstruct(const ExperimentRecord& record, Eigen::Index rank, const MleOptions& options) {
    record.validate();
    const MeasurementModel& model = *record.model;
    const Eigen::Index s = model.dim();
    if (rank < 1 || rank > s) throw InvalidArgument("mle_reconstruct: rank must lie in [1, dim]");
    if (!(options.damping > 0.0 && options.damping <= 1.0)) {
        throw InvalidArgument("mle_reconstruct: damping must lie in (0, 1]");
    }

    CMatrix psi;
    if (options.initial) {
        if (options.initial->dim() != s || options.initial->rank() != rank) {
            throw InvalidArgument("mle_reconstruct: initial state has the wrong shape");
        }
        psi = options.initial->psi();
    } else {
        psi = random_start(s, rank, options.seed);
    }

    IterationState best = iterate(record, std::move(psi), options, options.max_iterations);
    std::int64_t used = best.iterations;
    std::int64_t backtracks = best.backtracks;
    int escapes = 0;
    while (best.converged && escapes < kMaxEscapes && used < options.max_iterations) {
        CMatrix start = escape_direction(record, best, options.probability_floor);
        if (start.size() == 0) break;
        ++escapes;
        IterationState trial = iterate(record, std::move(start), options, options.max_iterations - used);
        used += trial.iterations;
        backtracks += trial.backtracks;
        if (!(trial.ll > best.ll + 1e-9 * std::max(1.0, std::abs(best.ll)))) break;
        best = std::move(trial);
    }

    for (std::size_t j = 0; j < model.operator_count(); ++j) {
        if (record.counts[j] > 0.0 && best.p[j] < options.probability_floor) {
            throw DegenerateModel("mle_reconstruct: outcome " + std::to_string(j) +
                                  " has counts but vanishing model probability");
        }
    }

    MleResult result{PurifiedState(best.psi / best.psi.norm()), used, best.converged, best.step, best.ll,
                     backtracks};
    result.escapes = escapes;
    return result;
}

ChiSquaredReport chi_squared_test(const PurifiedState& psi_hat, const ExperimentRecord& record) {
    record.validate();
    const auto& model = *record.model;
    const auto s = static_cast<int>(model.dim());
    const auto r = static_cast<int>(psi_hat.rank());
    const auto l = static_cast<int>(model.config_count());

    ChiSquaredReport rep;
    rep.nu_p = (2 * s - r) * r - 1;
    rep.nu_norm = l;
    rep.nu = l * s - rep.nu_p - rep.nu_norm;
    if (rep.nu <= 0) {
        throw DegenerateModel("chi_squared_test: " + std::to_string(rep.nu) +
                              " degrees of freedom; the model is over-parameterized for this protocol");
    }

    const auto p = outcome_probabilities(psi_hat, model);
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double expected = record.trials[j] * p[j];
        if (expected < kZeroExpectation) {
            if (record.counts[j] > 0.0) {
                throw DegenerateModel("chi_squared_test: outcome " + std::to_string(j) +
                                      " observed but has zero expectation");
            }
            ++rep.excluded_terms;
            continue;
        }
        const double diff = record.counts[j] - expected;
        rep.chi2 += diff * diff / expected;
    }
    rep.p_value = chi_squared_survival(rep.chi2, rep.nu);
    return rep;
}

}  // namespace fuzzytomo
