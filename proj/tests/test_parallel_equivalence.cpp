#include <doctest.h>

#include <cmath>
#include <cstring>

#include <omp.h>

#include "fuzzytomo/montecarlo.hpp"
#include "test_support.hpp"

using namespace fuzzytomo;
using fuzzytomo::testing::kPi;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

struct ThreadCount {
    explicit ThreadCount(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~ThreadCount() { omp_set_num_threads(saved); }
    int saved;
};

}  // namespace

TEST_CASE("loss map kernels agree bit for bit") {
    const ThreadCount threads(4);
    for (double bw : {0.0, 0.01}) {
        const auto m = build_model(ModelKind::fuzzy, octahedron_protocol().configs, PlatePair{}, spectral_grid(0.65, bw));
        const GridSpec spec{.n_theta = 20, .n_phi = 40};
        const auto a = loss_map(m, spec, Execution::serial);
        const auto b = loss_map(m, spec, Execution::parallel);
        REQUIRE(a.loss.size() == b.loss.size());
        for (std::size_t i = 0; i < a.loss.size(); ++i) CHECK(same_bits(a.loss[i], b.loss[i]));
        CHECK(a.degenerate_points == b.degenerate_points);
        CHECK(same_bits(a.min.loss, b.min.loss));
        CHECK(same_bits(a.max.loss, b.max.loss));
        CHECK(same_bits(a.max.theta, b.max.theta));
        CHECK(same_bits(a.max.phi, b.max.phi));
    }
}

TEST_CASE("bandwidth sweeps agree bit for bit") {
    const ThreadCount threads(3);
    const GridSpec spec{.n_theta = 12, .n_phi = 24};
    const auto a = bandwidth_sweep(cube_protocol().configs, PlatePair{}, 0.65, {0.0, 0.005, 0.01}, spec, 65,
                                   Execution::serial);
    const auto b = bandwidth_sweep(cube_protocol().configs, PlatePair{}, 0.65, {0.0, 0.005, 0.01}, spec, 65,
                                   Execution::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_bits(a[i].loss_min, b[i].loss_min));
        CHECK(same_bits(a[i].loss_max, b[i].loss_max));
        CHECK(same_bits(a[i].condition_number, b[i].condition_number));
    }
}

TEST_CASE("comparison runs agree bit for bit") {
    const ThreadCount threads(4);
    const SimulationPlan plan{.true_state = bloch_to_state({kPi / 2, 0.0, 0.0}),
                              .protocol = cube_protocol(),
                              .plates = PlatePair{},
                              .true_bandwidth_um = 0.01,
                              .n_tot_values = {1000, 20000},
                              .n_experiments = 64,
                              .seed = 99};
    const auto a = run_comparison(plan, Execution::serial);
    const auto b = run_comparison(plan, Execution::parallel);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(same_bits(a.rows[i].fidelity, b.rows[i].fidelity));
        CHECK(same_bits(a.rows[i].chi2, b.rows[i].chi2));
        CHECK(a.rows[i].iterations == b.rows[i].iterations);
    }
    REQUIRE(a.models.size() == b.models.size());
    for (std::size_t i = 0; i < a.models.size(); ++i) {
        CHECK(same_bits(a.models[i].fidelity_q50, b.models[i].fidelity_q50));
        CHECK(same_bits(a.models[i].mean_chi2, b.models[i].mean_chi2));
        CHECK(same_bits(a.models[i].chi2_ks.p_value, b.models[i].chi2_ks.p_value));
        CHECK(a.models[i].infidelity_histogram.counts == b.models[i].infidelity_histogram.counts);
    }
}
