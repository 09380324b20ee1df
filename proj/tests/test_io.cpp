#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fuzzytomo/errors.hpp"
#include "fuzzytomo/io.hpp"
#include "fuzzytomo/rng.hpp"
#include "test_support.hpp"

using namespace fuzzytomo;
using fuzzytomo::testing::kPi;
namespace fio = fuzzytomo::io;

TEST_CASE("complex and matrix encodings") {
    const Complex z(0.25, -1.5);
    CHECK(fio::complex_to_json(z) == fio::json::array({0.25, -1.5}));
    CHECK(fio::complex_from_json(fio::json::array({0.25, -1.5})) == z);
    CHECK_THROWS_AS(fio::complex_from_json(fio::json::array({1.0})), InvalidArgument);

    std::mt19937_64 rng(71);
    const CMatrix m = fuzzytomo::testing::random_complex(2, 3, rng);
    const auto j = fio::matrix_to_json(m);
    CHECK(j.size() == 2);
    CHECK(j[0].size() == 3);
    CHECK(fio::matrix_from_json(j) == m);
}

TEST_CASE("counts files round trip") {
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        fio::CountsFile f;
        f.model = trial % 2 == 0 ? ModelKind::fuzzy : ModelKind::ideal_projective;
        f.plates = design_plates(5 + trial % 10, 0.6 + 0.1 * u(rng));
        f.lambda0_um = 0.6 + 0.1 * u(rng);
        f.bandwidth_um = 0.02 * u(rng);
        f.spectral_samples = 1 + trial;
        const int l = 2 + trial % 4;
        for (int c = 0; c < l; ++c) {
            f.configs.emplace_back(kPi * u(rng), kPi * u(rng));
            const double n = std::floor(1 + 1e6 * u(rng));
            const double k = std::floor(n * u(rng));
            f.trials.push_back(n);
            f.k0.push_back(k);
            f.k1.push_back(n - k);
        }
        if (trial % 3 == 0) f.true_state = fuzzytomo::testing::random_pure(2, rng).amplitudes();

        const auto text = fio::counts_to_json(f).dump();
        const auto back = fio::counts_from_json(fio::json::parse(text));
        CHECK(back.model == f.model);
        CHECK(back.plates.hwp.thickness_um() == f.plates.hwp.thickness_um());
        CHECK(back.plates.qwp.thickness_um() == f.plates.qwp.thickness_um());
        CHECK(back.lambda0_um == f.lambda0_um);
        CHECK(back.bandwidth_um == f.bandwidth_um);
        CHECK(back.spectral_samples == f.spectral_samples);
        CHECK(back.configs == f.configs);
        CHECK(back.trials == f.trials);
        CHECK(back.k0 == f.k0);
        CHECK(back.k1 == f.k1);
        CHECK(back.true_state.has_value() == f.true_state.has_value());
        if (f.true_state) CHECK(*back.true_state == *f.true_state);
        CHECK(fio::counts_to_json(back).dump() == text);
    }
}

TEST_CASE("counts file errors name the field") {
    auto j = fio::json::parse(R"({"schema": "fuzzytomo.counts/1", "plates": {"hwp": {"thickness_um": 756}, "qwp": {"thickness_um": 738}},
        "spectrum": {"lambda0_um": 0.65, "bandwidth_um": 0.0},
        "configs": [{"alpha": 0.1, "beta": 0.2, "n": 10, "k0": 4}]})");
    try {
        (void)fio::counts_from_json(j);
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("k1") != std::string::npos);
    }
    j["configs"][0]["k1"] = 6;
    CHECK_NOTHROW(fio::counts_from_json(j));
    j["schema"] = "other/2";
    CHECK_THROWS_AS(fio::counts_from_json(j), InvalidArgument);
}

TEST_CASE("counts file builds a valid record") {
    fio::CountsFile f;
    f.configs = cube_protocol().configs;
    f.trials = {100, 100, 100};
    f.k0 = {50, 60, 70};
    f.k1 = {50, 40, 30};
    const auto rec = f.to_record();
    CHECK(rec.model->config_count() == 3);
    CHECK(rec.total_trials() == 300);
    f.k1[0] = 49;
    CHECK_THROWS_AS(f.to_record(), InvalidArgument);
}

TEST_CASE("metadata and hashing") {
    const fio::json a{{"seed", 1}, {"protocol", "cube"}};
    const fio::json b{{"protocol", "cube"}, {"seed", 1}};
    const fio::json c{{"protocol", "cube"}, {"seed", 2}};
    CHECK(fio::config_hash(a) == fio::config_hash(b));
    CHECK(fio::config_hash(a) != fio::config_hash(c));
    CHECK(fio::config_hash(a).size() == 16);
    const auto meta = fio::csv_metadata(a, 1);
    CHECK(meta.rfind("# ", 0) == 0);
    CHECK(meta.find("config_hash=" + fio::config_hash(a)) != std::string::npos);
    CHECK(meta.find("seed=1") != std::string::npos);
    CHECK(meta.back() == '\n');
    const auto mj = fio::metadata_json(a, 1);
    CHECK(mj.at("schema") == "fuzzytomo/1");
    CHECK(mj.at("rng") == std::string(kRngAlgorithm));
}

TEST_CASE("summary histograms account for every experiment") {
    const SimulationPlan plan{.true_state = bloch_to_state({kPi / 2, 0.0, 0.0}),
                              .protocol = cube_protocol(),
                              .plates = PlatePair{},
                              .n_tot_values = {1000},
                              .n_experiments = 50,
                              .seed = 3};
    const auto s = run_comparison(plan, Execution::serial);
    const auto j = fio::summary_to_json(s);
    for (const auto& m : j.at("models")) {
        for (const char* key : {"infidelity_histogram", "chi2_histogram"}) {
            const auto& h = m.at(key);
            long total = h.at("underflow").get<long>() + h.at("overflow").get<long>() + h.at("invalid").get<long>();
            for (const auto& c : h.at("counts")) total += c.get<long>();
            CHECK(total == 50);
        }
    }
    const auto csv = fio::experiments_csv(s);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("n_tot,experiment,model,fidelity,chi2", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 100);
}

TEST_CASE("loss map encodings") {
    const auto m = build_model(ModelKind::fuzzy, cube_protocol().configs, PlatePair{}, spectral_grid(0.65, 0.01));
    const auto map = loss_map(m, GridSpec{.n_theta = 5, .n_phi = 8, .refine_rounds = 1});
    const auto csv = fio::loss_map_csv(map);
    CHECK(csv.rfind("theta,phi,L\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 40);
    const auto svg = fio::loss_map_svg(map, "cube");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    const auto j = fio::loss_map_to_json(map);
    CHECK(j.at("n_theta") == 5);
    CHECK(j.at("max").at("L").get<double>() == map.max.loss);
}

TEST_CASE("atomic writes replace the file") {
    const auto dir = std::filesystem::temp_directory_path() / "fuzzytomo_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    fio::write_atomic(path, "first");
    fio::write_atomic(path, "second");
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "second");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("number formatting") {
    CHECK(fio::format_double(1.0) == "1");
    CHECK(fio::format_double(1.7320508075688772) == "1.73205080757");
    CHECK(fio::format_double(std::nan("")) == "nan");
}
