#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oracles.hpp"
#include "tdlab/harness.hpp"

using namespace tdlab;

namespace {

ExperimentConfig small_sweep() {
    ExperimentConfig c = find_preset("fig2-mrp-constant");
    c.id = "small";
    c.n_states = 30;
    c.features = 8;
    c.runs = 4;
    c.steps = 200;
    c.record_every = 50;
    c.grid = {0.5, 2.5};
    return c;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

std::string plot_of(const SweepResult& r) {
    std::ostringstream os;
    write_plot_script(os, r, "x.csv");
    return os.str();
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string error_text(const std::string& config_text) {
    try {
        parse_config_text(config_text);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidConfig);
        return e.what();
    }
    return {};
}

} // namespace

// =============================================================================
// Config text
// =============================================================================

TEST(Config, RoundTripEveryPreset) {
    for (const auto& p : figure_presets()) {
        const std::string text = format_config(p);
        const ExperimentConfig back = parse_config_text(text);
        EXPECT_EQ(format_config(back), text) << p.id;
        EXPECT_EQ(config_hash(back), config_hash(p));
        EXPECT_EQ(back.grid, p.grid) << p.id;
    }
}

TEST(Config, CommentsSectionsAndRanges) {
    const auto c = parse_config_text(R"(
# a comment
[experiment]
id = demo   # trailing comment
runs = 3
[env]
kind = boyan
[learner]
algos = standard, implicit-proj:250
epsilon = 0.5
[sweep]
grid = 0.5:1.5:0.25
)");
    EXPECT_EQ(c.id, "demo");
    EXPECT_EQ(c.runs, 3);
    EXPECT_EQ(c.env, EnvKind::Boyan);
    EXPECT_EQ(c.grid, (std::vector<double>{0.5, 0.75, 1.0, 1.25, 1.5}));
    ASSERT_TRUE(c.epsilon.has_value());
    EXPECT_EQ(*c.epsilon, 0.5);
    const auto specs = c.algo_specs();
    ASSERT_EQ(specs.size(), 2u);
    EXPECT_EQ(specs[1].algo, Algorithm::ImplicitProjected);
    EXPECT_EQ(specs[1].projection.r_theta, 250.0);
    EXPECT_EQ(specs[0].projection.mode, ProjectionMode::None);
}

TEST(Config, ErrorsNameTheKeys) {
    const std::string msg = error_text("[experiment]\nruns = 0\n[learner]\nlambda = 1.0\n[sweep]\ngrid = \n");
    EXPECT_NE(msg.find("experiment.runs"), std::string::npos) << msg;
    EXPECT_NE(msg.find("learner.lambda"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sweep.grid"), std::string::npos) << msg;
    EXPECT_NE(error_text("[env]\ncolour = red\n").find("env.colour"), std::string::npos);
    EXPECT_NE(error_text("[experiment]\nsteps = many\n").find("experiment.steps"), std::string::npos);
    EXPECT_NE(error_text("[learner]\nalgos = sarsa\n").find("learner.algos"), std::string::npos);
}

TEST(Config, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "tdlab_config_test.ini";
    {
        std::ofstream out(path);
        out << format_config(small_sweep());
    }
    EXPECT_EQ(format_config(load_config(path)), format_config(small_sweep()));
    std::filesystem::remove(path);
    EXPECT_THROW(load_config(path), Error);
}

// =============================================================================
// Presets
// =============================================================================

TEST(Presets, FigureAnchors) {
    const auto fig2 = find_preset("fig2-mrp-constant");
    EXPECT_EQ(fig2.grid.front(), 0.1);
    EXPECT_EQ(fig2.grid.back(), 3.0);
    EXPECT_EQ(fig2.grid.size(), 30u);
    EXPECT_EQ(fig2.schedule.kind, ScheduleKind::Constant);
    EXPECT_EQ(fig2.lambda, 0.25);
    EXPECT_EQ(fig2.c_alpha, 1.0);
    EXPECT_EQ(fig2.runs, 50);
    EXPECT_EQ(fig2.steps, 2000);

    const auto fig3 = find_preset("fig3-boyan-decay");
    EXPECT_EQ(fig3.schedule.s, 0.99);
    EXPECT_EQ(fig3.schedule.kind, ScheduleKind::Poly);
    EXPECT_EQ(fig3.env, EnvKind::Boyan);

    const auto fig4 = find_preset("fig4-control");
    EXPECT_EQ(fig4.schedule.offset, 400);
    EXPECT_EQ(fig4.schedule.kind, ScheduleKind::OffsetPoly);
    EXPECT_EQ(fig4.grid, (std::vector<double>{0.25, 0.5, 0.75, 1.0, 1.25, 1.5}));
    EXPECT_EQ(fig4.runs, 30);
    EXPECT_EQ(fig4.steps, 15000);

    const auto ca = find_preset("calpha-mrp");
    EXPECT_EQ(ca.axis, SweepAxis::CAlpha);
    EXPECT_EQ(ca.grid.front(), 0.01);
    EXPECT_EQ(ca.grid.back(), 1.5);
}

TEST(Presets, AllValidAndUnique) {
    std::set<std::string> ids;
    for (const auto& p : figure_presets()) {
        EXPECT_NO_THROW(p.validate()) << p.id;
        EXPECT_TRUE(ids.insert(p.id).second) << p.id;
    }
}

TEST(Presets, Unknown) {
    try {
        find_preset("fig9");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnknownPreset);
    }
}

TEST(Presets, DeskScale) {
    const auto desk = desk_scale(find_preset("fig2-mrp-constant"));
    EXPECT_EQ(desk.runs, 25);
    EXPECT_EQ(desk.grid.front(), 0.1);
    EXPECT_EQ(desk.grid.back(), 3.0);
    EXPECT_EQ(desk.grid.size(), 16u);
    auto one = find_preset("fig1-trajectory");
    one.runs = 1;
    EXPECT_EQ(desk_scale(one).runs, 1);
    EXPECT_EQ(desk_scale(one).grid, one.grid);
}

// =============================================================================
// Aggregation
// =============================================================================

TEST(Summarize, SingleRunHasZeroSpread) {
    CellSummary cell;
    summarize(cell, {3.5});
    EXPECT_EQ(cell.mean, 3.5);
    EXPECT_EQ(cell.sd, 0.0);
    EXPECT_EQ(cell.ci_half_width, 0.0);
}

TEST(Summarize, ConstantValues) {
    CellSummary cell;
    summarize(cell, std::vector<double>(7, 0.125));
    EXPECT_EQ(cell.mean, 0.125);
    EXPECT_EQ(cell.sd, 0.0);
}

TEST(Summarize, AgreesWithStreamingPass) {
    Rng rng(1);
    std::lognormal_distribution<double> dist(0.0, 2.0);
    for (int n : {2, 3, 10, 50, 1000}) {
        std::vector<double> v;
        oracle::Streaming s;
        for (int i = 0; i < n; ++i) {
            v.push_back(dist(rng));
            s.add(v.back());
        }
        CellSummary cell;
        summarize(cell, v);
        EXPECT_NEAR(cell.mean, s.mean, 1e-12 * std::max(1.0, std::abs(s.mean)));
        EXPECT_NEAR(cell.sd, s.sd(), 1e-12 * std::max(1.0, s.sd()));
        EXPECT_NEAR(cell.ci_half_width, 1.96 * s.sd() / std::sqrt(double(n)), 1e-12 * std::max(1.0, s.sd()));
    }
}

TEST(Sweep, CellsMatchTheirRuns) {
    const auto r = run_sweep(small_sweep(), 2);
    ASSERT_EQ(r.cells.size(), 4u * 2u);
    for (const auto& cell : r.cells) {
        ASSERT_EQ(cell.runs.size(), 4u);
        oracle::Streaming s;
        long diverged = 0;
        for (const auto& run : cell.runs) {
            s.add(run.value);
            diverged += run.diverged;
            EXPECT_EQ(run.value, run.metric.back());
            EXPECT_LE(run.max_trace_norm, 1.0 / 0.75 + 1e-12);
        }
        EXPECT_EQ(cell.diverged, diverged);
        EXPECT_LE(cell.diverged, 4);
        EXPECT_NEAR(cell.mean, s.mean, 1e-12 * std::max(1.0, std::abs(s.mean)));
        EXPECT_NEAR(cell.sd, s.sd(), 1e-12 * std::max(1.0, s.sd()));
        EXPECT_NEAR(cell.ci_half_width, 1.96 * cell.sd / 2.0, 1e-12 * std::max(1.0, cell.sd));
    }
}

TEST(Sweep, PairedRunsShareStreams) {
    const auto r = run_sweep(small_sweep(), 1);
    // first recorded loss depends only on initial weights, identical across algorithms
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t run = 0; run < 4; ++run) {
            const double first = r.cells[g].runs[run].metric.front();
            for (std::size_t a = 1; a < 4; ++a)
                EXPECT_EQ(r.cells[a * 2 + g].runs[run].metric.front(), first);
        }
}

TEST(Sweep, ControlSweepRecordsRewards) {
    ExperimentConfig c = find_preset("fig4-control");
    c.runs = 2;
    c.steps = 400;
    c.record_every = 100;
    c.grid = {1.0};
    c.algos = {"implicit"};
    const auto r = run_sweep(c, 1);
    ASSERT_EQ(r.cells.size(), 1u);
    for (const auto& run : r.cells[0].runs) {
        EXPECT_EQ(run.t, (std::vector<long>{100, 200, 300, 400}));
        EXPECT_GE(run.value, 0.0);
        EXPECT_LE(run.value, 1.0);
    }
}

TEST(Sweep, SeedsAreDistinctAcrossPreset) {
    const auto p = find_preset("fig2-mrp-constant");
    std::set<std::vector<std::uint64_t>> firsts;
    std::set<std::uint64_t> seeds;
    for (double g : p.grid)
        for (long run = 0; run < p.runs; ++run) {
            const auto seed = run_seed(p, g, run);
            seeds.insert(seed);
            Rng rng(derive_seed(seed, "init"));
            firsts.insert({rng(), rng(), rng(), rng()});
        }
    const auto expected = p.grid.size() * static_cast<std::size_t>(p.runs);
    EXPECT_EQ(seeds.size(), expected);
    EXPECT_EQ(firsts.size(), expected);
}

TEST(Sweep, WorkerCountDoesNotChangeBytes) {
    const auto c = small_sweep();
    const auto a = run_sweep(c, 1);
    const auto b = run_sweep(c, 3);
    EXPECT_EQ(csv_of(a), csv_of(b));
    std::ostringstream ma, mb;
    write_meta(ma, a, "small", false);
    write_meta(mb, b, "small", false);
    EXPECT_EQ(ma.str(), mb.str());
}

TEST(Sweep, SharedProblemIsIndependentOfId) {
    auto a = small_sweep();
    auto b = small_sweep();
    b.id = "other";
    const auto pa = make_shared_problem(a);
    const auto pb = make_shared_problem(b);
    EXPECT_EQ(pa.chain.transition, pb.chain.transition);
    EXPECT_EQ(pa.oracle.omega, pb.oracle.omega);
    a.env = EnvKind::Access;
    EXPECT_THROW(make_shared_problem(a), Error);
}

TEST(Sweep, WorkersFromEnvironment) {
    ::setenv("TDLAB_WORKERS", "3", 1);
    EXPECT_EQ(default_workers(), 3u);
    ::setenv("TDLAB_WORKERS", "zero", 1);
    EXPECT_THROW(default_workers(), Error);
    ::unsetenv("TDLAB_WORKERS");
    EXPECT_GE(default_workers(), 1u);
}

// =============================================================================
// Outputs
// =============================================================================

TEST(Csv, EmptyResultIsHeaderOnly) {
    SweepResult empty;
    EXPECT_EQ(csv_of(empty), "experiment,algo,beta0,run,t,metric,diverged\n");
    empty.config.axis = SweepAxis::CAlpha;
    EXPECT_EQ(csv_of(empty), "experiment,algo,c_alpha,run,t,metric,diverged\n");
}

TEST(Csv, RoundTripAndRowCount) {
    const auto r = run_sweep(small_sweep(), 1);
    const auto rows = split_csv(csv_of(r));
    std::size_t expected = 0;
    for (const auto& cell : r.cells)
        for (const auto& run : cell.runs)
            expected += run.t.size();
    ASSERT_EQ(rows.size(), expected + 1);
    EXPECT_EQ(r.cells[0].runs[0].t, (std::vector<long>{0, 50, 100, 150, 200}));

    std::size_t i = 1;
    for (const auto& cell : r.cells)
        for (const auto& run : cell.runs)
            for (std::size_t k = 0; k < run.t.size(); ++k, ++i) {
                const auto& row = rows[i];
                ASSERT_EQ(row.size(), 7u);
                EXPECT_EQ(row[0], "small");
                EXPECT_EQ(row[1], cell.algo);
                EXPECT_EQ(std::stod(row[2]), cell.axis_value);
                EXPECT_EQ(std::stol(row[3]), run.run);
                EXPECT_EQ(std::stol(row[4]), run.t[k]);
                EXPECT_EQ(std::stod(row[5]), run.metric[k]);
                EXPECT_EQ(row[6], run.truncation_index >= 0 && run.t[k] > run.truncation_index ? "1" : "0");
            }
}

TEST(Csv, SeventeenDigits) {
    EXPECT_EQ(format_g17(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(std::stod(format_g17(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(PlotScript, DeterministicAndOneSeriesPerAlgo) {
    const auto r = run_sweep(small_sweep(), 1);
    const std::string a = plot_of(r);
    EXPECT_EQ(a, plot_of(run_sweep(small_sweep(), 2)));
    EXPECT_NE(a.find("ALGOS = [\"standard\", \"implicit\", \"implicit-proj:1000\", \"implicit-proj:5000\"]"),
              std::string::npos);
    EXPECT_NE(a.find("CSV = os.path.join(HERE, \"x.csv\")"), std::string::npos);
    EXPECT_NE(a.find("LOG_Y = True"), std::string::npos);
    EXPECT_NE(a.find("ax.legend()"), std::string::npos);

    SweepResult linear = r;
    linear.config.log_y = false;
    EXPECT_NE(plot_of(linear).find("LOG_Y = False"), std::string::npos);
}

TEST(Meta, EchoesConfig) {
    const auto r = run_sweep(small_sweep(), 1);
    std::ostringstream os;
    write_meta(os, r, "small", true);
    const auto j = nlohmann::json::parse(os.str());
    EXPECT_EQ(j["preset"], "small");
    EXPECT_EQ(j["desk_scale"], true);
    EXPECT_EQ(j["config_hash"], config_hash(r.config));
    EXPECT_EQ(j["config"], format_config(r.config));
    EXPECT_EQ(j["version"], std::string(version_string()));
    EXPECT_EQ(j["summary"].size(), r.cells.size());
}

TEST(Emit, WritesThreeFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "tdlab_emit_test";
    std::filesystem::remove_all(dir);
    auto c = small_sweep();
    c.runs = 1;
    const auto r = run_sweep(c, 1);
    emit_all(r, dir, "small", false);
    for (const char* ext : {".csv", ".plot", ".meta.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / (std::string("small") + ext))) << ext;
    std::ifstream in(dir / "small.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), csv_of(r));
    std::filesystem::remove_all(dir);
}
