#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plab/experiment.hpp"
#include "plab/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace plab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "plab_io" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_config(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

} // namespace

TEST_CASE("csv round trip and byte determinism") {
    const auto dir = fresh_dir("csv");
    CsvTable t;
    t.header = {"tau", "value"};
    t.rows = {{1.0, 0.1}, {2.0, 1.0 / 3.0}, {3.5, 1e-15}};
    const auto p1 = dir / "a.csv", p2 = dir / "b.csv";
    t.save(p1.string());
    t.save(p2.string());
    CHECK(read_text_file(p1.string()) == read_text_file(p2.string()));
    const CsvTable back = CsvTable::load(p1.string());
    REQUIRE(back.rows.size() == 3);
    CHECK(back.rows[1][1] == doctest::Approx(1.0 / 3.0).epsilon(1e-16));
    CHECK(back.header[0] == "tau");
}

TEST_CASE("manifest fields") {
    const auto dir = fresh_dir("manifest");
    Manifest man;
    man.model_hash = hash_hex("model");
    man.config_hash = hash_hex("config");
    man.seed = 42;
    man.save((dir / "manifest.json").string());
    const std::string text = read_text_file((dir / "manifest.json").string());
    CHECK(text.find("model_hash") != std::string::npos);
    CHECK(text.find(hash_hex("config")) != std::string::npos);
    CHECK(text.find("42") != std::string::npos);
    CHECK(text.find("pullback-lab") != std::string::npos);
}

TEST_CASE("decay plot: exact exponential collinear with its overlay") {
    const auto dir = fresh_dir("plot");
    CsvTable t;
    t.header = {"tau", "d"};
    for (int k = 1; k <= 10; ++k)
        t.rows.push_back({1.0 * k, 5.0 * std::exp(-0.3 * k)});
    const auto csv = dir / "exp.csv";
    t.save(csv.string());
    const RateFit fit = emit_decay_plot(csv.string(), (dir / "exp.svg").string());
    CHECK(fit.C_hat == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(fit.omega_hat == doctest::Approx(0.3).epsilon(1e-10));

    // every plotted point within one pixel of the fitted line
    const PlotFrame fr = plot_frame(t, {});
    for (const auto& row : t.rows) {
        const double y_pt = fr.y_of(std::log10(row[1]));
        const double y_line =
            fr.y_of((std::log(fit.C_hat) - fit.omega_hat * row[0]) / std::log(10.0));
        CHECK(std::abs(y_pt - y_line) < 1.0);
    }

    const std::string svg = read_text_file((dir / "exp.svg").string());
    CHECK(svg.find("fit: C=") != std::string::npos);
    CHECK(svg.find("omega=") != std::string::npos);

    // byte determinism
    emit_decay_plot(csv.string(), (dir / "exp2.svg").string());
    CHECK(read_text_file((dir / "exp.svg").string()) ==
          read_text_file((dir / "exp2.svg").string()));
}

TEST_CASE("decay plot rejects empty and malformed tables") {
    const auto dir = fresh_dir("plot_bad");
    write_config(dir / "empty.csv", "tau,d\n");
    CHECK_THROWS_AS(emit_decay_plot((dir / "empty.csv").string(), (dir / "x.svg").string()),
                    IoError);
    write_config(dir / "bad.csv", "tau,d\n1.0,zebra\n");
    CHECK_THROWS_AS(emit_decay_plot((dir / "bad.csv").string(), (dir / "y.svg").string()),
                    IoError);
}

TEST_CASE("experiment driver: validate on the benchmark then on a designed failure") {
    const auto dir = fresh_dir("validate");
    write_config(dir / "ok.json", R"json({"command":"validate","model":"default","mu0":0.5})json");
    const auto ok = run_experiment((dir / "ok.json").string(), (dir / "out_ok").string());
    CHECK(ok.exit_code == kExitOk);
    CHECK(fs::exists(dir / "out_ok" / "hypothesis_report.json"));
    CHECK(fs::exists(dir / "out_ok" / "ledger.txt"));
    CHECK(fs::exists(dir / "out_ok" / "manifest.json"));

    write_config(dir / "bad.json", R"json({"command":"validate","model":"fail-H4"})json");
    const auto bad = run_experiment((dir / "bad.json").string(), (dir / "out_bad").string());
    CHECK(bad.exit_code == kExitHypothesisFailure);
    const std::string rep = read_text_file((dir / "out_bad" / "hypothesis_report.json").string());
    CHECK(rep.find("\"h4\": false") != std::string::npos);
}

TEST_CASE("experiment driver: cstar refutation and certification") {
    const auto dir = fresh_dir("cstar");
    write_config(dir / "refute.json",
                 R"json({"command":"cstar","expression":"exp(-1)","alphas":[0.5],"t_anchors":[0.0],)json"
                 R"json("tau_max":60.0})json");
    const auto refuted = run_experiment((dir / "refute.json").string(), (dir / "out_r").string());
    CHECK(refuted.exit_code == kExitInvariantViolation);
    const std::string verdict = read_text_file((dir / "out_r" / "verdict.json").string());
    CHECK(verdict.find("refuted") != std::string::npos);
    CHECK(verdict.find("\"alpha\": 0.5") != std::string::npos);
    CHECK(fs::exists(dir / "out_r" / "witnesses.csv"));

    write_config(dir / "cert.json",
                 R"json({"command":"cstar","expression":"const(1) + abs","tau_max":1500.0})json");
    const auto cert = run_experiment((dir / "cert.json").string(), (dir / "out_c").string());
    CHECK(cert.exit_code == kExitOk);
}

TEST_CASE("experiment driver: simulate is deterministic for a fixed seed") {
    const auto dir = fresh_dir("simulate");
    write_config(dir / "sim.json",
                 R"json({"command":"simulate","model":"default","s":0.0,"horizon":2.0,)json"
                 R"json("initial":"ball","radius":5.0,"seed":11,"record_stride":100})json");
    const auto first = run_experiment((dir / "sim.json").string(), (dir / "out1").string());
    CHECK(first.exit_code == kExitOk);
    const auto second = run_experiment((dir / "sim.json").string(), (dir / "out2").string());
    CHECK(second.exit_code == kExitOk);
    CHECK(read_text_file((dir / "out1" / "trajectory.csv").string()) ==
          read_text_file((dir / "out2" / "trajectory.csv").string()));
    const CsvTable traj = CsvTable::load((dir / "out1" / "trajectory.csv").string());
    REQUIRE(traj.header.size() == 5);
    CHECK(traj.header[0] == "t");
    CHECK(traj.header[3] == "E");
}

TEST_CASE("experiment driver: parse failures and command mismatch") {
    const auto dir = fresh_dir("errors");
    write_config(dir / "broken.json", "{not json");
    CHECK(run_experiment((dir / "broken.json").string(), (dir / "o1").string()).exit_code ==
          kExitParseError);
    write_config(dir / "mismatch.json", R"json({"command":"validate","model":"default"})json");
    CHECK(run_experiment((dir / "mismatch.json").string(), (dir / "o2").string(), std::nullopt,
                         "kappa")
              .exit_code == kExitParseError);
    write_config(dir / "unknown.json", R"json({"command":"dance"})json");
    CHECK(run_experiment((dir / "unknown.json").string(), (dir / "o3").string()).exit_code ==
          kExitParseError);
}
