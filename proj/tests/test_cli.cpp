#include <set>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "topoprior/loss.hpp"
#include "topoprior/synth.hpp"

using namespace topoprior;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct Workspace {
    std::filesystem::path dir;
    explicit Workspace(const std::string& name) : dir(testing::scratch("cli_" + name)) {}
    std::string put(const std::string& name, const ScalarField& f) {
        const auto p = dir / name;
        save_field(f, p, format_from_extension(p));
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

void check_bar_schema(const json& j) {
    REQUIRE(j.is_array());
    for (const auto& bar : j) {
        CHECK(bar.size() == 6);
        CHECK(bar.at("dim").is_number_integer());
        CHECK(bar.at("birth").is_number());
        CHECK(bar.at("death").is_number());
        CHECK(bar.at("birth_pixel").is_number_unsigned());
        CHECK(bar.at("essential").is_boolean());
        CHECK(bar.at("death_pixel").is_null() == bar.at("essential").get<bool>());
    }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("barcode of a constant field is one csv line") {
    Workspace ws("barcode_const");
    const auto in = ws.put("c.csv", ScalarField::constant(Shape{3, 3}, 0.7));
    const auto r = run({"barcode", "--in", in, "--emit", "csv"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out == "0,0.7,0,0,,true\n");
}

TEST_CASE("barcode of a ring has two lines and writes to --out") {
    Workspace ws("barcode_ring");
    const auto in = ws.put("ring.npy", testing::ring_field());
    const auto out = ws.path("bars.csv");
    const auto r = run({"barcode", "--in", in, "--format", "npy", "--out", out, "--emit", "csv"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.empty());
    const auto text = testing::slurp(out);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.rfind("0,", 0) == 0);
    CHECK(text.find("\n1,") != std::string::npos);
}

TEST_CASE("barcode json of a 3D volume covers dims 0, 1 and 2") {
    Workspace ws("barcode_3d");
    const auto in = ws.put("v.npy", testing::random_field(Shape{4, 4, 4}, 3));
    const auto r = run({"barcode", "--in", in});
    REQUIRE(r.code == cli::kOk);
    const auto j = json::parse(r.out);
    check_bar_schema(j);
    std::set<int> dims;
    for (const auto& bar : j) dims.insert(bar["dim"].get<int>());
    CHECK(dims == std::set<int>{0, 1, 2});
}

TEST_CASE("barcode svg and the reduction engine") {
    Workspace ws("barcode_svg");
    const auto in = ws.put("r.pgm", testing::ring_field());
    const auto r = run({"barcode", "--in", in, "--emit", "svg"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.rfind("<svg", 0) == 0);
    const auto a = run({"barcode", "--in", in, "--engine", "reduction"});
    const auto b = run({"barcode", "--in", in});
    CHECK(a.out == b.out);
}

TEST_CASE("betti examples") {
    Workspace ws("betti");
    const auto ring = ws.put("ring.csv", testing::ring_field());
    CHECK(run({"betti", "--in", ring}).out == "1 1\n");
    CHECK(run({"betti", "--in", ring, "--threshold", "0.5"}).out == "1 1\n");
    CHECK(run({"betti", "--in", ring, "--threshold", "1.01"}).out == "0 0\n");
    const auto c = ws.put("c.csv", ScalarField::constant(Shape{4, 4}, 0.7));
    const auto r = run({"betti", "--in", c, "--threshold", "0.5"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out == "1 0\n");
}

TEST_CASE("loss examples") {
    Workspace ws("loss");
    const auto ring = ws.put("ring.csv", testing::ring_field());
    const auto c = ws.put("c.csv", ScalarField::constant(Shape{4, 4}, 0.6));
    CHECK(json::parse(run({"loss", "--in", ring, "--betti", "1,1"}).out)["loss"] == 0.0);
    CHECK(json::parse(run({"loss", "--in", c, "--betti", "1,0"}).out)["loss"] == 0.64);
    const auto j = json::parse(run({"loss", "--in", c, "--betti", "0,0"}).out);
    CHECK(j["loss"] == 0.36);
    CHECK(j["grad"] == json::array({json::array({0, 1.2})}));
    CHECK(j["matched"]["0"]["unwanted"] == json::array({1}));
}

TEST_CASE("loss weights, windows and output file") {
    Workspace ws("loss_flags");
    const auto f = ws.put("f.npy", testing::random_field(Shape{6, 6}, 2));
    const auto base = json::parse(run({"loss", "--in", f, "--betti", "1,0", "--weights", "1,0"}).out);
    const auto twice = json::parse(run({"loss", "--in", f, "--betti", "1,0", "--weights", "2,0"}).out);
    CHECK(twice["loss"].get<double>() == doctest::Approx(2 * base["loss"].get<double>()));
    const auto out = ws.path("loss.json");
    CHECK(run({"loss", "--in", f, "--betti", "1,0", "--window", "-,3", "--out", out}).code == cli::kOk);
    const auto windowed = json::parse(testing::slurp(out));
    CHECK(windowed["matched"]["1"]["ignored"].size() <= 3);
    CHECK(windowed["matched"]["1"]["wanted"].empty());
}

TEST_CASE("refine leaves solved inputs alone and writes a trace") {
    Workspace ws("refine");
    const auto ring = ws.put("ring.npy", testing::ring_field());
    const auto out = ws.path("out.npy"), trace = ws.path("trace.csv");
    const auto r = run({"refine", "--in", ring, "--betti", "1,1", "--out", out, "--trace", trace});
    REQUIRE(r.code == cli::kOk);
    const auto summary = json::parse(r.out);
    CHECK(summary["iterations"] == 1);
    CHECK(summary["topology_ok"] == true);
    const auto refined = load_field(out, FieldFormat::npy);
    const auto original = testing::ring_field();
    CHECK(std::equal(refined.values().begin(), refined.values().end(), original.values().begin()));
    const auto text = testing::slurp(trace);
    CHECK(text.rfind("iter,fidelity,topo,total,wall_ms\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("refine with lambda 0 returns the input") {
    Workspace ws("refine_l0");
    const auto f = testing::random_field(Shape{6, 6}, 4);
    const auto in = ws.put("f.npy", f);
    const auto out = ws.path("g.npy");
    CHECK(run({"refine", "--in", in, "--betti", "1,1", "--lambda", "0", "--out", out}).code == cli::kOk);
    const auto g = load_field(out, FieldFormat::npy);
    CHECK(std::equal(f.values().begin(), f.values().end(), g.values().begin()));
}

TEST_CASE("refine fixes a noisy ring") {
    Workspace ws("refine_noisy");
    const auto f = generate(ring(16, 0.2, 1004));
    const auto in = ws.put("noisy.npy", f);
    const auto out = ws.path("fixed.npy");
    const auto r = run({"refine", "--in", in, "--betti", "1,1", "--lambda", "0.01", "--lr", "0.05", "--iters", "500",
                        "--tol", "1e-9", "--out", out});
    REQUIRE(r.code == cli::kOk);
    CHECK(check_topology(load_field(out, FieldFormat::npy), BettiPrior({1, 1})));
}

TEST_CASE("refine divergence exits 3 and keeps the partial field") {
    Workspace ws("refine_div");
    const auto in = ws.put("noisy.npy", generate(ring(16, 0.2, 1000)));
    const auto out = ws.path("partial.npy");
    const auto r = run({"refine", "--in", in, "--betti", "1,1", "--lambda", "0.5", "--lr", "100",
                        "--divergence-window", "2", "--out", out});
    CHECK(r.code == cli::kFailure);
    CHECK(r.err.find("diverged") != std::string::npos);
    CHECK(std::filesystem::exists(out));
}

TEST_CASE("verify exit codes") {
    Workspace ws("verify");
    const auto small = ws.put("small.csv", testing::random_field(Shape{6, 6}, 8));
    const auto ok = run({"verify", "--in", small});
    CHECK(ok.code == cli::kOk);
    CHECK(json::parse(ok.out)["ok"] == true);

    const auto ring = ws.put("ring.csv", testing::ring_field());
    const auto bad = run({"verify", "--in", ring, "--inject-fault", "mirror-ties"});
    CHECK(bad.code == cli::kFailure);
    CHECK_FALSE(json::parse(bad.out)["differences"].empty());

    const auto big = ws.put("big.npy", ScalarField::constant(Shape{200, 200}, 0.5));
    const auto guard = run({"verify", "--in", big});
    CHECK(guard.code == cli::kUsage);
    CHECK(guard.err.find("limited to") != std::string::npos);
}

TEST_CASE("synth writes a deterministic field") {
    Workspace ws("synth");
    const std::string spec =
        R"({"shape": [24, 24], "seed": 1, "noise": {"type": "gaussian", "sigma": 0.1},
            "primitives": [{"type": "annulus", "center": [11.5, 11.5], "inner": 5, "outer": 8}]})";
    const auto a = ws.path("a.npy"), b = ws.path("b.npy"), c = ws.path("c.npy");
    CHECK(run({"synth", "--spec", spec, "--out", a}).code == cli::kOk);
    std::ofstream(ws.path("spec.json")) << spec;
    CHECK(run({"synth", "--spec", ws.path("spec.json"), "--out", b}).code == cli::kOk);
    CHECK(run({"synth", "--spec", spec, "--seed", "2", "--out", c}).code == cli::kOk);
    CHECK(testing::slurp(a) == testing::slurp(b));
    CHECK(testing::slurp(a) != testing::slurp(c));
    SynthSpec parsed = parse_synth_spec(spec);
    parsed.seed = 2;
    const auto expected = generate(parsed);
    const auto got = load_field(c, FieldFormat::npy);
    CHECK(std::equal(expected.values().begin(), expected.values().end(), got.values().begin()));
}

TEST_CASE("commands are deterministic") {
    Workspace ws("determinism");
    const auto in = ws.put("f.npy", testing::random_field(Shape{8, 8}, 5));
    CHECK(run({"barcode", "--in", in}).out == run({"barcode", "--in", in}).out);
    CHECK(run({"loss", "--in", in, "--betti", "1,1"}).out == run({"loss", "--in", in, "--betti", "1,1"}).out);
}

TEST_CASE("usage and data errors map to their exit codes") {
    Workspace ws("errors");
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({"betti"}).code == cli::kUsage);
    CHECK(run({"--help"}).code == cli::kOk);
    CHECK(run({"barcode", "--in", "x.csv", "--emit", "png"}).code == cli::kUsage);
    const auto f = ws.put("f.csv", testing::ring_field());
    CHECK(run({"loss", "--in", f, "--betti", "1,x"}).code == cli::kUsage);
    CHECK(run({"loss", "--in", f, "--betti", "1,0,0"}).code == cli::kUsage);
    CHECK(run({"loss", "--in", f, "--betti", "1,1", "--weights", "1"}).code == cli::kUsage);
    CHECK(run({"refine", "--in", f, "--betti", "1,1", "--lr", "-1", "--out", ws.path("o.csv")}).code == cli::kUsage);
    CHECK(run({"barcode", "--in", ws.path("missing.csv")}).code == cli::kData);
    std::ofstream(ws.path("bad.csv")) << "1,2\n3\n";
    CHECK(run({"barcode", "--in", ws.path("bad.csv")}).code == cli::kData);
    CHECK(run({"barcode", "--in", ws.path("bad.csv"), "--format", "npy"}).code == cli::kData);
    CHECK(run({"synth", "--spec", "{\"shape\": [4]}", "--out", ws.path("s.npy")}).code == cli::kData);
    const auto big = ws.put("big.csv", ScalarField::constant(Shape{3, 3}, 2.0));
    CHECK(run({"refine", "--in", big, "--betti", "1,0", "--out", ws.path("o.csv")}).code == cli::kData);
}

}
