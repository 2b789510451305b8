#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "topoprior/loss.hpp"
#include "topoprior/oracle.hpp"
#include "topoprior/refine.hpp"
#include "topoprior/synth.hpp"

namespace topoprior::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Input {
    std::string path;
    std::string format;  // empty: infer from extension

    ScalarField load() const {
        const FieldFormat f = format.empty() ? format_from_extension(path) : parse_format(format);
        return load_field(path, f);
    }
};

void add_input(CLI::App* cmd, Input& in) {
    cmd->add_option("--in", in.path, "Input field (.csv, .npy, .pgm)")->required();
    cmd->add_option("--format", in.format, "Input format, inferred from the extension by default")
        ->check(CLI::IsMember({"csv", "npy", "pgm"}));
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path);
    f << text;
    if (!f) throw DataError("write failed for " + path);
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (!s.empty() && s.back() == ',') parts.emplace_back();
    return parts;
}

std::size_t parse_count(const std::string& s, const char* what) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty() || v < 0) throw UsageError(std::string("bad ") + what + " entry '" + s + "'");
    return static_cast<std::size_t>(v);
}

double parse_real(const std::string& s, const char* what) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty()) throw UsageError(std::string("bad ") + what + " entry '" + s + "'");
    return v;
}

struct PriorArgs {
    std::string betti, weights, window;

    BettiPrior build() const {
        BettiPrior prior;
        for (const auto& b : split(betti)) prior.betti.push_back(parse_count(b, "--betti"));
        if (prior.betti.empty() || prior.betti.size() > 3) throw UsageError("--betti needs 1 to 3 comma-separated counts");
        if (!weights.empty()) {
            for (const auto& w : split(weights)) prior.weights.push_back(parse_real(w, "--weights"));
        }
        if (!window.empty()) {
            for (const auto& w : split(window)) {
                if (w == "-" || w.empty()) prior.max_betti.emplace_back();
                else prior.max_betti.emplace_back(parse_count(w, "--window"));
            }
        }
        try {
            prior.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return prior;
    }
};

void add_prior(CLI::App* cmd, PriorArgs& prior) {
    cmd->add_option("--betti", prior.betti, "Desired Betti numbers, e.g. 1,1")->required();
    cmd->add_option("--weights", prior.weights, "Per-dimension weights, e.g. 1,0.5");
    cmd->add_option("--window", prior.window,
                    "Per-dimension largest acceptable Betti number ('-' for none), e.g. -,3");
}

// Fault injection for the verify harness: computes the barcode of the
// mirrored field and maps pixels back, which reverses every index tie-break.
Barcode mirrored_engine(const FilteredComplex& complex) {
    const auto values = complex.field().values();
    std::vector<double> mirrored(values.rbegin(), values.rend());
    const ScalarField flipped(complex.shape(), std::move(mirrored));
    const auto last = static_cast<std::uint32_t>(values.size() - 1);
    auto bars = compute_barcode(FilteredComplex(flipped)).all();
    for (auto& b : bars) {
        b.birth_pixel.value = last - b.birth_pixel.value;
        if (b.death_pixel) b.death_pixel->value = last - b.death_pixel->value;
    }
    return Barcode(complex.ndim(), std::move(bars));
}

std::string betti_line(const std::vector<std::size_t>& betti) {
    std::string s;
    for (std::size_t i = 0; i < betti.size(); ++i) s += (i ? " " : "") + std::to_string(betti[i]);
    return s + "\n";
}

std::string trace_csv(const RefineResult& r) {
    std::ostringstream s;
    s.precision(17);
    s << "iter,fidelity,topo,total,wall_ms\n";
    for (const auto& step : r.trajectory) {
        s << step.iter << "," << step.fidelity << "," << step.topo << "," << step.total << "," << step.wall_ms << "\n";
    }
    return s.str();
}

nlohmann::json refine_summary(const RefineResult& r) {
    nlohmann::json j;
    j["iterations"] = r.iterations;
    j["topology_ok"] = r.topology_ok;
    const auto& first = r.trajectory.front();
    const auto& last = r.trajectory.back();
    j["initial"] = {{"fidelity", first.fidelity}, {"topo", first.topo}, {"total", first.total}};
    j["final"] = {{"fidelity", last.fidelity}, {"topo", last.topo}, {"total", last.total}};
    return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Persistent-homology barcodes, topological loss and topology-correcting refinement"};
    app.name("topoprior");
    app.require_subcommand(1);

    // barcode
    Input barcode_in;
    std::string barcode_out, emit = "json", engine_name = "hybrid";
    auto* barcode_cmd = app.add_subcommand("barcode", "Compute the super-level persistence barcode");
    add_input(barcode_cmd, barcode_in);
    barcode_cmd->add_option("--out", barcode_out, "Output file (stdout by default)");
    barcode_cmd->add_option("--emit", emit, "Output format")->check(CLI::IsMember({"csv", "json", "svg"}));
    barcode_cmd->add_option("--engine", engine_name, "Pairing engine")->check(CLI::IsMember({"hybrid", "reduction"}));

    // betti
    Input betti_in;
    double threshold = 0.5;
    auto* betti_cmd = app.add_subcommand("betti", "Betti numbers of the super-level set at a threshold");
    add_input(betti_cmd, betti_in);
    betti_cmd->add_option("--threshold", threshold, "Threshold p; pixels >= p are included");

    // loss
    Input loss_in;
    PriorArgs loss_prior;
    std::string loss_out;
    auto* loss_cmd = app.add_subcommand("loss", "Topological loss and gradient against a Betti prior");
    add_input(loss_cmd, loss_in);
    add_prior(loss_cmd, loss_prior);
    loss_cmd->add_option("--out", loss_out, "Output file (stdout by default)");

    // refine
    Input refine_in;
    PriorArgs refine_prior;
    RefineConfig cfg;
    std::string refine_out, refine_out_format, trace_path;
    auto* refine_cmd = app.add_subcommand("refine", "Refine a field until its topology matches a prior");
    add_input(refine_cmd, refine_in);
    add_prior(refine_cmd, refine_prior);
    refine_cmd->add_option("--lambda", cfg.lambda, "Weight of the topological term");
    refine_cmd->add_option("--lr", cfg.lr, "Gradient step size");
    refine_cmd->add_option("--iters", cfg.max_iters, "Maximum iterations");
    refine_cmd->add_option("--tol", cfg.tol, "Stop when the objective changes by less than this");
    refine_cmd->add_option("--threshold", cfg.check_threshold, "Threshold for the topology check");
    refine_cmd->add_flag("--early-stop", cfg.early_stop, "Stop as soon as the topology check passes");
    refine_cmd->add_option("--divergence-window", cfg.divergence_window,
                           "Abort after this many consecutive increases of the objective");
    refine_cmd->add_option("--out", refine_out, "Refined field output")->required();
    refine_cmd->add_option("--out-format", refine_out_format, "Output format, inferred by default")
        ->check(CLI::IsMember({"csv", "npy", "pgm"}));
    refine_cmd->add_option("--trace", trace_path, "Per-iteration trace CSV");

    // verify
    Input verify_in;
    std::string fault;
    auto* verify_cmd = app.add_subcommand("verify", "Cross-check the engine against the reference implementations");
    add_input(verify_cmd, verify_in);
    verify_cmd->add_option("--inject-fault", fault)->group("")->check(CLI::IsMember({"mirror-ties"}));

    // synth
    std::string spec_arg, synth_out, synth_format;
    std::uint64_t seed = 0;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic field from a JSON spec");
    synth_cmd->add_option("--spec", spec_arg, "JSON spec, inline or a path to a file")->required();
    auto* seed_opt = synth_cmd->add_option("--seed", seed, "Seed (overrides the spec's)");
    synth_cmd->add_option("--out", synth_out, "Output field")->required();
    synth_cmd->add_option("--format", synth_format, "Output format, inferred by default")
        ->check(CLI::IsMember({"csv", "npy", "pgm"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*barcode_cmd) {
            const FilteredComplex complex(barcode_in.load());
            const Barcode barcode =
                compute_barcode(complex, engine_name == "reduction" ? Engine::reduction : Engine::hybrid);
            const std::string text = emit == "csv"   ? barcode_to_csv(barcode)
                                     : emit == "svg" ? barcode_to_svg(barcode)
                                                     : barcode_to_json(barcode);
            write_text(barcode_out, text, out);
        } else if (*betti_cmd) {
            const FilteredComplex complex(betti_in.load());
            out << betti_line(betti_at(compute_barcode(complex), threshold));
        } else if (*loss_cmd) {
            const BettiPrior prior = loss_prior.build();
            const ScalarField field = loss_in.load();
            if (prior.ndim() > field.ndim()) throw UsageError("--betti names more dimensions than the field has");
            write_text(loss_out, field_loss(field, prior).to_json(), out);
        } else if (*refine_cmd) {
            const BettiPrior prior = refine_prior.build();
            try {
                cfg.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const ScalarField field = refine_in.load();
            if (prior.ndim() > field.ndim()) throw UsageError("--betti names more dimensions than the field has");
            const FieldFormat out_format =
                refine_out_format.empty() ? format_from_extension(refine_out) : parse_format(refine_out_format);
            try {
                const RefineResult result = refine(field, prior, cfg);
                save_field(result.refined, refine_out, out_format);
                if (!trace_path.empty()) write_text(trace_path, trace_csv(result), out);
                out << refine_summary(result).dump(2) << "\n";
            } catch (const DivergenceError& e) {
                save_field(e.partial().refined, refine_out, out_format);
                if (!trace_path.empty()) write_text(trace_path, trace_csv(e.partial()), out);
                err << "topoprior: refinement diverged: " << e.what() << "\n";
                return kFailure;
            }
        } else if (*verify_cmd) {
            const ScalarField field = verify_in.load();
            const VerifyReport report = fault.empty() ? verify_field(field) : verify_field(field, mirrored_engine);
            nlohmann::json j{{"ok", report.ok}, {"probes", report.probes}, {"differences", report.differences}};
            out << j.dump(2) << "\n";
            return report.ok ? kOk : kFailure;
        } else if (*synth_cmd) {
            std::string text = spec_arg;
            if (!text.empty() && text.front() != '{') {
                std::ifstream f(spec_arg);
                if (!f) throw DataError("cannot open spec " + spec_arg);
                std::ostringstream buf;
                buf << f.rdbuf();
                text = buf.str();
            }
            SynthSpec spec = parse_synth_spec(text);
            if (*seed_opt) spec.seed = seed;
            const FieldFormat f = synth_format.empty() ? format_from_extension(synth_out) : parse_format(synth_format);
            save_field(generate(spec), synth_out, f);
        }
    } catch (const UsageError& e) {
        err << "topoprior: " << e.what() << "\n";
        return kUsage;
    } catch (const SizeGuardError& e) {
        err << "topoprior: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "topoprior: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "topoprior: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}

}  // namespace topoprior::cli
