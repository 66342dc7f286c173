#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "resetguard/analysis.hpp"
#include "resetguard/attack_gen.hpp"
#include "resetguard/circuit.hpp"
#include "resetguard/qasm.hpp"
#include "resetguard/reset_sim.hpp"
#include "resetguard/scanner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace resetguard;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

double parse_angle_arg(const std::string& text) {
    try {
        return parse_angle_expr(text);
    } catch (const ParseError& e) {
        throw CLI::ValidationError("bad angle expression '" + text +
                                   "': " + e.message());
    }
}

std::vector<double> parse_angle_list(const std::vector<std::string>& texts) {
    std::vector<double> out;
    for (const auto& t : texts) out.push_back(parse_angle_arg(t));
    return out;
}

std::string format_compact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

struct ScanArgs {
    std::vector<std::string> files;
    std::string theta_low = "pi/4";
    std::string theta_high = "3*pi/4";
    double tol = 1e-6;
    std::size_t full_matrix_cap = 12;
    bool no_full_matrix = false;
    bool text = false;
    std::string out_dir;
};

int run_scan(const ScanArgs& args) {
    ScanConfig cfg;
    cfg.theta_low = parse_angle_arg(args.theta_low);
    cfg.theta_high = parse_angle_arg(args.theta_high);
    cfg.tol = args.tol;
    cfg.full_matrix_cap = args.full_matrix_cap;
    cfg.attempt_full_matrix = !args.no_full_matrix;
    cfg.validate();

    if (!args.out_dir.empty()) fs::create_directories(args.out_dir);

    bool any_parse_error = false;
    bool any_suspicious = false;
    for (const auto& file : args.files) {
        Circuit circuit(1);
        try {
            circuit = parse_qasm(read_file(file), fs::path(file).stem());
        } catch (const ParseError& e) {
            std::cerr << file << ": " << e.what() << "\n";
            any_parse_error = true;
            continue;
        } catch (const std::exception& e) {
            std::cerr << file << ": " << e.what() << "\n";
            any_parse_error = true;
            continue;
        }
        const ScanReport report = scan(circuit, cfg);
        if (report.verdict == Verdict::Suspicious) any_suspicious = true;
        const std::string rendered =
            args.text ? report_to_text(report)
                      : report_to_json(report).dump(2) + "\n";
        if (args.out_dir.empty()) {
            std::cout << rendered;
        } else {
            const fs::path out = fs::path(args.out_dir) /
                                 (fs::path(file).stem().string() +
                                  (args.text ? ".report.txt" : ".report.json"));
            write_file(out, rendered);
        }
    }
    if (any_parse_error) return 1;
    return any_suspicious ? 2 : 0;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenArgs {
    std::string family;
    std::vector<std::string> thetas;
    std::vector<std::string> phis;
    std::string theta = "0";
    std::string phi = "0";
    std::size_t n = 2;
    std::size_t depth = 1;
    std::size_t qubits = 1;
    std::size_t resets = 0;
    std::uint64_t seed = 0;
    bool compose_pipeline = false;
    std::string out;
};

Circuit build_family(const std::string& family, const GenArgs& args) {
    if (family == "xchain") return gen_x_chain(args.n);
    if (family == "rxrz") {
        // Bare `gen rxrz --theta .. --phi ..` reads the rotation totals from
        // --theta/--phi; under --compose those flags carry the victim angles,
        // so the masking rotation moves to --mask-theta/--mask-phi.
        std::string theta = args.theta;
        std::string phi = args.phi;
        if (!args.compose_pipeline) {
            if (!args.thetas.empty()) theta = args.thetas.front();
            if (!args.phis.empty()) phi = args.phis.front();
        }
        return gen_rx_rz(parse_angle_arg(theta), parse_angle_arg(phi),
                         args.depth);
    }
    if (family == "cxchain") return gen_cx_chain(args.n);
    if (family == "grover2") return gen_grover2();
    if (family == "grover3") return gen_grover3();
    if (family == "qrng") return gen_qrng(args.n);
    if (family == "random-identity")
        return gen_random_identity(args.qubits, args.depth, args.seed);
    if (family == "victim")
        return gen_victim(parse_angle_list(args.thetas),
                          parse_angle_list(args.phis));
    if (family == "resets") return gen_resets(args.qubits, args.resets);
    throw CLI::ValidationError("unknown circuit family '" + family + "'");
}

int run_gen(const GenArgs& args) {
    Circuit circuit = build_family(args.family, args);
    if (args.compose_pipeline) {
        if (args.family == "victim" || args.family == "resets")
            throw CLI::ValidationError(
                "--compose expects a masking family (xchain, rxrz, cxchain, "
                "grover2, grover3, qrng, random-identity)");
        std::vector<std::string> thetas = args.thetas;
        std::vector<std::string> phis = args.phis;
        if (thetas.empty()) thetas.assign(circuit.num_qubits(), "0");
        if (phis.empty()) phis.assign(circuit.num_qubits(), "0");
        const Circuit victim =
            gen_victim(parse_angle_list(thetas), parse_angle_list(phis));
        if (victim.num_qubits() != circuit.num_qubits())
            throw CLI::ValidationError(
                "--theta/--phi must list one angle per masking qubit (" +
                std::to_string(circuit.num_qubits()) + ")");
        const Circuit resets = gen_resets(circuit.num_qubits(), args.resets);
        // Keep the attacker's measurements on their own classical bits, as
        // in the attack-model figures.
        Circuit pipeline = compose(
            compose(victim, resets),
            with_clbit_offset(circuit, victim.num_clbits()));
        pipeline.set_name(args.family + "_pipeline");
        circuit = std::move(pipeline);
    }
    const std::string qasm = emit_qasm(circuit);
    if (args.out.empty())
        std::cout << qasm;
    else
        write_file(args.out, qasm);
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

[[noreturn]] void spec_error(const std::string& path, const std::string& why) {
    throw std::runtime_error("sweep spec: " + path + ": " + why);
}

double json_angle(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        try {
            return parse_angle_expr(j.get<std::string>());
        } catch (const ParseError& e) {
            spec_error(path, e.message());
        }
    }
    spec_error(path, "expected a number or an angle expression string");
}

std::vector<double> json_angle_list(const json& j, const std::string& path) {
    if (!j.is_array()) spec_error(path, "expected an array of angles");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(json_angle(j[i], path + "[" + std::to_string(i) + "]"));
    if (out.empty()) spec_error(path, "angle list must be non-empty");
    return out;
}

// Accepts either one axis shared by every qubit or a per-qubit list of axes.
std::vector<std::vector<double>> json_axes(const json& j,
                                           const std::string& path,
                                           std::size_t num_qubits) {
    if (!j.is_array() || j.empty()) spec_error(path, "expected an array");
    if (j[0].is_array()) {
        std::vector<std::vector<double>> axes;
        for (std::size_t i = 0; i < j.size(); ++i)
            axes.push_back(
                json_angle_list(j[i], path + "[" + std::to_string(i) + "]"));
        if (axes.size() != num_qubits)
            spec_error(path, "expected " + std::to_string(num_qubits) +
                                 " per-qubit axes");
        return axes;
    }
    return std::vector<std::vector<double>>(num_qubits,
                                            json_angle_list(j, path));
}

std::vector<std::size_t> json_size_list(const json& j,
                                        const std::string& path) {
    std::vector<std::size_t> out;
    if (j.is_number_unsigned() || j.is_number_integer()) {
        out.push_back(j.get<std::size_t>());
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number_unsigned() && !v.is_number_integer())
                spec_error(path, "expected integers");
            out.push_back(v.get<std::size_t>());
        }
    } else {
        spec_error(path, "expected an integer or an array of integers");
    }
    if (out.empty()) spec_error(path, "list must be non-empty");
    return out;
}

std::vector<double> json_angle_or_list(const json& j, const std::string& path) {
    if (j.is_array()) return json_angle_list(j, path);
    return {json_angle(j, path)};
}

struct SweepCondition {
    std::string label;
    std::size_t num_resets = 0;
    Circuit masking{1};
};

struct SweepPlan {
    std::string name = "sweep";
    std::vector<SweepCondition> conditions;
    std::vector<std::vector<double>> victim_thetas;
    std::vector<std::vector<double>> victim_phis;
    std::size_t shots = 4096;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    ResetMode reset_mode = ResetMode::Channel;
    ResetChannelParams channel;
};

SweepPlan parse_sweep_spec(const json& spec) {
    SweepPlan plan;
    if (spec.contains("name")) plan.name = spec.at("name").get<std::string>();
    if (!spec.contains("masking")) spec_error("masking", "missing");
    const json& masking = spec.at("masking");
    if (!masking.contains("family"))
        spec_error("masking.family", "missing");
    const std::string family = masking.at("family").get<std::string>();

    // Each entry: (condition tag fragment, masking circuit).
    std::vector<std::pair<std::string, Circuit>> maskings;
    if (family == "none" || family == "empty") {
        std::size_t qubits = 1;
        if (masking.contains("qubits"))
            qubits = masking.at("qubits").get<std::size_t>();
        Circuit empty(qubits, 0, "none");
        maskings.emplace_back("none", std::move(empty));
    } else if (family == "xchain") {
        for (auto n : json_size_list(masking.value("n", json(0)),
                                     "masking.n"))
            maskings.emplace_back("xchain_n" + std::to_string(n),
                                  gen_x_chain(n));
    } else if (family == "cxchain") {
        for (auto n : json_size_list(masking.value("n", json(1)),
                                     "masking.n"))
            maskings.emplace_back("cxchain_n" + std::to_string(n),
                                  gen_cx_chain(n));
    } else if (family == "rxrz") {
        const auto thetas = json_angle_or_list(masking.value("theta", json(0.0)),
                                               "masking.theta");
        const auto phis = json_angle_or_list(masking.value("phi", json(0.0)),
                                             "masking.phi");
        const auto depths = json_size_list(masking.value("depth", json(1)),
                                           "masking.depth");
        for (double theta : thetas)
            for (double phi : phis)
                for (auto d : depths) {
                    std::string tag = "rxrz_t" + format_compact(theta) + "_p" +
                                      format_compact(phi);
                    if (depths.size() > 1)
                        tag += "_d" + std::to_string(d);
                    maskings.emplace_back(tag, gen_rx_rz(theta, phi, d));
                }
    } else if (family == "grover2") {
        maskings.emplace_back("grover2", gen_grover2());
    } else if (family == "grover3") {
        maskings.emplace_back("grover3", gen_grover3());
    } else if (family == "qrng") {
        for (auto n : json_size_list(masking.value("n", json(4)), "masking.n"))
            maskings.emplace_back("qrng_n" + std::to_string(n), gen_qrng(n));
    } else {
        spec_error("masking.family", "unknown family '" + family + "'");
    }

    const std::size_t num_qubits = maskings.front().second.num_qubits();
    for (const auto& [tag, c] : maskings)
        if (c.num_qubits() != num_qubits)
            spec_error("masking", "conditions must share a qubit count");

    if (!spec.contains("victim")) spec_error("victim", "missing");
    const json& victim = spec.at("victim");
    if (!victim.contains("thetas")) spec_error("victim.thetas", "missing");
    plan.victim_thetas =
        json_axes(victim.at("thetas"), "victim.thetas", num_qubits);
    if (victim.contains("phis"))
        plan.victim_phis = json_axes(victim.at("phis"), "victim.phis",
                                     num_qubits);
    else
        plan.victim_phis.assign(num_qubits, {0.0});

    const auto resets = json_size_list(spec.value("num_resets", json(0)),
                                       "num_resets");
    for (const auto& [tag, c] : maskings)
        for (auto k : resets) {
            SweepCondition cond;
            cond.label = tag + "_k" + std::to_string(k);
            cond.num_resets = k;
            cond.masking = c;
            plan.conditions.push_back(std::move(cond));
        }

    plan.shots = spec.value("shots", std::size_t{4096});
    plan.trials = spec.value("trials", std::size_t{1});
    plan.seed = spec.value("seed", std::uint64_t{0});
    if (spec.contains("reset_mode")) {
        const std::string mode = spec.at("reset_mode").get<std::string>();
        if (mode == "CHANNEL")
            plan.reset_mode = ResetMode::Channel;
        else if (mode == "MEASURE_X_IDEAL")
            plan.reset_mode = ResetMode::MeasureXIdeal;
        else
            spec_error("reset_mode",
                       "expected CHANNEL or MEASURE_X_IDEAL, got '" + mode +
                           "'");
    }
    if (spec.contains("channel")) {
        const json& ch = spec.at("channel");
        plan.channel.r1 = ch.value("r1", plan.channel.r1);
        plan.channel.r0 = ch.value("r0", plan.channel.r0);
        plan.channel.eta_meas_10 =
            ch.value("eta_meas_10", plan.channel.eta_meas_10);
        plan.channel.eta_meas_01 =
            ch.value("eta_meas_01", plan.channel.eta_meas_01);
    }
    return plan;
}

json snr_db_to_json(double snr_db) {
    if (std::isinf(snr_db)) return snr_db > 0 ? "+inf" : "-inf";
    return snr_db;
}

struct SweepArgs {
    std::string spec_path;
    std::string out_dir = "sweep_out";
    std::optional<std::uint64_t> seed_override;
    unsigned threads = 0;
    bool quiet = false;
};

int run_sweep(const SweepArgs& args) {
    json spec;
    try {
        spec = json::parse(read_file(args.spec_path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("sweep spec: invalid JSON: ") +
                                 e.what());
    }
    SweepPlan plan = parse_sweep_spec(spec);
    if (args.seed_override) plan.seed = *args.seed_override;

    fs::create_directories(args.out_dir);
    json analysis = json::array();
    for (std::size_t ci = 0; ci < plan.conditions.size(); ++ci) {
        const SweepCondition& cond = plan.conditions[ci];
        ExperimentSpec exp;
        exp.victim_thetas = plan.victim_thetas;
        exp.victim_phis = plan.victim_phis;
        exp.num_resets = cond.num_resets;
        exp.masking = cond.masking;
        exp.shots = plan.shots;
        exp.trials = plan.trials;
        // Per-condition sub-stream so conditions carry independent noise.
        exp.seed = sim_detail::splitmix64(plan.seed ^ (ci + 1));
        exp.reset_mode = plan.reset_mode;

        const FrequencyTable table = simulate(exp, plan.channel, args.threads);
        write_file(fs::path(args.out_dir) / (cond.label + ".csv"),
                   table_to_csv(table));

        for (std::uint32_t q = 0; q < table.num_qubits; ++q) {
            json row = {{"condition", cond.label}, {"qubit", q},
                        {"a", nullptr},            {"b", nullptr},
                        {"c", nullptr},            {"rss", nullptr}};
            if (table.num_qubits == 1) {
                const auto points = phi_averaged_points(table, q);
                const SigmoidFit fit = fit_error_channel(points);
                const SnrResult snr = snr_single(fit, table, q);
                row["a"] = fit.a;
                row["b"] = fit.b;
                row["c"] = fit.c;
                row["rss"] = fit.rss;
                row["signal"] = snr.signal;
                row["sigma"] = snr.noise_sigma;
                row["snr_db"] = snr_db_to_json(snr.snr_db);
            } else {
                const SnrResult snr = snr_multi(table, q);
                row["signal"] = snr.signal;
                row["sigma"] = snr.noise_sigma;
                row["snr_db"] = snr_db_to_json(snr.snr_db);
            }
            analysis.push_back(std::move(row));
        }
    }
    const std::string rendered = analysis.dump(2) + "\n";
    write_file(fs::path(args.out_dir) / "analysis.json", rendered);
    if (!args.quiet) std::cout << rendered;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "resetguard: compile-time detection of reset-operation attack "
        "circuits, with a calibrated reset-error simulator and SNR analysis"};
    app.require_subcommand(1);

    ScanArgs scan_args;
    auto* scan_cmd = app.add_subcommand(
        "scan", "Scan OpenQASM files for reset-attack masking circuits");
    scan_cmd->add_option("files", scan_args.files, "QASM files to scan")
        ->required()
        ->expected(-1);
    scan_cmd->add_option("--theta-low", scan_args.theta_low,
                         "lower edge of the safe RX band (default pi/4)");
    scan_cmd->add_option("--theta-high", scan_args.theta_high,
                         "upper edge of the safe RX band (default 3*pi/4)");
    scan_cmd->add_option("--tol", scan_args.tol,
                         "matrix comparison tolerance (default 1e-6)");
    scan_cmd->add_option("--full-matrix-cap", scan_args.full_matrix_cap,
                         "qubit cap for the full-matrix identity check");
    scan_cmd->add_flag("--no-full-matrix", scan_args.no_full_matrix,
                       "skip the full-matrix identity check");
    scan_cmd->add_flag("--text", scan_args.text,
                       "human-readable reports instead of JSON");
    auto* json_flag =
        scan_cmd->add_flag("--json", "JSON reports (the default)");
    (void)json_flag;
    scan_cmd->add_option("--out", scan_args.out_dir,
                         "write one report per input into this directory");

    GenArgs gen_args;
    auto* gen_cmd =
        app.add_subcommand("gen", "Generate attack/benchmark circuits");
    gen_cmd
        ->add_option("family", gen_args.family,
                     "victim|resets|xchain|rxrz|cxchain|grover2|grover3|qrng|"
                     "random-identity")
        ->required();
    gen_cmd->add_option("--theta", gen_args.thetas,
                        "victim theta angles (victim family / --compose)")
        ->delimiter(',');
    gen_cmd->add_option("--phi", gen_args.phis,
                        "victim phi angles (victim family / --compose)")
        ->delimiter(',');
    gen_cmd->add_option("--mask-theta", gen_args.theta,
                        "total RX rotation for the rxrz family");
    gen_cmd->add_option("--mask-phi", gen_args.phi,
                        "total RZ rotation for the rxrz family");
    gen_cmd->add_option("--n", gen_args.n,
                        "gate count (xchain/cxchain) or qubit count (qrng)");
    gen_cmd->add_option("--depth", gen_args.depth,
                        "depth for rxrz / random-identity");
    gen_cmd->add_option("--qubits", gen_args.qubits,
                        "qubit count for resets / random-identity");
    gen_cmd->add_option("--resets", gen_args.resets,
                        "reset count (resets family / --compose)");
    gen_cmd->add_option("--seed", gen_args.seed, "random-identity seed");
    gen_cmd->add_flag("--compose", gen_args.compose_pipeline,
                      "chain victim + resets + masking into one circuit");
    gen_cmd->add_option("--out", gen_args.out, "output file (default stdout)");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Run a simulated experiment sweep from a JSON spec");
    sweep_cmd->add_option("--spec", sweep_args.spec_path, "sweep spec file")
        ->required();
    sweep_cmd->add_option("--out", sweep_args.out_dir,
                          "output directory (default sweep_out)");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = sweep_cmd->add_option("--seed", seed_opt,
                                            "override the spec seed");
    sweep_cmd->add_option("--threads", sweep_args.threads,
                          "worker threads (default: hardware)");
    sweep_cmd->add_flag("--quiet", sweep_args.quiet,
                        "do not echo analysis JSON to stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (scan_cmd->parsed()) return run_scan(scan_args);
        if (gen_cmd->parsed()) return run_gen(gen_args);
        if (sweep_cmd->parsed()) {
            if (seed_flag->count() > 0) sweep_args.seed_override = seed_opt;
            return run_sweep(sweep_args);
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
