// shyc: simulate couplings, run verification suites, print tables.
//
//   shyc simulate --space sphere:2 --strategy fixed-s2 --rho0 1 --paths 100 --csv out.csv
//   shyc verify distance-laws --threads 8
//   shyc table feasibility --format markdown
//
// Exit codes: 0 success, 1 verification failed, 2 configuration error,
// 3 infeasible rate, 4 other runtime failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shyc/shyc.hpp"

namespace {

using namespace shyc;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitRuntime = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> xs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) xs.push_back(parse_double(item, key));
    if (xs.empty()) throw ConfigError(key + ": empty grid");
    return xs;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
    std::vector<int> out;
    for (double v : parse_list(text, key)) {
        if (v != static_cast<int>(v)) throw ConfigError(key + ": expected integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string config_file;
    std::map<std::string, std::string> flags;
    bool print_config = false;
};

nlohmann::ordered_json simulation_summary(const SimConfig& c, const std::vector<TrajectoryRecord>& recs) {
    Report rep;
    rep.strategy = c.strategy.id;
    rep.law = "none";
    rep.n_paths = c.n_paths;
    rep.h_ladder = {c.h};
    rep.pass = true;
    RunningStats final_rho;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    long independent = 0, samples = 0;
    for (const auto& r : recs) {
        if (!r.rho.empty()) final_rho.add(r.rho.back());
        lo = std::min(lo, r.min_rho());
        hi = std::max(hi, r.max_rho());
        for (auto g : r.regime) {
            ++samples;
            independent += g == Regime::Independent;
        }
    }
    rep.details["space"] = c.space.name();
    rep.details["seed"] = c.seed;
    rep.details["T"] = c.T;
    rep.details["steps"] = c.n_steps();
    rep.details["rho0"] = recs.empty() || recs[0].rho.empty() ? c.rho0 : recs[0].rho.front();
    rep.details["final_rho_mean"] = final_rho.mean;
    rep.details["final_rho_se"] = final_rho.stderr_mean();
    rep.details["min_rho"] = lo;
    rep.details["max_rho"] = hi;
    rep.details["independent_fraction"] = samples ? static_cast<double>(independent) / static_cast<double>(samples) : 0.0;
    return rep.to_json();
}

int cmd_simulate(const SimulateArgs& args) {
    SimConfig cfg;
    if (!args.config_file.empty()) cfg = parse_config(read_file(args.config_file));
    cfg = apply_settings(cfg, args.flags);
    if (args.print_config) {
        std::cout << render_config(cfg);
        return 0;
    }
    const auto recs = run_simulation(cfg);
    if (!cfg.csv_path.empty()) {
        if (cfg.csv_path == "-") {
            write_csv(std::cout, recs);
        } else {
            auto out = open_output(cfg.csv_path);
            write_csv(out, recs);
        }
    }
    const auto summary = simulation_summary(cfg, recs);
    if (!cfg.json_path.empty()) open_output(cfg.json_path) << summary.dump(2) << '\n';
    if (cfg.csv_path != "-") std::cout << summary.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& suite, const SuiteOptions& opt, const std::string& json_path) {
    std::vector<std::string> names;
    if (suite == "all") {
        for (const auto& s : suites()) names.push_back(s.name);
    } else {
        names.push_back(suite);
    }
    bool ok = true;
    nlohmann::ordered_json dump = nlohmann::ordered_json::array();
    for (const auto& name : names) {
        const auto res = run_suite(name, opt);
        std::cout << "## " << res.name << " - " << res.title << "\n\n" << res.markdown() << '\n'
                  << res.name << ": " << (res.pass() ? "PASS" : "FAIL") << " (" << res.seconds << " s)\n\n";
        ok = ok && res.pass();
        dump.push_back({{"suite", res.name}, {"pass", res.pass()}, {"reports", res.reports}});
    }
    if (!json_path.empty()) open_output(json_path) << dump.dump(2) << '\n';
    return ok ? 0 : kExitVerifyFailed;
}

// ---------------------------------------------------------------------------
// table

struct TableArgs {
    std::string kind;
    std::string format = "csv";
    std::string r = "-1,0,1";
    std::string d = "2,3,5";
    std::string k = "-2,-1,-0.5,0,0.5,1,2,4";
    std::string rho = "0.5,1,2,3";
    std::string alpha = "0,0.785398163397448,1.5707963267949,2.35619449019234,3.14159265358979";
    long paths = 200;
};

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    void print(std::ostream& o, const std::string& format) const {
        if (format == "markdown") {
            auto line = [&](const std::vector<std::string>& r) {
                o << '|';
                for (const auto& c : r) o << ' ' << c << " |";
                o << '\n';
            };
            line(header_);
            o << '|';
            for (std::size_t i = 0; i < header_.size(); ++i) o << "---|";
            o << '\n';
            for (const auto& r : rows_) line(r);
        } else {
            auto line = [&](const std::vector<std::string>& r) {
                for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
                o << '\n';
            };
            line(header_);
            for (const auto& r : rows_) line(r);
        }
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

int cmd_table(const TableArgs& a, const SuiteOptions& opt) {
    if (a.format != "csv" && a.format != "markdown") throw ConfigError("format must be csv or markdown");
    const auto fmt = [](double v) { return format_double(v); };
    if (a.kind == "drift") {
        Table t({"r", "d", "alpha", "rho", "formula", "index_half_sum", "rel_err"});
        const auto rs = parse_int_list(a.r, "r");
        const auto ds = parse_int_list(a.d, "d");
        const auto alphas = parse_list(a.alpha, "alpha");
        const auto rhos = parse_list(a.rho, "rho");
        for (int r : rs)
            for (int d : ds) {
                std::vector<double> usable;
                for (double rho : rhos)
                    if (rho > 0.0 && !(r > 0 && rho >= std::numbers::pi)) usable.push_back(rho);
                for (const auto& row : drift_identity_check(r, d, alphas, usable))
                    t.add({std::to_string(r), std::to_string(d), fmt(row.alpha), fmt(row.rho), fmt(row.formula),
                           fmt(row.index_half_sum), fmt(row.rel_err)});
            }
        t.print(std::cout, a.format);
        return 0;
    }
    if (a.kind == "feasibility") {
        Table t({"r", "d", "k", "rho", "constructible", "feasible", "alpha"});
        const auto rs = parse_int_list(a.r, "r");
        const auto ds = parse_int_list(a.d, "d");
        const auto ks = parse_list(a.k, "k");
        const auto rhos = parse_list(a.rho, "rho");
        for (int r : rs)
            for (int d : ds)
                for (double k : ks)
                    for (double rho : rhos) {
                        if (!(rho > 0.0) || (r > 0 && rho >= std::numbers::pi)) continue;
                        const auto row = feasibility(r, d, k, rho);
                        t.add({std::to_string(r), std::to_string(d), fmt(k), fmt(rho), row.constructible ? "yes" : "no",
                               row.feasible ? "yes" : "no", row.feasible ? fmt(row.alpha) : ""});
                    }
        t.print(std::cout, a.format);
        return 0;
    }
    if (a.kind == "laws") {
        if (a.paths < 1) throw ConfigError("paths must be at least 1");
        Table t({"case", "strategy", "law", "h", "sup_mean_err", "mean_sup_err", "se", "max_sup_err", "fitted_order", "pass"});
        for (auto c : distance_law_cases(opt)) {
            c.config.n_paths = a.paths;
            const auto rep = distance_law_check(c.config);
            for (const auto& row : rep.details["per_h"])
                t.add({'"' + c.label + '"', rep.strategy, rep.law, fmt(row["h"].get<double>()), fmt(row["sup_mean_err"].get<double>()),
                       fmt(row["mean_sup_err"].get<double>()),
                       fmt(row["se"].get<double>()), fmt(row["max_sup_err"].get<double>()),
                       rep.fitted_order ? fmt(*rep.fitted_order) : "", rep.pass ? "yes" : "no"});
        }
        t.print(std::cout, a.format);
        return 0;
    }
    throw ConfigError("unknown table '" + a.kind + "' (drift, laws, feasibility)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markovian couplings of Brownian motions on constant-curvature spaces"};
    app.require_subcommand(1);

    // simulate
    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate coupled paths; write CSV trajectories and a JSON summary");
    simulate->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    simulate->add_option("--config", sim.config_file, "key = value settings file (flags win)");
    simulate->add_flag("--print-config", sim.print_config, "Print the merged configuration and exit");
    const std::vector<std::pair<std::string, std::string>> keys{
        {"space", "sphere:d, euclidean:d or hyperbolic:d"},
        {"strategy", "translation, mirror-s2, extrinsic-contract-s2, extrinsic-expand-s2, fixed-s2, rotation, so3-flow, independent"},
        {"k", "contraction rate for the rotation coupling"},
        {"alpha-override", "fixed rotation angle for the rotation coupling"},
        {"eps", "patch the strategy with this eps in (0, pi/4)"},
        {"rho0", "initial distance, canonical placement"},
        {"x0", "explicit start of X, comma-separated ambient coordinates"},
        {"y0", "explicit start of Y"},
        {"h", "step size"},
        {"T", "horizon"},
        {"paths", "number of paths"},
        {"seed", "base seed (default: $SHYC_SEED or built-in)"},
        {"threads", "worker threads, 0 = all cores"},
        {"record-every", "record every n-th step"},
        {"csv", "trajectory CSV path, '-' for stdout"},
        {"json", "summary JSON path"},
    };
    std::map<std::string, std::string> raw;
    for (const auto& [key, help] : keys) simulate->add_option("--" + key, raw[key], help);

    // verify
    std::string suite;
    SuiteOptions vopt;
    vopt.seed = 0;
    std::string verify_json;
    std::optional<std::uint64_t> verify_seed;
    auto* verify = app.add_subcommand("verify", "Run a verification suite; nonzero exit on failure");
    std::string suite_help = "Suite name or 'all':";
    for (const auto& s : suites()) suite_help += " " + s.name;
    verify->add_option("suite", suite, suite_help)->required();
    verify->add_option("--threads", vopt.threads, "worker threads, 0 = all cores");
    verify->add_option("--seed", verify_seed, "base seed");
    verify->add_option("--json", verify_json, "write suite reports as JSON");

    // table
    TableArgs targs;
    SuiteOptions topt;
    auto* table = app.add_subcommand("table", "Print the drift-identity grid, distance-law ladder or feasibility map");
    table->add_option("kind", targs.kind, "drift, laws or feasibility")->required();
    table->add_option("--format", targs.format, "csv or markdown");
    table->add_option("--r", targs.r, "curvatures, comma-separated");
    table->add_option("--d", targs.d, "dimensions");
    table->add_option("--k", targs.k, "rates (feasibility)");
    table->add_option("--rho", targs.rho, "distances");
    table->add_option("--alpha", targs.alpha, "angles (drift)");
    table->add_option("--paths", targs.paths, "paths per ladder rung (laws)");
    table->add_option("--threads", topt.threads, "worker threads, 0 = all cores");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) {
            for (const auto& [key, help] : keys)
                if (simulate->count("--" + key)) sim.flags[key] = raw[key];
            return cmd_simulate(sim);
        }
        if (*verify) {
            vopt.seed = verify_seed ? *verify_seed : default_seed();
            return cmd_verify(suite, vopt, verify_json);
        }
        if (*table) {
            topt.seed = default_seed();
            return cmd_table(targs, topt);
        }
    } catch (const InfeasibleRateError& e) {
        std::cerr << e.what() << '\n';
        return kExitInfeasible;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
