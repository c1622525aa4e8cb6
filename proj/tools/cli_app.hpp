// Command-line front end: config resolution, dispatch, output files and the
// run manifest. Kept header-only so the test suite can drive it in-process.
#ifndef CTQW_TOOLS_CLI_APP_HPP
#define CTQW_TOOLS_CLI_APP_HPP

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctqw/ctqw.hpp"
#include "ctqw/export.hpp"

namespace ctqw::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kNumericalFailure = 3,
    kInconclusive = 4,
};

// ---------------------------------------------------------------------------
// Config: flat "key = value" file, overridden by flags
// ---------------------------------------------------------------------------

using Settings = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment. Keys use underscores.
inline Settings parse_config_text(std::istream& in, const std::string& origin)
{
    Settings out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::InvalidConfig, origin + ":" + std::to_string(lineno), "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        for (auto& c : key)
            if (c == '-')
                c = '_';
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

class Resolved {
public:
    Resolved(Settings values, std::string command) : values_(std::move(values)), command_(std::move(command)) {}

    const Settings& values() const { return values_; }

    std::string str(const std::string& key) const { return values_.at(key); }

    double real(const std::string& key) const { return parse_double(key, values_.at(key)); }

    std::size_t count(const std::string& key) const
    {
        const double v = real(key);
        if (v < 0.0 || v != std::floor(v))
            throw Error(ErrorKind::InvalidConfig, field(key), "expected a non-negative integer");
        return static_cast<std::size_t>(v);
    }

    bool flag(const std::string& key) const
    {
        const std::string v = values_.at(key);
        if (v == "true" || v == "1" || v == "yes")
            return true;
        if (v == "false" || v == "0" || v == "no")
            return false;
        throw Error(ErrorKind::InvalidConfig, field(key), "expected true or false");
    }

    std::vector<double> list(const std::string& key) const
    {
        std::vector<double> out;
        std::stringstream ss(values_.at(key));
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(parse_double(key, item));
        if (out.empty())
            throw Error(ErrorKind::InvalidConfig, field(key), "expected a comma-separated list");
        return out;
    }

    std::string field(const std::string& key) const { return command_ + "." + key; }

private:
    double parse_double(const std::string& key, std::string text) const
    {
        const auto b = text.find_first_not_of(" \t");
        text = b == std::string::npos ? std::string{} : text.substr(b);
        while (!text.empty() && (text.back() == ' ' || text.back() == '\t'))
            text.pop_back();
        double v = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v))
            throw Error(ErrorKind::InvalidConfig, field(key), "'" + text + "' is not a number");
        return v;
    }

    Settings values_;
    std::string command_;
};

struct OptionSpec {
    std::string key;
    std::string default_value;
    std::string help;
};

inline const std::vector<OptionSpec>& common_options()
{
    static const std::vector<OptionSpec> opts{
        {"gamma0", "0.3333333333333333", "coupling on even bonds (0-1, 2-3, ...), nonzero"},
        {"gamma1", "0.5", "coupling on odd bonds (1-2, 3-4, ...), nonzero"},
        {"n_sites", "500", "lattice size N (even, >= 4)"},
        {"out_dir", ".", "directory for output files"},
        {"workers", "1", "worker threads"},
        {"strict", "false", "exit 4 when a run's built-in checks are inconclusive"},
    };
    return opts;
}

inline const std::map<std::string, std::vector<OptionSpec>>& command_options()
{
    static const std::map<std::string, std::vector<OptionSpec>> table{
        {"simulate",
         {{"t_max", "10", "horizon"},
          {"dt", "0.0001", "time step"},
          {"integrator", "reference", "euler | reference"},
          {"record_stride", "0", "record every k-th step (0 = at most 5001 samples)"},
          {"export_sites", "0", "write sites x < export_sites (0 = all)"},
          {"topology", "half_line", "half_line | finite_line"}}},
        {"limit", {{"cutoff", "40", "write sites x < cutoff"}}},
        {"oracle",
         {{"t_max", "50", "horizon of the reference trajectory"},
          {"dt", "0.01", "sampling step of the reference trajectory"},
          {"s_values", "0.5,1,2,5", "Laplace variables"},
          {"x_values", "0,1,2,3", "sites"}}},
        {"sweep",
         {{"grid_points", "41", "points per axis"},
          {"grid_min", "-1", "lower grid bound"},
          {"grid_max", "1", "upper grid bound"},
          {"t_max", "200", "horizon per point"},
          {"dt", "0.01", "time grid step"},
          {"record_stride", "50", "record every k-th step"},
          {"epsilon", "0.04", "localization threshold on tail-averaged P(X_t = 0)"}}},
        {"invariant",
         {{"phi0_re", "1", "Re phi(0)"},
          {"phi0_im", "0", "Im phi(0)"},
          {"normalize", "false", "rescale |phi(0)| to sqrt(1 - (gamma0/gamma1)^2)"}}},
        {"convergence", {{"checkpoints", "0,100,250,500", "times at which P(X_t = 0) is reported"}}},
    };
    return table;
}

inline std::string flag_name(const std::string& key)
{
    std::string f = "--" + key;
    for (auto& c : f)
        if (c == '_')
            c = '-';
    return f;
}

// ---------------------------------------------------------------------------
// Outputs and manifest
// ---------------------------------------------------------------------------

inline std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    void write(const std::string& name, const std::string& content)
    {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out)
            throw Error(ErrorKind::InvalidConfig, "out_dir", "cannot write " + path.string());
        entries_.push_back({{"path", path.string()}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    }

    const nlohmann::json& entries() const { return entries_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    nlohmann::json entries_ = nlohmann::json::array();
};

template <class Fn>
std::string render(Fn&& fn)
{
    std::ostringstream os;
    fn(os);
    return os.str();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct CommandResult {
    int code = kOk;
    nlohmann::json checks = nlohmann::json::object();
};

inline HoppingPair couplings_from(const Resolved& r)
{
    const double g0 = r.real("gamma0"), g1 = r.real("gamma1");
    try {
        return HoppingPair(g0, g1);
    } catch (const Error& e) {
        throw Error(e.kind(), r.field(e.field()),
                    "coupling must be nonzero (the chain is defined only for gamma0, gamma1 != 0)");
    }
}

inline LatticeTopology topology_from(const Resolved& r, LatticeKind kind = LatticeKind::HalfLineTruncated)
{
    try {
        return LatticeTopology(r.count("n_sites"), kind);
    } catch (const Error& e) {
        throw Error(e.kind(), r.field("n_sites"), "site count must be even and at least 4");
    }
}

inline CommandResult cmd_simulate(const Resolved& r, OutputSet& out, bool strict)
{
    WalkConfig c;
    c.couplings = couplings_from(r);
    const std::string topo = r.str("topology");
    if (topo != "half_line" && topo != "finite_line")
        throw Error(ErrorKind::InvalidConfig, r.field("topology"), "expected half_line or finite_line");
    c.topology = topology_from(r, topo == "half_line" ? LatticeKind::HalfLineTruncated : LatticeKind::FiniteLine);
    c.t_max = r.real("t_max");
    c.dt = r.real("dt");
    const std::string integ = r.str("integrator");
    if (integ == "euler")
        c.integrator = Integrator::Euler;
    else if (integ == "reference")
        c.integrator = Integrator::Reference;
    else
        throw Error(ErrorKind::InvalidConfig, r.field("integrator"), "expected euler or reference");
    c.record_stride = r.count("record_stride");
    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(e.kind(), r.field(e.field()), e.what());
    }

    const Trajectory traj = evolve(c);
    std::size_t sites = r.count("export_sites");
    if (sites == 0)
        sites = c.topology.size();
    out.write("trajectory.csv", render([&](std::ostream& os) { write_trajectory_csv(os, traj, sites); }));
    const nlohmann::json meta = trajectory_metadata(traj);
    out.write("trajectory.json", meta.dump(2) + "\n");

    CommandResult res;
    res.checks = {{"truncation_contaminated", traj.truncation_contaminated()},
                  {"norm_drift", traj.max_norm_drift()}};
    if (strict && traj.truncation_contaminated())
        res.code = kInconclusive;
    return res;
}

inline CommandResult cmd_limit(const Resolved& r, OutputSet& out, bool)
{
    const HoppingPair g = couplings_from(r);
    const std::size_t cutoff = r.count("cutoff");
    out.write("limit.csv", render([&](std::ostream& os) { write_limit_csv(os, g, cutoff); }));
    CommandResult res;
    res.checks = {{"phase", to_string(classify_phase(g))}, {"total_mass", total_limit_mass(g)}};
    return res;
}

inline CommandResult cmd_oracle(const Resolved& r, OutputSet& out, bool strict)
{
    WalkConfig c;
    c.couplings = couplings_from(r);
    c.topology = topology_from(r);
    c.t_max = r.real("t_max");
    c.dt = r.real("dt");
    c.record_stride = 1;
    c.integrator = Integrator::Reference;
    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(e.kind(), r.field(e.field()), e.what());
    }
    if (c.total_steps() + 1 > 200'000)
        throw Error(ErrorKind::InvalidConfig, r.field("dt"), "oracle trajectory would exceed 200000 samples");
    const Trajectory traj = evolve(c);

    std::vector<OracleRow> rows;
    bool all_within = true;
    for (double s : r.list("s_values")) {
        if (!(s > 0.0))
            throw Error(ErrorKind::NonPositiveS, r.field("s_values"), "Laplace variables must be positive");
        for (double xv : r.list("x_values")) {
            if (xv < 0 || xv != std::floor(xv) || xv >= static_cast<double>(c.topology.size()))
                throw Error(ErrorKind::InvalidConfig, r.field("x_values"), "sites must be integers inside the lattice");
            rows.push_back(compare_with_closed_form(traj, s, static_cast<std::size_t>(xv)));
            all_within = all_within && rows.back().abs_error() <= 1e-3 + rows.back().numeric.tail_bound;
        }
    }
    out.write("oracle.csv", render([&](std::ostream& os) { write_oracle_csv(os, rows); }));
    CommandResult res;
    res.checks = {{"all_within_1e-3_plus_tail", all_within}};
    if (strict && !all_within)
        res.code = kInconclusive;
    return res;
}

inline CommandResult cmd_sweep(const Resolved& r, OutputSet& out, bool strict)
{
    const std::size_t points = r.count("grid_points");
    const double lo = r.real("grid_min"), hi = r.real("grid_max");
    if (points == 0 || !(lo < hi))
        throw Error(ErrorKind::InvalidConfig, r.field("grid_points"), "need at least one point and grid_min < grid_max");
    const auto grid = default_phase_grid(points, lo, hi);

    WalkConfig budget = default_sweep_budget();
    budget.topology = topology_from(r);
    budget.t_max = r.real("t_max");
    budget.dt = r.real("dt");
    budget.record_stride = r.count("record_stride");
    budget.record_start = 0.8 * budget.t_max;
    try {
        budget.validate();
    } catch (const Error& e) {
        throw Error(e.kind(), r.field(e.field()), e.what());
    }
    SweepOptions opts;
    opts.epsilon = r.real("epsilon");
    opts.workers = static_cast<unsigned>(std::max<std::size_t>(1, r.count("workers")));

    const auto results = sweep_phase_diagram(grid, budget, opts);
    const nlohmann::json grid_spec = {{"points_per_axis", points}, {"min", lo}, {"max", hi}, {"axes_removed", true}};
    out.write("sweep.csv", render([&](std::ostream& os) { write_sweep_csv(os, results); }));
    out.write("sweep.json", sweep_summary_json(results, budget, opts, grid_spec).dump(2) + "\n");

    const SweepSummary s = summarize(results);
    CommandResult res;
    res.checks = {{"contradictions", s.contradictions}, {"inconclusive", s.inconclusive}};
    if (strict && (s.contradictions > 0 || s.inconclusive > 0))
        res.code = kInconclusive;
    return res;
}

inline CommandResult cmd_invariant(const Resolved& r, OutputSet& out, bool strict)
{
    const HoppingPair g = couplings_from(r);
    const LatticeTopology topo = topology_from(r);
    Complex phi0(r.real("phi0_re"), r.real("phi0_im"));
    if (r.flag("normalize")) {
        if (phi0 == Complex{})
            throw Error(ErrorKind::ZeroPhi0, r.field("phi0_re"), "amplitude at the origin must be nonzero");
        try {
            phi0 = std::polar(normalized_phi0_modulus(g), std::arg(phi0));
        } catch (const Error& e) {
            throw Error(e.kind(), r.field("normalize"), e.what());
        }
    }
    AmplitudeField phi;
    try {
        phi = invariant_state(g, phi0, topo.size());
    } catch (const Error& e) {
        throw Error(e.kind(), r.field("phi0_re"), "amplitude at the origin must be nonzero");
    }
    const auto residual = build_hamiltonian(g, topo).apply(phi).values;
    double interior = 0.0;
    for (std::size_t x = 0; x + 2 < residual.size(); ++x)
        interior = std::max(interior, std::abs(residual[x]));
    out.write("invariant.csv", render([&](std::ostream& os) { write_field_csv(os, phi); }));

    CommandResult res;
    res.checks = {{"interior_residual", interior}, {"norm", squared_norm(phi.values)}};
    if (strict && interior > 1e-15)
        res.code = kInconclusive;
    return res;
}

inline CommandResult cmd_convergence(const Resolved& r, OutputSet& out, bool)
{
    const HoppingPair g = couplings_from(r);
    const LatticeTopology topo = topology_from(r);
    std::vector<ConvergenceRow> rows;
    try {
        rows = convergence_study(g, r.list("checkpoints"), topo.size());
    } catch (const Error& e) {
        throw Error(e.kind(), r.field("checkpoints"), e.what());
    }
    out.write("convergence.csv", render([&](std::ostream& os) { write_convergence_csv(os, rows); }));
    return {};
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr)
{
    CLI::App app{"Continuous-time quantum walk on the half line with 2-periodic hopping"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::map<std::string, std::map<std::string, std::string>> given;
    std::map<std::string, std::string> config_files;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> about{
        {"simulate", "evolve a walk and export the trajectory"},
        {"limit", "closed-form limiting amplitudes and measure"},
        {"oracle", "numeric Laplace transform against the closed form"},
        {"sweep", "phase diagram over a (gamma0, gamma1) grid"},
        {"invariant", "invariant state and its stationarity check"},
        {"convergence", "simulated P(X_t = 0) against the limit at checkpoints"},
    };
    for (const auto& [name, specific] : command_options()) {
        CLI::App* sub = app.add_subcommand(name, about.at(name));
        subs[name] = sub;
        sub->add_option("--config", config_files[name], "flat key = value config file");
        auto add = [&](const OptionSpec& o) {
            if (o.key == "strict")
                sub->add_flag_callback("--strict", [&given, name = name]() { given[name]["strict"] = "true"; },
                                       o.help);
            else
                sub->add_option_function<std::string>(
                    flag_name(o.key), [&given, name = name, key = o.key](const std::string& v) { given[name][key] = v; },
                    o.help + " (default " + o.default_value + ")");
        };
        for (const auto& o : common_options())
            add(o);
        for (const auto& o : specific)
            add(o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, std::cout, err);
        return code == 0 ? kOk : kConfigError;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed())
            command = name;

    const std::string started = utc_timestamp();
    try {
        Settings values;
        for (const auto& o : common_options())
            values[o.key] = o.default_value;
        for (const auto& o : command_options().at(command))
            values[o.key] = o.default_value;
        if (command == "sweep")
            values["workers"] = std::to_string(std::max(1u, std::thread::hardware_concurrency()));
        if (!config_files[command].empty()) {
            std::ifstream in(config_files[command]);
            if (!in)
                throw Error(ErrorKind::InvalidConfig, "config", "cannot open " + config_files[command]);
            for (auto& [k, v] : parse_config_text(in, config_files[command])) {
                if (!values.count(k))
                    throw Error(ErrorKind::InvalidConfig, "config." + k, "unknown key for '" + command + "'");
                values[k] = v;
            }
        }
        for (auto& [k, v] : given[command])
            values[k] = v;

        const Resolved resolved(values, command);
        const bool strict = resolved.flag("strict");
        OutputSet out(resolved.str("out_dir"));

        CommandResult result;
        if (command == "simulate")
            result = cmd_simulate(resolved, out, strict);
        else if (command == "limit")
            result = cmd_limit(resolved, out, strict);
        else if (command == "oracle")
            result = cmd_oracle(resolved, out, strict);
        else if (command == "sweep")
            result = cmd_sweep(resolved, out, strict);
        else if (command == "invariant")
            result = cmd_invariant(resolved, out, strict);
        else
            result = cmd_convergence(resolved, out, strict);

        nlohmann::json manifest = {{"command", command},
                                   {"config", resolved.values()},
                                   {"tool_version", kVersion},
                                   {"started", started},
                                   {"finished", utc_timestamp()},
                                   {"outputs", out.entries()},
                                   {"checks", result.checks},
                                   {"exit_code", result.code}};
        std::ofstream(out.dir() / "manifest.json") << manifest.dump(2) << "\n";
        if (result.code == kInconclusive)
            err << "ctqw " << command << ": inconclusive checks " << result.checks.dump() << "\n";
        return result.code;
    } catch (const Error& e) {
        err << "ctqw " << command << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
        return e.kind() == ErrorKind::NonFiniteDetected ? kNumericalFailure : kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "ctqw " << command << ": out_dir: " << e.what() << "\n";
        return kConfigError;
    }
}

} // namespace ctqw::cli

#endif // CTQW_TOOLS_CLI_APP_HPP
