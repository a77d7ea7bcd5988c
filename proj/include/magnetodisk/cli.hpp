#pragma once

// Command-line front end. Needs CLI11.hpp and json.hpp on the include path.

#include "magnetodisk/bifurcation.hpp"
#include "magnetodisk/eigen.hpp"
#include "magnetodisk/fields.hpp"
#include "magnetodisk/operators.hpp"
#include "magnetodisk/solver.hpp"
#include "magnetodisk/verification.hpp"
#include "magnetodisk/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace magnetodisk::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitInvalid = 2;

/// Bad configuration or arguments; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { eigen, minimize, sweep, fields, verify };

inline const char* to_string(Command c)
{
    switch (c) {
    case Command::eigen: return "eigen";
    case Command::minimize: return "minimize";
    case Command::sweep: return "sweep";
    case Command::fields: return "fields";
    case Command::verify: return "verify";
    }
    return "unknown";
}

struct MuRange {
    double lo;
    double hi;
    std::size_t steps;
};

struct RunConfig {
    std::size_t n = 512;
    double grading = 2.0;
    std::optional<double> mu;
    std::optional<MuRange> mu_range;
    std::optional<double> lambda;
    double seed_epsilon = 0.1;
    std::uint64_t seed = 1;
    double residual_tol = 1e-8;
    std::size_t max_iterations = 2000;
    std::size_t trials = 8; ///< random restarts in minimize and fields
    std::size_t fields_resolution = 32;
    std::string out = ".";
    std::string format = "csv";
};

/// "LO:HI:STEPS".
inline MuRange parse_mu_range(const std::string& text)
{
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (b == std::string::npos || text.find(':', b + 1) != std::string::npos) {
        throw UsageError("mu-range must look like LO:HI:STEPS, got '" + text + "'");
    }
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) {
            throw UsageError("mu-range: cannot parse '" + s + "'");
        }
        return v;
    };
    const double lo = number(text.substr(0, a));
    const double hi = number(text.substr(a + 1, b - a - 1));
    const double steps = number(text.substr(b + 1));
    if (steps != std::floor(steps) || steps < 0.0) {
        throw UsageError("mu-range: STEPS must be a non-negative integer");
    }
    return {lo, hi, static_cast<std::size_t>(steps)};
}

namespace detail {

template <class T>
T read_field(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("config: field '") + key + "' has the wrong type");
    }
}

inline std::size_t read_count(const json& j, const char* key)
{
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw UsageError(std::string("config: field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

inline double read_number(const json& j, const char* key)
{
    const json& v = j.at(key);
    if (!v.is_number()) {
        throw UsageError(std::string("config: field '") + key + "' must be a number");
    }
    return v.get<double>();
}

} // namespace detail

inline RunConfig config_from_json(const json& j)
{
    if (!j.is_object()) {
        throw UsageError("config: top level must be a JSON object");
    }
    static const std::vector<std::string> known{
        "n",    "grading",      "mu",     "mu_range",       "lambda",
        "seed", "seed_epsilon", "trials", "residual_tol",   "max_iterations",
        "out",  "format",       "fields_resolution"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw UsageError("config: unknown field '" + key + "'");
        }
    }
    RunConfig c;
    if (j.contains("n")) c.n = detail::read_count(j, "n");
    if (j.contains("grading")) c.grading = detail::read_number(j, "grading");
    if (j.contains("mu")) c.mu = detail::read_number(j, "mu");
    if (j.contains("lambda")) c.lambda = detail::read_number(j, "lambda");
    if (j.contains("seed")) c.seed = detail::read_count(j, "seed");
    if (j.contains("seed_epsilon")) c.seed_epsilon = detail::read_number(j, "seed_epsilon");
    if (j.contains("trials")) c.trials = detail::read_count(j, "trials");
    if (j.contains("residual_tol")) c.residual_tol = detail::read_number(j, "residual_tol");
    if (j.contains("max_iterations")) c.max_iterations = detail::read_count(j, "max_iterations");
    if (j.contains("fields_resolution")) {
        c.fields_resolution = detail::read_count(j, "fields_resolution");
    }
    if (j.contains("out")) c.out = detail::read_field<std::string>(j, "out");
    if (j.contains("format")) c.format = detail::read_field<std::string>(j, "format");
    if (j.contains("mu_range")) {
        const json& r = j.at("mu_range");
        if (r.is_string()) {
            c.mu_range = parse_mu_range(r.get<std::string>());
        } else if (r.is_object() && r.size() == 3 && r.contains("lo") && r.contains("hi") &&
                   r.contains("steps")) {
            c.mu_range = MuRange{detail::read_number(r, "lo"), detail::read_number(r, "hi"),
                                 detail::read_count(r, "steps")};
        } else {
            throw UsageError("config: mu_range must be \"LO:HI:STEPS\" or {lo, hi, steps}");
        }
    }
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot read config file '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

/// Every field with defaults resolved, except `out`. Input to the hash.
inline json config_to_json(const RunConfig& c)
{
    json j;
    j["n"] = c.n;
    j["grading"] = c.grading;
    j["mu"] = c.mu ? json(*c.mu) : json(nullptr);
    j["lambda"] = c.lambda ? json(*c.lambda) : json(nullptr);
    j["mu_range"] = c.mu_range ? json{{"lo", c.mu_range->lo}, {"hi", c.mu_range->hi},
                                      {"steps", c.mu_range->steps}}
                               : json(nullptr);
    j["seed"] = c.seed;
    j["seed_epsilon"] = c.seed_epsilon;
    j["trials"] = c.trials;
    j["residual_tol"] = c.residual_tol;
    j["max_iterations"] = c.max_iterations;
    j["fields_resolution"] = c.fields_resolution;
    j["format"] = c.format;
    return j;
}

/// FNV-1a 64 of the compact, key-sorted dump of config_to_json, as 16 hex digits.
inline std::string config_hash(const RunConfig& c)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config_to_json(c).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Checks the fields a command needs. Throws UsageError.
inline void validate(const RunConfig& c, Command cmd)
{
    if (c.n < 8) {
        throw UsageError("n must be at least 8");
    }
    if (c.n > (std::size_t{1} << 24)) {
        throw UsageError("n is too large");
    }
    if (!(c.grading >= 1.0 && c.grading <= 4.0)) {
        throw UsageError("grading must lie in [1, 4]");
    }
    if (c.format != "csv" && c.format != "json") {
        throw UsageError("format must be csv or json");
    }
    if (!(c.seed_epsilon > 0.0) || !std::isfinite(c.seed_epsilon)) {
        throw UsageError("seed_epsilon must be positive");
    }
    if (!(c.residual_tol > 0.0) || !std::isfinite(c.residual_tol)) {
        throw UsageError("residual_tol must be positive");
    }
    if (c.max_iterations == 0) {
        throw UsageError("max_iterations must be positive");
    }
    if (c.fields_resolution == 0 || c.fields_resolution > 4096) {
        throw UsageError("fields_resolution must lie in [1, 4096]");
    }
    if (c.mu && !std::isfinite(*c.mu)) {
        throw UsageError("mu must be finite");
    }
    if (c.lambda && !std::isfinite(*c.lambda)) {
        throw UsageError("lambda must be finite");
    }
    if (c.mu && c.lambda && std::abs(*c.mu - 0.5 * *c.lambda * *c.lambda) > 1e-12) {
        throw UsageError("mu and lambda violate mu = lambda^2 / 2");
    }
    if (c.mu_range) {
        const MuRange& r = *c.mu_range;
        if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi) || r.steps < 2) {
            throw UsageError("mu_range needs finite LO < HI and STEPS >= 2");
        }
        if (r.lo < 0.0) {
            throw UsageError("mu_range must be non-negative");
        }
    }
    const bool has_mu = c.mu.has_value() || c.lambda.has_value();
    switch (cmd) {
    case Command::minimize:
    case Command::fields:
        if (!has_mu) {
            throw UsageError(std::string(to_string(cmd)) + " needs mu (or lambda)");
        }
        if (c.mu_range) {
            throw UsageError(std::string(to_string(cmd)) + " takes mu, not mu_range");
        }
        break;
    case Command::sweep:
        if (!c.mu_range) {
            throw UsageError("sweep needs mu_range");
        }
        if (has_mu) {
            throw UsageError("sweep takes mu_range, not mu or lambda");
        }
        break;
    case Command::eigen:
    case Command::verify:
        break;
    }
    if (c.mu && *c.mu < 0.0) {
        throw UsageError("mu must be non-negative");
    }
}

/// Coupling parameters for a validated config.
inline ModelParams model_params(const RunConfig& c)
{
    ModelParams p = c.mu && c.lambda ? ModelParams::from_mu_lambda(*c.mu, *c.lambda)
                    : c.lambda       ? ModelParams::from_lambda(*c.lambda)
                                     : ModelParams::from_mu(c.mu.value_or(2.0));
    p.set_residual_tol(c.residual_tol).set_max_iterations(c.max_iterations);
    return p;
}

/// Writes output files with the shared metadata.
class OutputWriter {
public:
    OutputWriter(const RunConfig& cfg, Command cmd)
        : dir_(cfg.out), format_(cfg.format), hash_(config_hash(cfg)), command_(to_string(cmd))
    {
    }

    json meta() const
    {
        json modules = json::object();
        for (const auto& [name, version] : kModuleVersions) {
            modules[std::string(name)] = std::string(version);
        }
        return {{"tool", "magnetodisk"},
                {"version", std::string(kVersion)},
                {"command", command_},
                {"config_hash", hash_},
                {"modules", modules}};
    }

    void write_json(const std::string& name, json body) const
    {
        body["meta"] = meta();
        write_file(name, body.dump(2) + "\n");
    }

    /// A table of numbers or strings, as CSV or JSON depending on the format.
    /// `stem` has no extension.
    void write_table(const std::string& stem, const std::vector<std::string>& columns,
                     const std::vector<std::vector<json>>& rows) const
    {
        if (format_ == "json") {
            write_json(stem + ".json", {{"columns", columns}, {"rows", rows}});
            return;
        }
        std::ostringstream os;
        os << "# magnetodisk " << kVersion << " config_hash=" << hash_ << " modules=";
        for (std::size_t i = 0; i < kModuleVersions.size(); ++i) {
            os << (i ? "," : "") << kModuleVersions[i].first << ':' << kModuleVersions[i].second;
        }
        os << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) {
            os << (i ? "," : "") << columns[i];
        }
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                os << (i ? "," : "") << csv_cell(row[i]);
            }
            os << '\n';
        }
        write_file(stem + ".csv", os.str());
    }

private:
    static std::string csv_cell(const json& v)
    {
        if (v.is_string()) {
            return v.get<std::string>();
        }
        if (v.is_number_integer()) {
            return v.dump();
        }
        if (v.is_number()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
            return buf;
        }
        return "nan";
    }

    void write_file(const std::string& name, const std::string& text) const
    {
        std::filesystem::create_directories(dir_);
        const auto path = std::filesystem::path(dir_) / name;
        std::ofstream out(path, std::ios::binary);
        out << text;
        if (!out) {
            throw std::runtime_error("cannot write " + path.string());
        }
    }

    std::string dir_;
    std::string format_;
    std::string hash_;
    std::string command_;
};

namespace detail {

inline std::vector<std::vector<json>> profile_rows(const Profile& h, const NodalField& w)
{
    const auto r = h.grid().nodes();
    std::vector<std::vector<json>> rows;
    rows.reserve(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        rows.push_back({r[k], h[k], w.values[k]});
    }
    return rows;
}

/// Lowest-energy converged result among epsilon * phi0 and `trials` random starts.
inline SolveReport best_minimizer(const ModelParams& p, const EigenPair& eig, const RunConfig& c)
{
    SolveReport best = minimize(p, eig, EigenSeed{c.seed_epsilon});
    std::mt19937_64 rng(c.seed);
    for (std::size_t i = 0; i < c.trials; ++i) {
        SolveReport run = minimize(p, random_profile(eig.phi.grid_ptr(), rng));
        const bool better = run.converged && (!best.converged || run.energy < best.energy);
        if (better) {
            best = std::move(run);
        }
    }
    return best;
}

inline json solve_json(const SolveReport& r, const ModelParams& p)
{
    return {{"mu", p.mu()},
            {"lambda", *p.lambda()},
            {"energy", r.energy},
            {"residual", r.residual},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"status", to_string(r.status)},
            {"norm", l2_norm(r.minimizer)},
            {"max_value", max_abs(r.minimizer)}};
}

} // namespace detail

inline int cmd_eigen(const RunConfig& c)
{
    const OutputWriter out(c, Command::eigen);
    const EigenPair eig = smallest_eigenpair(build_grid(c.n, c.grading));
    out.write_json("eigen.json", {{"gamma0", eig.gamma},
                                  {"n", c.n},
                                  {"grading", c.grading},
                                  {"residual", eig.residual},
                                  {"iterations", eig.iterations},
                                  {"threshold_mu", 0.5 * eig.gamma}});
    std::vector<std::vector<json>> rows;
    const auto r = eig.phi.grid().nodes();
    for (std::size_t k = 0; k < r.size(); ++k) {
        rows.push_back({r[k], eig.phi[k]});
    }
    out.write_table("phi0", {"r", "phi0"}, rows);
    std::cout << "gamma0 = " << json(eig.gamma).dump() << '\n';
    return kExitOk;
}

inline int cmd_minimize(const RunConfig& c)
{
    const OutputWriter out(c, Command::minimize);
    const ModelParams p = model_params(c);
    const EigenPair eig = smallest_eigenpair(build_grid(c.n, c.grading));
    const SolveReport r = detail::best_minimizer(p, eig, c);
    const NodalField w = reconstruct_w(r.minimizer, *p.lambda());
    out.write_json("report.json", detail::solve_json(r, p));
    out.write_table("profile", {"r", "h", "w"}, detail::profile_rows(r.minimizer, w));
    std::cout << "energy = " << json(r.energy).dump() << " (" << to_string(r.status) << ")\n";
    if (!r.converged) {
        std::cerr << "minimize: solver " << to_string(r.status) << ", best-so-far written\n";
        return kExitNumerical;
    }
    return kExitOk;
}

inline int cmd_fields(const RunConfig& c)
{
    const OutputWriter out(c, Command::fields);
    const ModelParams p = model_params(c);
    const double lambda = *p.lambda();
    const EigenPair eig = smallest_eigenpair(build_grid(c.n, c.grading));
    const SolveReport r = detail::best_minimizer(p, eig, c);
    const NodalField w = reconstruct_w(r.minimizer, lambda);

    json report = detail::solve_json(r, p);
    report["w_at_boundary"] = w.values.back();
    report["w_at_center"] = w.values.front();
    report["second_equation_residual"] = second_equation_residual(r.minimizer, w, lambda);
    report["coupled_energy"] = coupled_energy(r.minimizer, w, lambda);
    report["reduction_identity_gap"] = check_reduction_identity(r.minimizer, 100, c.seed);
    out.write_json("report.json", report);
    out.write_table("profile", {"r", "h", "w"}, detail::profile_rows(r.minimizer, w));

    std::vector<std::vector<json>> rows;
    for (const auto& s : sample_fields(r.minimizer, w, c.fields_resolution)) {
        rows.push_back({s.x, s.y, s.m[0], s.m[1], s.m[2], s.w});
    }
    out.write_table("fields", {"x", "y", "m1", "m2", "m3", "w"}, rows);
    if (!r.converged) {
        std::cerr << "fields: solver " << to_string(r.status) << ", best-so-far written\n";
        return kExitNumerical;
    }
    return kExitOk;
}

inline int cmd_sweep(const RunConfig& c)
{
    const OutputWriter out(c, Command::sweep);
    ModelParams base = ModelParams::from_mu(0.0);
    base.set_residual_tol(c.residual_tol).set_max_iterations(c.max_iterations);
    ContinuationOptions opts;
    opts.seed_epsilon = c.seed_epsilon;
    const EigenPair eig = smallest_eigenpair(build_grid(c.n, c.grading));
    const auto& range = *c.mu_range;
    const BifurcationDiagram d =
        trace_branches(eig, mu_samples(range.lo, range.hi, range.steps), base, opts);

    std::vector<std::vector<json>> rows;
    for (const auto& pt : d.points) {
        rows.push_back({pt.mu, to_string(pt.branch), pt.beta, pt.energy});
    }
    out.write_table("diagram", {"mu", "branch", "beta", "energy"}, rows);
    const auto threshold = d.detected_threshold();
    const auto slope = amplitude_fit_slope(d);
    out.write_json("summary.json", {{"gamma0", d.gamma0},
                                    {"cbar", d.cbar},
                                    {"predicted_threshold", 0.5 * d.gamma0},
                                    {"detected_threshold", threshold ? json(*threshold) : json(nullptr)},
                                    {"amplitude_fit_slope", slope ? json(*slope) : json(nullptr)},
                                    {"complete", d.complete},
                                    {"diagnostic", d.diagnostic}});
    if (!d.complete) {
        std::cerr << "sweep: " << d.diagnostic << "; partial diagram written\n";
        return kExitNumerical;
    }
    return kExitOk;
}

inline int cmd_verify(const RunConfig& c, bool inject_sign_error)
{
    const OutputWriter out(c, Command::verify);
    VerifyOptions opt;
    opt.cells = c.n;
    opt.grading = c.grading;
    opt.mu = model_params(c).mu();
    opt.seed = c.seed;
    opt.inject_sign_error = inject_sign_error;
    const auto checks = run_verification(opt);

    json list = json::array();
    std::vector<std::string> failed;
    for (const auto& ch : checks) {
        list.push_back({{"name", ch.name},
                        {"status", to_string(ch.status)},
                        {"value", ch.value},
                        {"threshold", ch.threshold},
                        {"detail", ch.detail}});
        if (ch.status == CheckStatus::fail) {
            failed.push_back(ch.name);
        }
        std::cout << to_string(ch.status) << "  " << ch.name << '\n';
    }
    out.write_json("verify.json", {{"checks", list}, {"passed", failed.empty()}});
    if (!failed.empty()) {
        std::cerr << "verify: failed checks:";
        for (const auto& f : failed) {
            std::cerr << ' ' << f;
        }
        std::cerr << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

/// Parses arguments, loads and validates the config, and dispatches.
inline int run(int argc, const char* const* argv)
{
    CLI::App app{"Radially symmetric magneto-elastic disk solver", "magnetodisk"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::size_t> n;
    std::optional<double> mu;
    std::optional<std::string> mu_range;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    std::optional<std::uint64_t> seed;
    bool inject_sign_error = false;

    std::vector<std::pair<Command, CLI::App*>> subs;
    for (Command cmd : {Command::eigen, Command::minimize, Command::sweep, Command::fields,
                        Command::verify}) {
        CLI::App* s = app.add_subcommand(to_string(cmd));
        s->add_option("--config", config_path, "JSON config file");
        s->add_option("--n", n, "number of grid cells");
        s->add_option("--mu", mu, "coupling mu");
        s->add_option("--mu-range", mu_range, "LO:HI:STEPS");
        s->add_option("--out", out_dir, "output directory");
        s->add_option("--format", format, "csv or json");
        s->add_option("--seed", seed, "random seed");
        if (cmd == Command::verify) {
            s->add_flag("--inject-sign-error", inject_sign_error)->group("");
        }
        subs.emplace_back(cmd, s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    Command cmd = Command::eigen;
    for (const auto& [c, s] : subs) {
        if (s->parsed()) {
            cmd = c;
        }
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        }
        if (n) cfg.n = *n;
        if (mu) {
            cfg.mu = *mu;
            if (cfg.lambda && std::abs(*mu - 0.5 * *cfg.lambda * *cfg.lambda) > 1e-12) {
                cfg.lambda.reset(); // a flag value replaces the tied pair
            }
        }
        if (mu_range) cfg.mu_range = parse_mu_range(*mu_range);
        if (out_dir) cfg.out = *out_dir;
        if (format) cfg.format = *format;
        if (seed) cfg.seed = *seed;
        validate(cfg, cmd);
    } catch (const UsageError& e) {
        std::cerr << "magnetodisk: " << e.what() << '\n';
        return kExitInvalid;
    }

    try {
        switch (cmd) {
        case Command::eigen: return cmd_eigen(cfg);
        case Command::minimize: return cmd_minimize(cfg);
        case Command::sweep: return cmd_sweep(cfg);
        case Command::fields: return cmd_fields(cfg);
        case Command::verify: return cmd_verify(cfg, inject_sign_error);
        }
    } catch (const EigenNonConvergence& e) {
        std::cerr << "magnetodisk: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "magnetodisk: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitNumerical;
}

} // namespace magnetodisk::cli
