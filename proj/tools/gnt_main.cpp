// gnt -- command-line surface for the generalized Newton transformation
// library.  Five subcommands cover the library end to end:
//
//   sigma       sigma table + internal identities of a matrix system (JSON in)
//   average     frame-averaged sigma_hat over the O(q)/SO(q) fiber
//   minimality  criticality residual of a gallery patch over a quadrature mesh
//   variation   finite-difference check of the first-variation identity
//   gallery     list the example patches or run one entry's expected facts
//
// Every run emits a single JSON report (stdout or --out).  Reports are
// deterministic: identical configuration and seed produce identical bytes.
// Exit codes: 0 = success / all checks passed, 1 = a check failed,
// 2 = usage or input error (diagnostic on stderr).
//
// Defaults live in one schema shared by flags and the optional --config JSON
// file, with precedence flags > config file > built-in defaults; the seed
// additionally falls back to the GNT_SEED environment variable (between
// config and built-in default) and is always echoed into the report.

#include "CLI11.hpp"
#include "json.hpp"

#include <gnt/gallery.hpp>
#include <gnt/haar.hpp>
#include <gnt/minimality.hpp>
#include <gnt/multiindex.hpp>
#include <gnt/newton.hpp>
#include <gnt/operator_system.hpp>
#include <gnt/oracle.hpp>
#include <gnt/patch.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

/// A problem with the invocation or its input files: the message goes to
/// stderr and the process exits with status 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// small parsing helpers
// ---------------------------------------------------------------------------

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::istringstream stream(text);
    std::string item;
    while (std::getline(stream, item, sep)) out.push_back(item);
    return out;
}

int parse_int_token(const std::string& token, const std::string& what) {
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + token + "' is not an integer");
    }
}

double parse_double_token(const std::string& token, const std::string& what) {
    try {
        std::size_t used = 0;
        const double value = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + token + "' is not a number");
    }
}

/// Multi-indices are keyed as their JSON array literal, e.g. "[2,0,1]", so a
/// report is self-describing without a separate index list.
std::string index_key(const gnt::MultiIndex& u) { return json(u.entries()).dump(); }

json json_vec(const Eigen::VectorXd& v) {
    json out = json::array();
    for (long i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

gnt::MultiIndex parse_multi_index(const std::string& text, int expected_q,
                                  const std::string& what) {
    const std::vector<std::string> tokens = split(text, ',');
    std::vector<int> entries;
    entries.reserve(tokens.size());
    for (const std::string& token : tokens) {
        const int value = parse_int_token(token, what);
        if (value < 0) throw UsageError(what + ": entries must be non-negative");
        entries.push_back(value);
    }
    if (static_cast<int>(entries.size()) != expected_q)
        throw UsageError(what + ": need exactly " + std::to_string(expected_q) +
                         " comma-separated entries here (got " +
                         std::to_string(entries.size()) + ")");
    return gnt::MultiIndex(entries);
}

std::vector<double> parse_steps(const std::string& text) {
    std::vector<double> steps;
    for (const std::string& token : split(text, ','))
        steps.push_back(parse_double_token(token, "--steps"));
    for (double h : steps)
        if (!(h > 0.0)) throw UsageError("--steps: step sizes must be positive");
    if (steps.size() < 2)
        throw UsageError("--steps: need at least two step sizes to fit a convergence order");
    std::sort(steps.begin(), steps.end(), std::greater<double>());
    return steps;
}

gnt::Group parse_group(const std::string& text) {
    if (text == "O") return gnt::Group::O;
    if (text == "SO") return gnt::Group::SO;
    throw UsageError("unknown group '" + text + "' (choose O or SO)");
}

gnt::FiberScheme parse_scheme(const std::string& text) {
    if (text == "mc" || text == "monte_carlo") return gnt::FiberScheme::monte_carlo;
    if (text == "exact") return gnt::FiberScheme::exact;
    throw UsageError("unknown scheme '" + text + "' (choose mc, monte_carlo, or exact)");
}

gnt::DerivativeBackend parse_backend(const std::string& text) {
    if (text == "analytic") return gnt::DerivativeBackend::analytic;
    if (text == "fd" || text == "finite_difference")
        return gnt::DerivativeBackend::finite_difference;
    throw UsageError("unknown backend '" + text + "' (choose analytic or fd)");
}

std::string backend_label(gnt::DerivativeBackend backend) {
    return backend == gnt::DerivativeBackend::analytic ? "analytic" : "finite_difference";
}

// ---------------------------------------------------------------------------
// JSON file I/O
// ---------------------------------------------------------------------------

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_report(const json& report, const std::string& out_path) {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw UsageError("cannot open output file '" + out_path + "'");
    out << text;
    if (!out) throw UsageError("failed writing output file '" + out_path + "'");
}

/// Matrix-system input: a JSON object {"matrices": [[[row], [row]], ...]}
/// holding q equally sized square matrices.
gnt::OperatorSystem parse_system(const json& doc) {
    if (!doc.is_object() || !doc.contains("matrices"))
        throw UsageError("input must be a JSON object with a 'matrices' array");
    const json& mats = doc.at("matrices");
    if (!mats.is_array()) throw UsageError("'matrices' must be an array of square matrices");
    if (mats.empty()) throw UsageError("system must contain q ≥ 1 matrices");
    std::vector<Eigen::MatrixXd> out;
    out.reserve(mats.size());
    for (const json& m : mats) {
        if (!m.is_array() || m.empty() || !m.front().is_array())
            throw UsageError("each matrix must be a non-empty array of rows");
        const long rows = static_cast<long>(m.size());
        const long cols = static_cast<long>(m.front().size());
        Eigen::MatrixXd mat(rows, cols);
        for (long i = 0; i < rows; ++i) {
            const json& row = m[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<long>(row.size()) != cols)
                throw UsageError("matrix rows must be equal-length arrays of numbers");
            for (long j = 0; j < cols; ++j) {
                const json& entry = row[static_cast<std::size_t>(j)];
                if (!entry.is_number()) throw UsageError("matrix entries must be numbers");
                mat(i, j) = entry.get<double>();
            }
        }
        out.push_back(std::move(mat));
    }
    return gnt::OperatorSystem(std::move(out));
}

// ---------------------------------------------------------------------------
// config file layering: flags > config file > defaults
// ---------------------------------------------------------------------------

/// One config-file key and how to pour its JSON value into the bound flag
/// variable.  The value is applied only when the flag itself was not given.
struct ConfigBinding {
    std::string key;
    CLI::Option* opt = nullptr;
    std::function<void(const json&)> apply;
};

/// Per-subcommand plumbing shared by every command: the optional config file,
/// the bindings it may set, and the seed bookkeeping for the env fallback.
struct SubcommandIO {
    CLI::App* cmd = nullptr;
    std::string config_path;
    CLI::Option* seed_opt = nullptr;
    std::vector<ConfigBinding> bindings;
    bool seed_from_config = false;
};

/// Which config keys each subcommand accepts (filled while options are
/// wired).  Used to reject typos instead of silently ignoring them.
std::map<std::string, std::set<std::string>>& config_registry() {
    static std::map<std::string, std::set<std::string>> registry;
    return registry;
}

void bind_config(SubcommandIO& io, std::string key, CLI::Option* opt,
                 std::function<void(const json&)> apply) {
    config_registry()[io.cmd->get_name()].insert(key);
    io.bindings.push_back({std::move(key), opt, std::move(apply)});
}

std::function<void(const json&)> config_int(std::string key, int& slot) {
    return [key = std::move(key), &slot](const json& v) {
        if (!v.is_number_integer())
            throw UsageError("config: '" + key + "' must be an integer");
        slot = v.get<int>();
    };
}

std::function<void(const json&)> config_long(std::string key, long& slot) {
    return [key = std::move(key), &slot](const json& v) {
        if (!v.is_number_integer())
            throw UsageError("config: '" + key + "' must be an integer");
        slot = v.get<long>();
    };
}

std::function<void(const json&)> config_double(std::string key, double& slot) {
    return [key = std::move(key), &slot](const json& v) {
        if (!v.is_number())
            throw UsageError("config: '" + key + "' must be a number");
        slot = v.get<double>();
    };
}

std::function<void(const json&)> config_string(std::string key, std::string& slot) {
    return [key = std::move(key), &slot](const json& v) {
        if (!v.is_string())
            throw UsageError("config: '" + key + "' must be a string");
        slot = v.get<std::string>();
    };
}

std::function<void(const json&)> config_bool(std::string key, bool& slot) {
    return [key = std::move(key), &slot](const json& v) {
        if (!v.is_boolean())
            throw UsageError("config: '" + key + "' must be a boolean");
        slot = v.get<bool>();
    };
}

std::function<void(const json&)> config_seed(std::string key, std::uint64_t& slot) {
    return [key = std::move(key), &slot](const json& v) {
        const bool ok =
            v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
        if (!ok) throw UsageError("config: '" + key + "' must be a non-negative integer");
        slot = v.get<std::uint64_t>();
    };
}

/// Load the config file (if any) and fill every binding whose flag the user
/// did not pass.  Keys may sit at the top level or inside a section named
/// after a subcommand; the section wins over the top level.  Unknown keys are
/// rejected so a typo cannot silently fall back to a default.
void apply_config(SubcommandIO& io) {
    if (io.config_path.empty()) return;
    const json cfg = load_json_file(io.config_path);
    if (!cfg.is_object()) throw UsageError("config: top level must be a JSON object");

    const auto& registry = config_registry();
    std::set<std::string> known_anywhere;
    for (const auto& [cmd, keys] : registry) known_anywhere.insert(keys.begin(), keys.end());

    for (const auto& [key, value] : cfg.items()) {
        if (value.is_object()) {
            const auto section = registry.find(key);
            if (section == registry.end())
                throw UsageError("config: unknown section '" + key + "'");
            for (const auto& [inner, ignored] : value.items()) {
                (void)ignored;
                if (!section->second.count(inner))
                    throw UsageError("config: unknown key '" + inner + "' in section '" +
                                     key + "'");
            }
        } else if (!known_anywhere.count(key)) {
            throw UsageError("config: unknown key '" + key + "'");
        }
    }

    const std::string cmd_name = io.cmd->get_name();
    const json* section =
        cfg.contains(cmd_name) && cfg.at(cmd_name).is_object() ? &cfg.at(cmd_name) : nullptr;
    for (const ConfigBinding& binding : io.bindings) {
        if (binding.opt != nullptr && binding.opt->count() > 0) continue;
        const json* value = nullptr;
        if (section != nullptr && section->contains(binding.key))
            value = &section->at(binding.key);
        else if (cfg.contains(binding.key) && !cfg.at(binding.key).is_object())
            value = &cfg.at(binding.key);
        if (value == nullptr) continue;
        binding.apply(*value);
        if (binding.key == "seed") io.seed_from_config = true;
    }
}

/// GNT_SEED is the weakest seed source: used only when neither --seed nor a
/// config file set one.  The resolved value is echoed in every report.
void resolve_env_seed(const SubcommandIO& io, std::uint64_t& seed) {
    if (io.seed_opt != nullptr && io.seed_opt->count() > 0) return;
    if (io.seed_from_config) return;
    const char* env = std::getenv("GNT_SEED");
    if (env == nullptr) return;
    errno = 0;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0' || env[0] == '-')
        throw UsageError("GNT_SEED must be a non-negative integer (got '" +
                         std::string(env) + "')");
    seed = static_cast<std::uint64_t>(value);
}

// ---------------------------------------------------------------------------
// shared option blocks
// ---------------------------------------------------------------------------

/// Options every subcommand carries.
struct CommonValues {
    std::string out_path;
    std::uint64_t seed = 0;
    int threads = 1;
};

void add_common_options(CLI::App* cmd, CommonValues& common, SubcommandIO& io) {
    io.cmd = cmd;
    cmd->add_option("--config", io.config_path,
                    "JSON file with default values for the flags below (flags win)");
    io.seed_opt = cmd->add_option("--seed", common.seed,
                                  "random seed; GNT_SEED env is the fallback")
                      ->capture_default_str();
    CLI::Option* threads =
        cmd->add_option("--threads", common.threads,
                        "worker cap; results never depend on it")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    cmd->add_option("--out", common.out_path, "write the JSON report here instead of stdout");
    bind_config(io, "seed", io.seed_opt, config_seed("seed", common.seed));
    bind_config(io, "threads", threads, config_int("threads", common.threads));
}

/// Build fiber-average options from the shared flags.  An empty scheme means
/// "auto": the exact scheme where one exists (q <= 2), Monte Carlo otherwise.
gnt::FiberOptions make_fiber(const std::string& group_text, const std::string& scheme_text,
                             long samples, std::uint64_t seed, int q) {
    gnt::FiberOptions fiber;
    fiber.group = parse_group(group_text);
    fiber.scheme = scheme_text.empty()
                       ? (q <= 2 ? gnt::FiberScheme::exact : gnt::FiberScheme::monte_carlo)
                       : parse_scheme(scheme_text);
    if (samples < 2) throw UsageError("--samples must be at least 2");
    fiber.samples = samples;
    fiber.seed = seed;
    return fiber;
}

json ambient_json(const gnt::AmbientSpec& ambient) {
    json out;
    out["kind"] = ambient.kind == gnt::AmbientSpec::Kind::sphere ? "sphere" : "euclidean";
    out["coord_dim"] = ambient.coord_dim;
    if (ambient.kind == gnt::AmbientSpec::Kind::sphere) out["radius"] = ambient.radius;
    out["curvature"] = ambient.curvature();
    return out;
}

// ---------------------------------------------------------------------------
// variation field profiles
// ---------------------------------------------------------------------------

std::map<std::string, double> parse_profile_params(const std::string& text) {
    std::map<std::string, double> params;
    if (text.empty()) return params;
    for (const std::string& item : split(text, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw UsageError("field: malformed parameter '" + item + "' (expected key=value)");
        params[item.substr(0, eq)] =
            parse_double_token(item.substr(eq + 1), "field parameter '" + item + "'");
    }
    return params;
}

double take_profile(std::map<std::string, double>& params, const std::string& key,
                    double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    const double value = it->second;
    params.erase(it);
    return value;
}

int take_profile_int(std::map<std::string, double>& params, const std::string& key,
                     int fallback) {
    const double value = take_profile(params, key, static_cast<double>(fallback));
    const int rounded = static_cast<int>(std::lround(value));
    if (std::abs(value - rounded) > 1e-12)
        throw UsageError("field: parameter '" + key + "' must be an integer");
    return rounded;
}

void reject_profile_leftovers(const std::map<std::string, double>& params,
                              const std::string& name) {
    if (!params.empty())
        throw UsageError("field: unknown parameter '" + params.begin()->first +
                         "' for profile '" + name + "'");
}

using ScalarProfile = std::function<gnt::Jet(const std::vector<gnt::Jet>&)>;

/// One builtin scalar profile "name" or "name:key=value,...".  Builtins:
///   zero                              f = 0
///   const[:amp=A]                     f = A                  (default A = 1)
///   cos[:axis=i,freq=w,amp=A,offset=B] f = B + A cos(w x_i)
///   sin[:axis=i,freq=w,amp=A,offset=B] f = B + A sin(w x_i)
/// The boundary cutoff on non-periodic axes is applied separately by the
/// variation machinery, so profiles only shape the interior.
ScalarProfile build_profile(const std::string& spec, int dim) {
    const std::size_t colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    auto params = parse_profile_params(
        colon == std::string::npos ? std::string() : spec.substr(colon + 1));

    if (name == "zero") {
        reject_profile_leftovers(params, name);
        return [](const std::vector<gnt::Jet>& x) { return gnt::Jet(0.0, x.front().dim()); };
    }
    if (name == "const") {
        const double amp = take_profile(params, "amp", 1.0);
        reject_profile_leftovers(params, name);
        return [amp](const std::vector<gnt::Jet>& x) {
            return gnt::Jet(amp, x.front().dim());
        };
    }
    if (name == "cos" || name == "sin") {
        const int axis = take_profile_int(params, "axis", 0);
        const double freq = take_profile(params, "freq", 1.0);
        const double amp = take_profile(params, "amp", 1.0);
        const double offset = take_profile(params, "offset", 0.0);
        reject_profile_leftovers(params, name);
        if (axis < 0 || axis >= dim)
            throw UsageError("field: axis " + std::to_string(axis) +
                             " out of range for a " + std::to_string(dim) + "-dimensional chart");
        const bool use_cos = name == "cos";
        return [axis, freq, amp, offset, use_cos](const std::vector<gnt::Jet>& x) {
            const gnt::Jet arg = freq * x[static_cast<std::size_t>(axis)];
            return offset + amp * (use_cos ? cos(arg) : sin(arg));
        };
    }
    throw UsageError("field: unknown profile '" + name +
                     "' (builtins: zero, const, cos, sin)");
}

/// ';'-separated profiles, one per normal direction.  A single profile with
/// codimension > 1 varies the first normal direction only.
std::vector<ScalarProfile> build_components(const std::string& text, int dim, int codim) {
    std::vector<std::string> specs = split(text, ';');
    if (specs.empty()) throw UsageError("--field must name at least one profile");
    if (specs.size() == 1 && codim > 1)
        specs.resize(static_cast<std::size_t>(codim), "zero");
    if (static_cast<int>(specs.size()) != codim)
        throw UsageError("--field needs one ';'-separated profile per normal direction (got " +
                         std::to_string(specs.size()) + ", patch has " +
                         std::to_string(codim) + ")");
    std::vector<ScalarProfile> components;
    components.reserve(specs.size());
    for (const std::string& spec : specs) components.push_back(build_profile(spec, dim));
    return components;
}

// ---------------------------------------------------------------------------
// sigma
// ---------------------------------------------------------------------------

struct SigmaOptions {
    CommonValues common;
    SubcommandIO io;
    std::string input;
    int max_degree = -1;  ///< -1 = up to n
    double tolerance = 1e-10;
    bool oracle = false;
};

int run_sigma(const SigmaOptions& o) {
    const gnt::OperatorSystem sys = parse_system(load_json_file(o.input));
    const int max_degree = o.max_degree < 0 ? sys.n : o.max_degree;
    const gnt::NewtonTable table = gnt::newton_table(sys, max_degree);

    json sigma = json::object();
    for (const gnt::MultiIndex& u : table.indices) sigma[index_key(u)] = table.sigma_at(u);

    const double trace_residual = gnt::trace_identity_residual(table);
    const double recursion_residual = gnt::right_recursion_residual(sys, table);
    bool passed = trace_residual <= o.tolerance && recursion_residual <= o.tolerance;

    json report;
    report["command"] = "sigma";
    report["seed"] = o.common.seed;
    report["threads"] = o.common.threads;
    report["input"] = o.input;
    report["n"] = sys.n;
    report["q"] = sys.q;
    report["max_degree"] = max_degree;
    report["tolerance"] = o.tolerance;
    report["sigma"] = sigma;
    report["identities"] = {{"trace", trace_residual}, {"recursion", recursion_residual}};

    if (o.oracle) {
        const std::map<gnt::MultiIndex, double> reference = gnt::sigma_oracle(sys, max_degree);
        double max_abs_err = 0.0;
        double max_rel_err = 0.0;
        for (const auto& [u, expected] : reference) {
            const double err = std::abs(table.sigma_at(u) - expected);
            max_abs_err = std::max(max_abs_err, err);
            max_rel_err = std::max(max_rel_err, err / std::max(std::abs(expected), 1e-12));
        }
        report["oracle"] = {{"max_abs_err", max_abs_err}, {"max_rel_err", max_rel_err}};
        passed = passed && max_rel_err <= o.tolerance;
    }

    report["passed"] = passed;
    write_report(report, o.common.out_path);
    return passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// average
// ---------------------------------------------------------------------------

struct AverageOptions {
    CommonValues common;
    SubcommandIO io;
    std::string input;
    std::string u_text;
    int max_degree = -1;  ///< -1 = up to n (table mode)
    std::string group_text = "O";
    std::string scheme_text;  ///< empty = auto
    long samples = 4096;
};

int run_average(const AverageOptions& o) {
    const gnt::OperatorSystem sys = parse_system(load_json_file(o.input));
    if (!o.u_text.empty() && o.max_degree >= 0)
        throw UsageError("pass either --u or --max-degree, not both");
    const gnt::FiberOptions fiber =
        make_fiber(o.group_text, o.scheme_text, o.samples, o.common.seed, sys.q);

    json table = json::object();
    long samples_used = 0;
    gnt::FiberScheme scheme_used = fiber.scheme;

    json report;
    report["command"] = "average";
    report["seed"] = o.common.seed;
    report["threads"] = o.common.threads;
    report["input"] = o.input;
    report["n"] = sys.n;
    report["q"] = sys.q;
    report["group"] = gnt::to_string(fiber.group);

    if (!o.u_text.empty()) {
        const gnt::MultiIndex u = parse_multi_index(o.u_text, sys.q, "--u");
        const gnt::ScalarAverage avg = gnt::sigma_hat(sys, u, fiber);
        table[index_key(u)] = {{"value", avg.value}, {"std_error", avg.std_error}};
        samples_used = avg.samples;
        scheme_used = avg.scheme;
        report["u"] = index_key(u);
    } else {
        const int max_degree = o.max_degree < 0 ? sys.n : o.max_degree;
        for (const auto& [u, avg] : gnt::sigma_hat_table(sys, max_degree, fiber)) {
            table[index_key(u)] = {{"value", avg.value}, {"std_error", avg.std_error}};
            samples_used = avg.samples;
            scheme_used = avg.scheme;
        }
        report["max_degree"] = max_degree;
    }

    report["scheme"] = gnt::to_string(scheme_used);
    report["samples"] = samples_used;
    report["sigma_hat"] = table;
    write_report(report, o.common.out_path);
    return 0;
}

// ---------------------------------------------------------------------------
// minimality
// ---------------------------------------------------------------------------

struct MinimalityOptions {
    CommonValues common;
    SubcommandIO io;
    std::string patch_spec;
    std::string u_text;
    int resolution = 16;
    std::string group_text = "O";
    std::string scheme_text;  ///< empty = auto
    long samples = 4096;
    double tolerance = -1.0;  ///< <0 = backend default (1e-6 analytic, 1e-4 fd)
    std::string backend_text = "analytic";
    bool emit_points = false;
};

int run_minimality(const MinimalityOptions& o) {
    const gnt::ImmersedPatch patch = gnt::make_gallery_patch(o.patch_spec);
    const gnt::MultiIndex u = parse_multi_index(o.u_text, patch.codim(), "--u");
    const gnt::DerivativeBackend backend = parse_backend(o.backend_text);
    const double tolerance =
        o.tolerance >= 0.0
            ? o.tolerance
            : (backend == gnt::DerivativeBackend::analytic ? 1e-6 : 1e-4);
    const gnt::FiberOptions fiber =
        make_fiber(o.group_text, o.scheme_text, o.samples, o.common.seed, patch.codim());

    const gnt::MinimalityReport result =
        gnt::minimality_residual(patch, u, o.resolution, fiber, tolerance, backend);

    json report;
    report["command"] = "minimality";
    report["seed"] = o.common.seed;
    report["threads"] = o.common.threads;
    report["patch"] = o.patch_spec;
    report["dim"] = patch.dim();
    report["codim"] = patch.codim();
    report["ambient"] = ambient_json(patch.ambient);
    report["u"] = index_key(u);
    report["curvature"] = result.curvature;
    report["group"] = gnt::to_string(result.group);
    report["scheme"] = gnt::to_string(result.scheme);
    report["samples"] = result.samples;
    report["resolution"] = o.resolution;
    report["backend"] = backend_label(backend);
    report["tolerance"] = tolerance;
    report["sup_residual"] = result.sup_residual;
    report["l2_residual"] = result.l2_residual;
    report["max_std_error"] = result.max_std_error;
    report["passed"] = result.passed;

    if (o.emit_points) {
        json points = json::array();
        for (const gnt::PointResidual& p : result.points) {
            json row;
            row["chart_point"] = json_vec(p.chart_point);
            row["H"] = json_vec(p.H);
            row["S"] = json_vec(p.S);
            row["residual"] = json_vec(p.residual);
            row["std_error"] = json_vec(p.std_error);
            row["residual_norm"] = p.residual_norm;
            row["std_error_norm"] = p.std_error_norm;
            points.push_back(std::move(row));
        }
        report["points"] = std::move(points);
    }

    write_report(report, o.common.out_path);
    return result.passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// variation
// ---------------------------------------------------------------------------

struct VariationOptions {
    CommonValues common;
    SubcommandIO io;
    std::string patch_spec;
    std::string u_text;
    std::string field_text = "const";
    std::string steps_text = "1e-2,5e-3,2.5e-3";
    int resolution = 16;
    std::string group_text = "O";
    std::string scheme_text;  ///< empty = auto
    long samples = 4096;
    double rel_tolerance = 1e-3;
    double abs_tolerance = 1e-6;
    double order_min = 1.8;
    std::string backend_text = "analytic";
};

int run_variation(const VariationOptions& o) {
    gnt::VariationSpec spec;
    spec.patch = gnt::make_gallery_patch(o.patch_spec);
    if (!spec.patch.normal_frame)
        throw UsageError("patch '" + o.patch_spec +
                         "' carries no built-in normal frame; variation needs one");
    const gnt::MultiIndex u = parse_multi_index(o.u_text, spec.patch.codim(), "--u");
    spec.components = build_components(o.field_text, spec.patch.dim(), spec.patch.codim());
    spec.steps = parse_steps(o.steps_text);
    const gnt::DerivativeBackend backend = parse_backend(o.backend_text);
    const gnt::FiberOptions fiber =
        make_fiber(o.group_text, o.scheme_text, o.samples, o.common.seed, spec.patch.codim());

    const gnt::FirstVariationReport result =
        gnt::first_variation_check(spec, u, o.resolution, fiber, backend);

    // Verdict: against a genuinely zero derivative only the absolute bound is
    // meaningful; otherwise the smallest step must agree relatively.  The
    // convergence-order gate applies only when the FD errors rise above the
    // round-off floor -- a functional that is exactly linear in the variation
    // parameter is differenced to machine precision at every step, and an
    // order fitted to that noise says nothing.
    const gnt::FirstVariationStep& last = result.steps.back();
    const bool zero_branch = std::abs(result.rhs) <= o.abs_tolerance;
    double max_error = 0.0;
    for (const gnt::FirstVariationStep& s : result.steps)
        max_error = std::max(max_error, s.error);
    const double scale =
        std::max({1.0, std::abs(result.rhs), std::abs(result.functional_at_zero)});
    const bool order_checked = max_error > 1e-10 * scale;
    const bool passed =
        zero_branch
            ? std::abs(last.fd) <= o.abs_tolerance
            : (last.error <= std::max(o.rel_tolerance * std::abs(result.rhs),
                                      3.0 * result.rhs_std_error) &&
               (!order_checked || result.fitted_order >= o.order_min));

    json report;
    report["command"] = "variation";
    report["seed"] = o.common.seed;
    report["threads"] = o.common.threads;
    report["patch"] = o.patch_spec;
    report["u"] = index_key(u);
    report["field"] = o.field_text;
    report["group"] = gnt::to_string(fiber.group);
    report["scheme"] = gnt::to_string(fiber.scheme);
    report["samples"] = o.samples;
    report["resolution"] = o.resolution;
    report["backend"] = backend_label(backend);
    report["rel_tolerance"] = o.rel_tolerance;
    report["abs_tolerance"] = o.abs_tolerance;
    report["order_min"] = o.order_min;
    report["functional_at_zero"] = result.functional_at_zero;
    report["rhs"] = result.rhs;
    report["rhs_std_error"] = result.rhs_std_error;
    json steps = json::array();
    for (const gnt::FirstVariationStep& s : result.steps)
        steps.push_back({{"step", s.step}, {"fd", s.fd}, {"error", s.error}});
    report["steps"] = std::move(steps);
    report["fitted_order"] = result.fitted_order;
    report["order_checked"] = order_checked;
    report["zero_branch"] = zero_branch;
    report["passed"] = passed;

    write_report(report, o.common.out_path);
    return passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// gallery
// ---------------------------------------------------------------------------

struct GalleryOptions {
    CommonValues common;
    SubcommandIO io;
    std::string action;
    std::string target;
    int all_u_upto = -1;  ///< -1 = no residual scan
    int resolution = 0;   ///< 0 = pick by patch dimension
    std::string group_text = "O";
    std::string scheme_text;  ///< empty = auto
    long samples = 4096;
    double tolerance = 1e-6;
};

int default_scan_resolution(int dim) {
    if (dim <= 1) return 32;
    if (dim == 2) return 8;
    if (dim == 3) return 4;
    return 3;
}

json entry_summary(const gnt::GalleryEntry& entry) {
    json out;
    out["name"] = entry.name;
    out["params"] = json(entry.params);
    out["dim"] = entry.patch.dim();
    out["codim"] = entry.patch.codim();
    out["ambient"] = ambient_json(entry.patch.ambient);
    out["has_normal_frame"] = static_cast<bool>(entry.patch.normal_frame);
    json facts = json::array();
    for (const gnt::ExpectedFact& fact : entry.facts)
        facts.push_back({{"name", fact.name}, {"operation", fact.operation}});
    out["facts"] = std::move(facts);
    return out;
}

int run_gallery(const GalleryOptions& o) {
    if (o.action == "list") {
        json patches = json::array();
        for (const std::string& name : gnt::gallery_names())
            patches.push_back(entry_summary(gnt::make_gallery_entry(name)));
        json report;
        report["command"] = "gallery";
        report["action"] = "list";
        report["seed"] = o.common.seed;
        report["threads"] = o.common.threads;
        report["patches"] = std::move(patches);
        write_report(report, o.common.out_path);
        return 0;
    }

    if (o.action != "check")
        throw UsageError("unknown gallery action '" + o.action + "' (choose list or check)");
    if (o.target.empty())
        throw UsageError("gallery check needs a patch spec, e.g. 'gnt gallery check veronese'");

    const gnt::GalleryEntry entry = gnt::make_gallery_entry(o.target);
    json facts = json::array();
    bool all_passed = true;
    for (const gnt::ExpectedFact& fact : entry.facts) {
        const gnt::FactResult result = fact.run();
        all_passed = all_passed && result.passed;
        facts.push_back({{"name", fact.name},
                         {"operation", fact.operation},
                         {"passed", result.passed},
                         {"measured", result.measured},
                         {"threshold", result.threshold},
                         {"detail", result.detail}});
    }

    json report;
    report["command"] = "gallery";
    report["action"] = "check";
    report["patch"] = o.target;
    report["name"] = entry.name;
    report["params"] = json(entry.params);
    report["seed"] = o.common.seed;
    report["threads"] = o.common.threads;
    report["facts"] = std::move(facts);
    report["passed"] = all_passed;

    // Optional residual scan over every multi-index up to the requested
    // degree.  Informational only: most patches are not u-minimal for most u,
    // so the scan never feeds the exit code.
    if (o.all_u_upto >= 0) {
        const gnt::ImmersedPatch& patch = entry.patch;
        const int q = patch.codim();
        const int max_degree = std::min(o.all_u_upto, patch.dim());
        const int resolution =
            o.resolution > 0 ? o.resolution : default_scan_resolution(patch.dim());
        const gnt::FiberOptions fiber =
            make_fiber(o.group_text, o.scheme_text, o.samples, o.common.seed, q);

        json residuals = json::object();
        long scan_samples = 0;
        gnt::FiberScheme scan_scheme = fiber.scheme;
        for (const gnt::MultiIndex& u : gnt::enumerate_multi_indices(q, max_degree)) {
            const gnt::MinimalityReport rep =
                gnt::minimality_residual(patch, u, resolution, fiber, o.tolerance);
            residuals[index_key(u)] = {{"sup_residual", rep.sup_residual},
                                       {"l2_residual", rep.l2_residual},
                                       {"max_std_error", rep.max_std_error},
                                       {"within_tolerance", rep.passed}};
            scan_samples = rep.samples;
            scan_scheme = rep.scheme;
        }
        json scan;
        scan["max_degree"] = max_degree;
        if (max_degree != o.all_u_upto) scan["capped_at_dimension"] = true;
        scan["resolution"] = resolution;
        scan["group"] = gnt::to_string(fiber.group);
        scan["scheme"] = gnt::to_string(scan_scheme);
        scan["samples"] = scan_samples;
        scan["tolerance"] = o.tolerance;
        scan["residuals"] = std::move(residuals);
        report["minimality_scan"] = std::move(scan);
    }

    write_report(report, o.common.out_path);
    return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "generalized Newton transformations of shape-operator systems:\n"
        "sigma tables, fiber averages, minimality residuals, first-variation\n"
        "checks, and a gallery of closed-form example patches"};
    app.set_version_flag("--version", "gnt 1.0");
    app.require_subcommand(1);

    SigmaOptions sig;
    AverageOptions avg;
    MinimalityOptions mini;
    VariationOptions var;
    GalleryOptions gal;

    // sigma ------------------------------------------------------------
    CLI::App* sigma_cmd = app.add_subcommand(
        "sigma", "sigma table and internal identities of a matrix system");
    sigma_cmd->add_option("--input", sig.input, "JSON file with a 'matrices' array")
        ->required();
    CLI::Option* sig_deg =
        sigma_cmd->add_option("--max-degree", sig.max_degree,
                              "tabulate |u| up to this degree (default: matrix size n)");
    CLI::Option* sig_tol = sigma_cmd
                               ->add_option("--tolerance", sig.tolerance,
                                            "bound on identity residuals and the oracle "
                                            "relative error")
                               ->capture_default_str();
    CLI::Option* sig_oracle = sigma_cmd->add_flag(
        "--oracle", sig.oracle, "cross-check against the determinant-expansion oracle");
    add_common_options(sigma_cmd, sig.common, sig.io);
    bind_config(sig.io, "max-degree", sig_deg, config_int("max-degree", sig.max_degree));
    bind_config(sig.io, "tolerance", sig_tol, config_double("tolerance", sig.tolerance));
    bind_config(sig.io, "oracle", sig_oracle, config_bool("oracle", sig.oracle));

    // average ----------------------------------------------------------
    CLI::App* average_cmd = app.add_subcommand(
        "average", "frame-averaged sigma_hat of a matrix system over the normal fiber");
    average_cmd->add_option("--input", avg.input, "JSON file with a 'matrices' array")
        ->required();
    average_cmd->add_option("--u", avg.u_text,
                            "single multi-index, comma-separated (default: full table)");
    CLI::Option* avg_deg = average_cmd->add_option(
        "--max-degree", avg.max_degree, "table mode: average all |u| up to this degree");
    CLI::Option* avg_group =
        average_cmd->add_option("--group", avg.group_text, "frame group: O or SO")
            ->capture_default_str();
    CLI::Option* avg_scheme = average_cmd->add_option(
        "--scheme", avg.scheme_text, "mc or exact (default: exact when q <= 2, else mc)");
    CLI::Option* avg_samples =
        average_cmd->add_option("--samples", avg.samples, "Monte Carlo draws")
            ->capture_default_str();
    add_common_options(average_cmd, avg.common, avg.io);
    bind_config(avg.io, "max-degree", avg_deg, config_int("max-degree", avg.max_degree));
    bind_config(avg.io, "group", avg_group, config_string("group", avg.group_text));
    bind_config(avg.io, "scheme", avg_scheme, config_string("scheme", avg.scheme_text));
    bind_config(avg.io, "samples", avg_samples, config_long("samples", avg.samples));

    // minimality ---------------------------------------------------------
    CLI::App* minimality_cmd = app.add_subcommand(
        "minimality", "criticality residual of a gallery patch over a quadrature mesh");
    minimality_cmd
        ->add_option("--patch", mini.patch_spec,
                     "gallery patch spec, e.g. umbilical:n=2,q=2,r=1")
        ->required();
    minimality_cmd
        ->add_option("--u", mini.u_text,
                     "multi-index, comma-separated, one entry per normal direction")
        ->required();
    CLI::Option* mini_res =
        minimality_cmd->add_option("--resolution", mini.resolution, "quadrature nodes per chart axis")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    CLI::Option* mini_group =
        minimality_cmd->add_option("--group", mini.group_text, "frame group: O or SO")
            ->capture_default_str();
    CLI::Option* mini_scheme = minimality_cmd->add_option(
        "--scheme", mini.scheme_text, "mc or exact (default: exact when q <= 2, else mc)");
    CLI::Option* mini_samples =
        minimality_cmd->add_option("--samples", mini.samples, "Monte Carlo draws per mesh node")
            ->capture_default_str();
    CLI::Option* mini_tol = minimality_cmd->add_option(
        "--tolerance", mini.tolerance,
        "pass bound on the sup residual (default: 1e-6 analytic, 1e-4 fd)");
    CLI::Option* mini_backend =
        minimality_cmd->add_option("--backend", mini.backend_text, "derivatives: analytic or fd")
            ->capture_default_str();
    minimality_cmd->add_flag("--emit-points", mini.emit_points,
                             "include the per-node residual table in the report");
    add_common_options(minimality_cmd, mini.common, mini.io);
    bind_config(mini.io, "resolution", mini_res, config_int("resolution", mini.resolution));
    bind_config(mini.io, "group", mini_group, config_string("group", mini.group_text));
    bind_config(mini.io, "scheme", mini_scheme, config_string("scheme", mini.scheme_text));
    bind_config(mini.io, "samples", mini_samples, config_long("samples", mini.samples));
    bind_config(mini.io, "tolerance", mini_tol, config_double("tolerance", mini.tolerance));
    bind_config(mini.io, "backend", mini_backend, config_string("backend", mini.backend_text));

    // variation ----------------------------------------------------------
    CLI::App* variation_cmd = app.add_subcommand(
        "variation", "finite-difference check of the first-variation identity");
    variation_cmd
        ->add_option("--patch", var.patch_spec,
                     "gallery patch spec (must carry a built-in normal frame)")
        ->required();
    variation_cmd
        ->add_option("--u", var.u_text,
                     "multi-index, comma-separated, one entry per normal direction")
        ->required();
    CLI::Option* var_field = variation_cmd
                                 ->add_option("--field", var.field_text,
                                              "';'-separated normal-component profiles: zero, "
                                              "const[:amp=], cos/sin[:axis=,freq=,amp=,offset=]")
                                 ->capture_default_str();
    CLI::Option* var_steps =
        variation_cmd->add_option("--steps", var.steps_text, "comma-separated FD step sizes")
            ->capture_default_str();
    CLI::Option* var_res =
        variation_cmd->add_option("--resolution", var.resolution, "quadrature nodes per chart axis")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    CLI::Option* var_group =
        variation_cmd->add_option("--group", var.group_text, "frame group: O or SO")
            ->capture_default_str();
    CLI::Option* var_scheme = variation_cmd->add_option(
        "--scheme", var.scheme_text, "mc or exact (default: exact when q <= 2, else mc)");
    CLI::Option* var_samples =
        variation_cmd->add_option("--samples", var.samples, "Monte Carlo draws per fiber average")
            ->capture_default_str();
    CLI::Option* var_tol =
        variation_cmd->add_option("--tolerance", var.rel_tolerance,
                                  "relative agreement bound at the smallest step")
            ->capture_default_str();
    CLI::Option* var_abs =
        variation_cmd->add_option("--abs-tolerance", var.abs_tolerance,
                                  "absolute bound used when the derivative is genuinely zero")
            ->capture_default_str();
    CLI::Option* var_order =
        variation_cmd->add_option("--order-min", var.order_min, "minimum fitted convergence order")
            ->capture_default_str();
    CLI::Option* var_backend =
        variation_cmd->add_option("--backend", var.backend_text, "derivatives: analytic or fd")
            ->capture_default_str();
    add_common_options(variation_cmd, var.common, var.io);
    bind_config(var.io, "field", var_field, config_string("field", var.field_text));
    bind_config(var.io, "steps", var_steps, config_string("steps", var.steps_text));
    bind_config(var.io, "resolution", var_res, config_int("resolution", var.resolution));
    bind_config(var.io, "group", var_group, config_string("group", var.group_text));
    bind_config(var.io, "scheme", var_scheme, config_string("scheme", var.scheme_text));
    bind_config(var.io, "samples", var_samples, config_long("samples", var.samples));
    bind_config(var.io, "tolerance", var_tol, config_double("tolerance", var.rel_tolerance));
    bind_config(var.io, "abs-tolerance", var_abs,
                config_double("abs-tolerance", var.abs_tolerance));
    bind_config(var.io, "order-min", var_order, config_double("order-min", var.order_min));
    bind_config(var.io, "backend", var_backend, config_string("backend", var.backend_text));

    // gallery ------------------------------------------------------------
    CLI::App* gallery_cmd =
        app.add_subcommand("gallery", "list example patches or run one entry's expected facts");
    gallery_cmd->add_option("action", gal.action, "list | check")->required();
    gallery_cmd->add_option("target", gal.target, "patch spec for check, e.g. veronese");
    gallery_cmd->add_option("--all-u-upto", gal.all_u_upto,
                            "also scan minimality residuals for every |u| up to this degree")
        ->check(CLI::NonNegativeNumber);
    CLI::Option* gal_res =
        gallery_cmd->add_option("--resolution", gal.resolution,
                                "scan quadrature nodes per axis (default: by patch dimension)")
            ->check(CLI::PositiveNumber);
    CLI::Option* gal_group =
        gallery_cmd->add_option("--group", gal.group_text, "scan frame group: O or SO")
            ->capture_default_str();
    CLI::Option* gal_scheme = gallery_cmd->add_option(
        "--scheme", gal.scheme_text, "mc or exact (default: exact when q <= 2, else mc)");
    CLI::Option* gal_samples =
        gallery_cmd->add_option("--samples", gal.samples, "scan Monte Carlo draws")
            ->capture_default_str();
    CLI::Option* gal_tol =
        gallery_cmd->add_option("--tolerance", gal.tolerance, "scan residual tolerance")
            ->capture_default_str();
    add_common_options(gallery_cmd, gal.common, gal.io);
    bind_config(gal.io, "resolution", gal_res, config_int("resolution", gal.resolution));
    bind_config(gal.io, "group", gal_group, config_string("group", gal.group_text));
    bind_config(gal.io, "scheme", gal_scheme, config_string("scheme", gal.scheme_text));
    bind_config(gal.io, "samples", gal_samples, config_long("samples", gal.samples));
    bind_config(gal.io, "tolerance", gal_tol, config_double("tolerance", gal.tolerance));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);                                     // prints the diagnostic
        return 2;
    }

    try {
        if (*sigma_cmd) {
            apply_config(sig.io);
            resolve_env_seed(sig.io, sig.common.seed);
            return run_sigma(sig);
        }
        if (*average_cmd) {
            apply_config(avg.io);
            resolve_env_seed(avg.io, avg.common.seed);
            return run_average(avg);
        }
        if (*minimality_cmd) {
            apply_config(mini.io);
            resolve_env_seed(mini.io, mini.common.seed);
            return run_minimality(mini);
        }
        if (*variation_cmd) {
            apply_config(var.io);
            resolve_env_seed(var.io, var.common.seed);
            return run_variation(var);
        }
        if (*gallery_cmd) {
            apply_config(gal.io);
            resolve_env_seed(gal.io, gal.common.seed);
            return run_gallery(gal);
        }
    } catch (const std::exception& e) {
        std::cerr << "gnt: " << e.what() << "\n";
        return 2;
    }
    return 2;  // unreachable: require_subcommand(1) guarantees one branch
}
