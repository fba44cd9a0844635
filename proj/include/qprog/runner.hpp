// runner.hpp
// Command-line orchestration: typed key/value configuration, experiment
// dispatch, and the results.csv / summary.json artifacts.
//
// Exit codes: 0 success, 1 could not compute (bad config, I/O), 2 computed
// but a check reported pass = false.

#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dispersion.hpp"
#include "lemma_lab.hpp"
#include "progression_scan.hpp"
#include "sieve_cache.hpp"
#include "singular_series.hpp"

namespace qprog {

// -------------------------------------------------------
// Configuration
// -------------------------------------------------------

enum class Command { scan, moment1, moment2, dispersion, lemmas, singular, constant, cache };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ValueKind { integer, real, text, flag };
using Value = std::variant<u64, double, std::string, bool>;

struct KeySpec {
    std::string name;
    ValueKind kind;
    bool required = false;
    std::optional<Value> fallback;
};

struct RunConfig {
    Command command = Command::scan;
    std::map<std::string, Value> parameters;
    std::filesystem::path output_dir = ".";
    std::filesystem::path cache_dir;
    unsigned threads = 1;

    bool has(const std::string& key) const { return parameters.count(key) > 0; }
    u64 integer(const std::string& key) const { return std::get<u64>(parameters.at(key)); }
    double real(const std::string& key) const { return std::get<double>(parameters.at(key)); }
    const std::string& text(const std::string& key) const { return std::get<std::string>(parameters.at(key)); }
    bool flag(const std::string& key) const { return std::get<bool>(parameters.at(key)); }
    std::optional<u64> maybe_integer(const std::string& key) const {
        return has(key) ? std::optional<u64>(integer(key)) : std::nullopt;
    }
};

inline const char* to_string(Command c) {
    switch (c) {
        case Command::scan: return "scan";
        case Command::moment1: return "moment1";
        case Command::moment2: return "moment2";
        case Command::dispersion: return "dispersion";
        case Command::lemmas: return "lemmas";
        case Command::singular: return "singular";
        case Command::constant: return "constant";
        case Command::cache: return "cache";
    }
    return "?";
}

inline std::optional<Command> command_from_string(const std::string& s) {
    for (auto c : {Command::scan, Command::moment1, Command::moment2, Command::dispersion, Command::lemmas,
                   Command::singular, Command::constant, Command::cache})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

inline std::vector<KeySpec> key_specs(Command c) {
    using K = ValueKind;
    std::vector<KeySpec> specs = {
        {"output_dir", K::text, false, Value{std::string(".")}},
        {"cache_dir", K::text, false, std::nullopt},
        {"threads", K::integer, false, Value{u64{1}}},
    };
    auto add = [&](std::initializer_list<KeySpec> more) { specs.insert(specs.end(), more); };
    switch (c) {
        case Command::scan:
            add({{"z", K::integer, true}, {"K", K::integer, true}, {"delta", K::integer, false},
                 {"P", K::integer, false, Value{u64{100'000}}}, {"B", K::real, false, Value{1.0}}});
            break;
        case Command::moment1:
            add({{"z", K::integer, true}, {"K", K::integer, true}, {"B", K::real, false, Value{1.0}},
                 {"P", K::integer, false, Value{u64{100'000}}}, {"sensitivity", K::flag, false, Value{false}}});
            break;
        case Command::moment2:
            add({{"z", K::integer, true}, {"K", K::integer, true}, {"delta", K::integer, true},
                 {"B", K::real, false, Value{1.0}}, {"P", K::integer, false, Value{u64{100'000}}},
                 {"t_samples", K::integer, false, Value{u64{16}}}, {"seed", K::integer, false}});
            break;
        case Command::dispersion:
            add({{"z", K::integer, true}, {"K", K::integer, true}, {"delta", K::integer, true},
                 {"B", K::real, false, Value{1.0}}, {"C", K::real, false, Value{2.0}},
                 {"P", K::integer, false, Value{u64{100'000}}}, {"grid", K::integer, false, Value{u64{64}}},
                 {"seed", K::integer, false}, {"m_tilde", K::flag, false, Value{false}},
                 {"tolerance", K::real, false, Value{1e-9}}});
            break;
        case Command::lemmas:
            add({{"seed", K::integer, false, Value{u64{1}}}, {"samples", K::integer, false, Value{u64{200}}},
                 {"c", K::real, false, Value{5.0}}, {"c0", K::real, false, Value{4.0}},
                 {"C0", K::real, false, Value{2.0}}, {"tol", K::real, false, Value{0.05}}});
            break;
        case Command::singular:
            add({{"K", K::integer, true}, {"P", K::integer, false, Value{u64{100'000}}}, {"tol", K::real, false}});
            break;
        case Command::constant:
            add({{"P", K::integer, false, Value{u64{1'000'000}}}});
            break;
        case Command::cache:
            add({{"action", K::text, true}, {"lo", K::integer, false}, {"hi", K::integer, false},
                 {"segment", K::integer, false, Value{u64{1} << 20}}});
            break;
    }
    return specs;
}

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline Value parse_value(const KeySpec& spec, const std::string& raw) {
    auto malformed = [&] { return ConfigError("malformed value for key " + spec.name + ": '" + raw + "'"); };
    const std::string s = trim(raw);
    if (s.empty()) throw malformed();
    switch (spec.kind) {
        case ValueKind::integer: {
            // Accepts plain integers and integral scientific notation ("1e8").
            if (s.find_first_not_of("0123456789") == std::string::npos) {
                try {
                    return Value{static_cast<u64>(std::stoull(s))};
                } catch (...) {
                    throw malformed();
                }
            }
            char* end = nullptr;
            const double d = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size() || !(d >= 0) || d > 9.2e18 || d != std::floor(d)) throw malformed();
            return Value{static_cast<u64>(d)};
        }
        case ValueKind::real: {
            char* end = nullptr;
            const double d = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size() || !std::isfinite(d)) throw malformed();
            return Value{d};
        }
        case ValueKind::text: return Value{s};
        case ValueKind::flag:
            if (s == "1" || s == "true" || s == "yes" || s == "on") return Value{true};
            if (s == "0" || s == "false" || s == "no" || s == "off") return Value{false};
            throw malformed();
    }
    throw malformed();
}

}  // namespace detail

/// Parses `command [--key=value | --key value]...`. A config file, given
/// as `file` or via --config, holds `key = value` lines with `#` comments;
/// flags override file values.
inline RunConfig parse_config(const std::vector<std::string>& args,
                              std::optional<std::filesystem::path> file = std::nullopt) {
    if (args.empty()) throw ConfigError("missing command");
    const auto command = command_from_string(args[0]);
    if (!command) throw ConfigError("unknown command: " + args[0]);

    std::vector<std::pair<std::string, std::string>> flags;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a.rfind("--", 0) != 0) throw ConfigError("unexpected argument: " + a);
        const auto eq = a.find('=');
        if (eq != std::string::npos) {
            flags.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
        } else if (i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0) {
            flags.emplace_back(a.substr(2), args[i + 1]);
            ++i;
        } else {
            flags.emplace_back(a.substr(2), "true");
        }
    }
    for (auto it = flags.begin(); it != flags.end();) {
        if (it->first == "config") {
            file = it->second;
            it = flags.erase(it);
        } else {
            ++it;
        }
    }

    std::map<std::string, std::string> raw;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot read config file: " + file->string());
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("malformed line " + std::to_string(lineno) + " in " + file->string());
            raw[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
        }
    }
    for (const auto& [k, v] : flags) raw[k] = v;

    const auto specs = key_specs(*command);
    for (const auto& [k, v] : raw) {
        const bool known = std::any_of(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.name == k; });
        if (!known) throw ConfigError("unknown key: " + k);
    }

    RunConfig cfg;
    cfg.command = *command;
    for (const auto& spec : specs) {
        if (auto it = raw.find(spec.name); it != raw.end()) {
            cfg.parameters[spec.name] = detail::parse_value(spec, it->second);
        } else if (spec.required) {
            throw ConfigError("missing required key: " + spec.name);
        } else if (spec.fallback) {
            cfg.parameters[spec.name] = *spec.fallback;
        }
    }
    cfg.output_dir = cfg.text("output_dir");
    if (cfg.has("cache_dir")) {
        cfg.cache_dir = cfg.text("cache_dir");
    } else if (const char* env = std::getenv("QPROG_CACHE_DIR")) {
        cfg.cache_dir = env;
    } else {
        cfg.cache_dir = ".qprog_cache";
    }
    cfg.parameters["cache_dir"] = cfg.cache_dir.string();
    cfg.threads = static_cast<unsigned>(std::max<u64>(1, cfg.integer("threads")));
    return cfg;
}

// -------------------------------------------------------
// Artifacts
// -------------------------------------------------------

inline std::string fmt_real(double x) { return detail::num(x); }

/// SHA-1 of "blob <size>\0<content>", the object id `git hash-object` prints.
inline std::string git_blob_hash(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

inline void write_rows_csv(std::ostream& out, const std::vector<ProgressionRow>& rows) {
    out << "k,lambda_sum,count,singular,residual\n";
    for (const auto& r : rows)
        out << r.k << ',' << fmt_real(r.lambda_sum) << ',' << r.count << ',' << fmt_real(r.singular) << ','
            << fmt_real(r.residual) << '\n';
}

inline void write_singular_csv(std::ostream& out, const std::vector<SingularValue>& values) {
    out << "k,P,value,tail_estimate\n";
    for (const auto& s : values)
        out << s.k << ',' << s.truncation_p << ',' << fmt_real(s.value) << ',' << fmt_real(s.tail_estimate) << '\n';
}

inline void write_dispersion_csv(std::ostream& out, const std::vector<DispersionSample>& samples) {
    out << "t,U,V,W,combined,direct_square,main_term,E\n";
    for (const auto& s : samples)
        out << s.t << ',' << fmt_real(s.U) << ',' << fmt_real(s.V) << ',' << fmt_real(s.W) << ','
            << fmt_real(s.combined) << ',' << fmt_real(s.direct_square) << ',' << fmt_real(s.main_term) << ','
            << fmt_real(s.E) << '\n';
}

inline void write_lemma_csv(std::ostream& out, const std::vector<LemmaReport>& reports) {
    out << "lemma_id,params,observed,reference,ratio,pass,seed\n";
    for (const auto& r : reports)
        out << to_string(r.lemma_id) << ',' << r.params_string() << ',' << fmt_real(r.observed) << ','
            << fmt_real(r.reference) << ',' << fmt_real(r.ratio) << ',' << (r.pass ? "true" : "false") << ','
            << (r.seed ? std::to_string(*r.seed) : std::string()) << '\n';
}

inline nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["command"] = to_string(cfg.command);
    auto& p = j["parameters"];
    p = nlohmann::json::object();
    for (const auto& [k, v] : cfg.parameters) std::visit([&, key = k](const auto& x) { p[key] = x; }, v);
    return j;
}

inline nlohmann::json moment_json(const MomentReport& r) {
    nlohmann::json j;
    j["config"] = {{"z", r.config.z}, {"K", r.config.K}, {"B", r.config.B}};
    if (r.config.delta) j["config"]["delta"] = *r.config.delta;
    j["P"] = r.P;
    j["lhs"] = r.lhs;
    j["bound"] = r.bound;
    j["ratio"] = r.ratio;
    j["exceptional_count"] = r.exceptional_count ? nlohmann::json(*r.exceptional_count) : nlohmann::json();
    j["hl_ratio_mean"] = r.hl_ratio_mean;
    if (r.lhs_double_p) j["lhs_double_p"] = *r.lhs_double_p;
    if (r.t_samples) {
        j["t_samples"] = r.t_samples;
        j["sampling_stderr"] = r.sampling_stderr;
        j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json();
    }
    j["warnings"] = r.warnings;
    j["runtime_stats"] = {{"seconds", r.stats.seconds}, {"cells", r.stats.cells}, {"sieve_calls", r.stats.sieve_calls}};
    return j;
}

// -------------------------------------------------------
// Default lemma grid
// -------------------------------------------------------

inline std::vector<LemmaReport> default_lemma_grid(const RunConfig& cfg) {
    const u64 seed = cfg.integer("seed");
    const u64 samples = cfg.integer("samples");
    const double C0 = cfg.real("C0");
    std::vector<LemmaReport> out;
    for (u64 l : {1, 3, 15, 105, 1001}) out.push_back(legendre_sum_check(l));
    const double constant = main_term_constant(1'000'000);
    for (u64 x : {1000, 100000}) out.push_back(phi_average_check(x, cfg.real("c"), constant));
    out.push_back(large_sieve_avg_check(10, 0, 100, {}, 100, seed, cfg.real("c0")));
    {
        std::mt19937_64 rng(seed);
        for (u64 q : {7, 12, 30}) out.push_back(large_sieve_single_check(q, 0, 40, detail::random_unit_coeffs(40, rng)));
    }
    for (u64 q : {3, 101, 200}) out.push_back(polya_vinogradov_check(q));
    std::optional<SieveCache> cache;
    if (!cfg.cache_dir.empty()) cache.emplace(cfg.cache_dir);
    for (auto [l, a] : {std::pair<u64, i64>{1, 0}, {3, 1}, {3, 2}, {4, 1}})
        out.push_back(short_ap_check(10'000'000, 100'000, l, a, cfg.real("tol"), cache ? &*cache : nullptr));
    MeanSquareOptions opt{C0, false};
    out.push_back(mean_square_check(10'000'000, 0.5, 1.0, samples, seed, opt));
    out.push_back(mean_square_twisted_check(10'000'000, 0.5, 1.0, 3, 1, samples, seed, opt));
    return out;
}

// -------------------------------------------------------
// run
// -------------------------------------------------------

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace detail

/// Executes the configured experiment and writes results.csv and
/// summary.json into the output directory.
inline int run(const RunConfig& cfg, std::ostream& log = std::cerr) {
    const auto start = std::chrono::steady_clock::now();
    std::ostringstream csv;
    nlohmann::json result;
    std::vector<std::string> warnings;
    int status = 0;
    try {
        switch (cfg.command) {
            case Command::scan: {
                ScanConfig sc{cfg.integer("z"), cfg.integer("K"), cfg.maybe_integer("delta"), cfg.real("B")};
                const auto rows = scan_all_k(sc, cfg.integer("P"), cfg.threads);
                write_rows_csv(csv, rows);
                result["lhs"] = rows_lhs(rows);
                result["hl_ratio_mean"] = hl_ratio_mean(rows);
                warnings = range_warnings(sc);
                break;
            }
            case Command::moment1: {
                ScanConfig sc{cfg.integer("z"), cfg.integer("K"), std::nullopt, cfg.real("B")};
                const auto r = theorem1_moment(sc, cfg.integer("P"), cfg.threads, cfg.flag("sensitivity"));
                write_rows_csv(csv, r.rows);
                result = moment_json(r.report);
                warnings = r.report.warnings;
                break;
            }
            case Command::moment2: {
                ScanConfig sc{cfg.integer("z"), cfg.integer("K"), cfg.integer("delta"), cfg.real("B")};
                const auto r =
                    theorem2_moment(sc, cfg.integer("P"), cfg.integer("t_samples"), cfg.maybe_integer("seed"), cfg.threads);
                csv << "t,inner_sum\n";
                for (const auto& [t, v] : r.samples) csv << t << ',' << fmt_real(v) << '\n';
                result = moment_json(r);
                warnings = r.warnings;
                break;
            }
            case Command::dispersion: {
                const auto params = DispersionParams::make(cfg.integer("z"), cfg.integer("K"), cfg.integer("delta"),
                                                           cfg.real("B"), cfg.real("C"));
                const DispersionLab lab(params, cfg.integer("P"), cfg.threads);
                const u64 n = cfg.integer("grid");
                const auto grid = cfg.has("seed") ? random_grid(params.z, n, cfg.integer("seed")) : even_grid(params.z, n);
                const auto prof = lab.profile(grid);
                write_dispersion_csv(csv, prof.samples);
                const double tol = cfg.real("tolerance");
                u64 failures = 0;
                double worst = 0;
                for (const auto& s : prof.samples) {
                    const double rel = s.identity_residual() / std::max(1.0, s.direct_square);
                    worst = std::max(worst, rel);
                    if (rel > tol) ++failures;
                }
                result = {{"params",
                           {{"z", params.z}, {"K", params.K}, {"delta", params.delta}, {"B", params.B},
                            {"C", params.C}, {"L", params.L}, {"E", params.E}, {"D1", params.D1}, {"D2", params.D2}}},
                          {"constant", lab.constant()},
                          {"integral_U", prof.integral_U},
                          {"integral_V", prof.integral_V},
                          {"integral_W", prof.integral_W},
                          {"integral_combined", prof.integral_combined},
                          {"integral_main", prof.integral_main},
                          {"max_dev_over_E", {{"U", prof.max_dev_U}, {"V", prof.max_dev_V}, {"W", prof.max_dev_W}}},
                          {"identity_max_relative_residual", worst},
                          {"identity_failures", failures}};
                if (cfg.flag("m_tilde")) {
                    auto& mt = result["m_tilde"];
                    mt = nlohmann::json::array();
                    for (u64 t : grid)
                        mt.push_back({{"t", t}, {"m_tilde", lab.m_tilde(t)}, {"main_term", lab.main_term(t)}});
                }
                if (failures) status = 2;
                break;
            }
            case Command::lemmas: {
                const auto reports = default_lemma_grid(cfg);
                write_lemma_csv(csv, reports);
                u64 failed = 0;
                for (const auto& r : reports) failed += r.pass ? 0 : 1;
                result = {{"checks", reports.size()}, {"failed", failed}};
                if (failed) status = 2;
                break;
            }
            case Command::singular: {
                const u64 K = cfg.integer("K");
                std::vector<SingularValue> values;
                if (cfg.has("tol")) {
                    for (u64 k = 1; k <= K; ++k) values.push_back(singular_series(k, cfg.real("tol")));
                } else {
                    values = batch_singular_series(K, cfg.integer("P"), cfg.threads);
                }
                write_singular_csv(csv, values);
                u64 unstable = 0;
                for (const auto& v : values) unstable += v.stabilized ? 0 : 1;
                result = {{"count", values.size()}, {"not_stabilized", unstable},
                          {"lower_bound_min", [&] {
                               double best = std::numeric_limits<double>::infinity();
                               for (const auto& v : values)
                                   best = std::min(best, v.value * std::log(static_cast<double>(v.k) + 2.0));
                               return best;
                           }()}};
                break;
            }
            case Command::constant: {
                const u64 P = cfg.integer("P");
                const double c = main_term_constant(P);
                csv << "P,value\n" << P << ',' << fmt_real(c) << '\n';
                result = {{"P", P}, {"value", c}};
                break;
            }
            case Command::cache: {
                const SieveCache cache(cfg.cache_dir);
                const auto& action = cfg.text("action");
                CacheReport rep;
                if (action == "stat") {
                    rep = cache.stat();
                } else if (action == "clear") {
                    rep = cache.clear();
                } else if (action == "warm") {
                    if (!cfg.has("lo")) throw ConfigError("missing required key: lo");
                    if (!cfg.has("hi")) throw ConfigError("missing required key: hi");
                    rep = cache.warm(cfg.integer("lo"), cfg.integer("hi"), cfg.integer("segment"));
                } else {
                    throw ConfigError("malformed value for key action: '" + action + "'");
                }
                csv << "path,lo,hi,bytes\n";
                for (const auto& s : rep.segments) csv << s.path.string() << ',' << s.lo << ',' << s.hi << ',' << s.bytes << '\n';
                result = {{"action", action}, {"segments", rep.segments.size()}, {"removed", rep.removed},
                          {"written", rep.written}};
                warnings = rep.warnings;
                break;
            }
        }
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }

    for (const auto& w : warnings) log << "warning: " << w << '\n';
    try {
        std::filesystem::create_directories(cfg.output_dir);
        const std::string content = csv.str();
        detail::write_file(cfg.output_dir / "results.csv", content);
        nlohmann::json summary = config_json(cfg);
        summary["content_hash"] = git_blob_hash(content);
        summary["result"] = result;
        summary["warnings"] = warnings;
        summary["exit_code"] = status;
        summary["timings"] = {
            {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
        detail::write_file(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
    return status;
}

}  // namespace qprog
