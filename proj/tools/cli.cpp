#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vtest/vtest.hpp"

namespace vtest::cli {
namespace {

using nlohmann::ordered_json;

/// Bad user input: unreadable files, malformed numbers, invalid flag values.
class InputError : public Error {
public:
    using Error::Error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
    return parts;
}

/// Newline-delimited decimal numbers; blank lines and '#' comments skipped.
std::vector<double> read_sample_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open sample file '" + path + "'");
    std::vector<double> values;
    std::vector<std::string> problems;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        double v = 0.0;
        const char* first = t.data();
        const char* last = t.data() + t.size();
        if (*first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
            problems.push_back("line " + std::to_string(lineno) + ": '" + t + "' is not a finite number");
            continue;
        }
        values.push_back(v);
    }
    if (!problems.empty()) {
        std::string msg = path + ":";
        for (const auto& p : problems) msg += "\n  " + p;
        throw InputError(msg);
    }
    if (values.empty()) throw InputError("sample file '" + path + "' contains no observations");
    return values;
}

/// Exact value of a decimal literal ("0.1" -> 1/10, "2.5e-3", "-3") or "a/b".
Rational parse_exact(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) throw InputError("empty number");
    if (s.find('/') != std::string::npos) {
        try {
            return Rational::parse(s);
        } catch (const Error&) {
            throw InputError("malformed rational '" + s + "'");
        }
    }
    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    for (; i < s.size() && s[i] != 'e' && s[i] != 'E'; ++i) {
        if (s[i] == '.' && !seen_point) {
            seen_point = true;
        } else if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            digits.push_back(s[i]);
            if (seen_point) ++frac_digits;
        } else {
            throw InputError("malformed number '" + s + "'");
        }
    }
    if (digits.empty()) throw InputError("malformed number '" + s + "'");
    long exponent = 0;
    if (i < s.size()) {
        const std::string e = s.substr(i + 1);
        const auto [ptr, ec] = std::from_chars(e.data() + (e.size() && e[0] == '+' ? 1 : 0), e.data() + e.size(), exponent);
        if (e.empty() || ec != std::errc() || ptr != e.data() + e.size() || std::labs(exponent) > 4000) {
            throw InputError("malformed exponent in '" + s + "'");
        }
    }
    BigInt num(digits, 10);
    if (negative) num = -num;
    const long scale = exponent - frac_digits;
    BigInt pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(scale)));
    return scale >= 0 ? Rational(num * pow10) : Rational(num, pow10);
}

std::vector<long> parse_long_list(const std::string& s, const std::string& what) {
    std::vector<long> out;
    for (const auto& part : split(s, ',')) {
        long v = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
            throw InputError("invalid " + what + " entry '" + part + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw InputError(what + " is empty");
    return out;
}

ordered_json exact_json(const Rational& r) {
    return ordered_json{{"exact", r.fraction_str()}, {"float", r.to_double()}};
}

std::shared_ptr<TableCache> make_cache(const std::optional<std::string>& dir, bool disabled) {
    if (disabled) return std::make_shared<TableCache>(std::nullopt);
    if (dir) return std::make_shared<TableCache>(std::filesystem::path(*dir));
    return std::make_shared<TableCache>(default_cache_dir());
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

/// Output sink: the named file, or stdout when empty.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw InputError("cannot write '" + path + "'");
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

// ---------------------------------------------------------------------------
// test

struct TestOptions {
    std::string x_path;
    std::string y_path;
    bool two_sided = false;
    std::string method = "auto";
    std::optional<double> alpha;
    std::string tie_policy = "error";
    std::string tail = "strict";
    bool json = false;
    long table_cap = 600;
    std::optional<std::string> cache_dir;
    bool no_cache = false;
};

int cmd_test(const TestOptions& o, std::ostream& out, std::ostream& err) {
    TiePolicy policy = TiePolicy::error;
    if (o.tie_policy == "x-first") policy = TiePolicy::x_first;
    else if (o.tie_policy == "y-first") policy = TiePolicy::y_first;

    const Sample x(read_sample_file(o.x_path), Label::X);
    const Sample y(read_sample_file(o.y_path), Label::Y);
    const LabelSequence seq = pool(x, y, policy);
    const Sided sided = o.two_sided ? Sided::two_sided : Sided::one_sided;
    const VinczeResult res = vincze(seq, sided);
    const long n = res.n;
    const long m = res.m;

    std::vector<std::string> warnings;
    if (!seq.ties().empty()) {
        warnings.push_back(std::to_string(seq.ties().size()) + " cross-sample tie(s) ordered " +
                           (policy == TiePolicy::x_first ? "X first" : "Y first"));
    }

    bool exact = false;
    if (sided == Sided::two_sided) {
        if (o.method == "exact") warnings.push_back("no exact law for the two-sided statistic; using the limit law");
    } else if (o.method != "asymptotic") {
        if (m % n != 0) {
            warnings.push_back("exact law needs m to be a multiple of n; using the limit law");
        } else if (o.method == "auto" && n + m > o.table_cap) {
            warnings.push_back("n+m exceeds the exact table cap of " + std::to_string(o.table_cap) +
                               "; using the limit law");
        } else {
            exact = true;
        }
    }

    const Tail tail = o.tail == "inclusive" ? Tail::inclusive : Tail::strict;
    std::optional<Rational> p_exact;
    double p_float = 0.0;
    std::optional<CriticalValue> cv;
    double crit = 0.0;
    if (exact) {
        auto cache = make_cache(o.cache_dir, o.no_cache);
        const auto table = cache->get(n, m / n);
        p_exact = p_value_exact(*table, res, tail);
        p_float = p_exact->to_double();
        if (o.alpha) {
            cv = critical_value(*table, *o.alpha);
            crit = cv->scaled;
        }
    } else {
        const double s = scale_statistic(res);
        p_float = sided == Sided::one_sided ? 1.0 - maxwell_cdf(s) : 1.0 - two_sided_cdf(s);
        if (o.alpha) crit = sided == Sided::one_sided ? maxwell_quantile(1.0 - *o.alpha) : two_sided_quantile(1.0 - *o.alpha);
    }
    std::optional<bool> reject;
    if (o.alpha) reject = cv ? res.t_sq > cv->t_sq : scale_statistic(res) > crit;

    for (const auto& w : warnings) err << "warning: " << w << "\n";

    if (o.json) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = "test";
        j["n"] = n;
        j["m"] = m;
        j["sided"] = to_string(sided);
        j["R"] = res.r;
        j["D"] = exact_json(res.d);
        j["T_squared"] = res.t_sq.fraction_str();
        j["T"] = res.t_float;
        j["scaled_T"] = res.scaled_t_float;
        j["p_value"] = p_exact ? exact_json(*p_exact) : ordered_json{{"exact", nullptr}, {"float", p_float}};
        j["method"] = exact ? "exact" : "asymptotic";
        j["tail"] = exact ? o.tail : "strict";
        j["warnings"] = warnings;
        if (o.alpha) {
            j["alpha"] = *o.alpha;
            j["critical_value"] = crit;
            if (cv) j["attained_size"] = exact_json(cv->size);
            j["reject"] = *reject;
        }
        out << j.dump(2) << "\n";
        return kOk;
    }

    out << "V-test (" << to_string(sided) << "), n=" << n << ", m=" << m << "\n";
    out << "R         = " << res.r << "\n";
    out << "D         = " << res.d.fraction_str() << " (" << fmt(res.d.to_double()) << ")\n";
    out << "T         = " << fmt(res.t_float, 10) << "  (T^2 = " << res.t_sq.fraction_str() << ")\n";
    out << "scaled T  = " << fmt(res.scaled_t_float, 10) << "\n";
    out << "p-value   = ";
    if (p_exact) out << p_exact->fraction_str() << " (" << fmt(p_float, 10) << ")";
    else out << fmt(p_float, 10);
    out << "  [" << (exact ? "exact" : "asymptotic") << "]\n";
    if (o.alpha) {
        out << "alpha     = " << *o.alpha << ", critical value = " << fmt(crit, 10);
        if (cv) out << ", attained size = " << cv->size.fraction_str();
        out << "\n";
        out << "decision  = " << (*reject ? "reject H0" : "do not reject H0") << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// dist

struct DistOptions {
    long n = 0;
    long p = 0;
    std::string grid;
    bool support = false;
    bool scaled = false;
    std::string out_path;
    std::optional<std::string> cache_dir;
    bool no_cache = false;
};

int cmd_dist(const DistOptions& o, std::ostream& out, std::ostream&) {
    if (o.n < 1 || o.p < 1) throw InputError("--n and --p must be positive");
    auto cache = make_cache(o.cache_dir, o.no_cache);
    const auto table = cache->get(o.n, o.p);
    Sink sink(o.out_path, out);
    auto& os = sink.stream();
    os << std::setprecision(17);

    if (o.grid.empty()) {
        const Rational scale(BigInt(table->n()) * table->m() * table->total());
        os << "x,x_squared,mass,cdf,cdf_float,pairs\n";
        for (const auto& pt : table->support()) {
            const Rational x_sq = pt.t_sq * scale;
            os << std::sqrt(x_sq.to_double()) << ',' << x_sq.fraction_str() << ',' << pt.mass.fraction_str() << ','
               << pt.cumulative.fraction_str() << ',' << pt.cumulative.to_double() << ',';
            for (std::size_t i = 0; i < pt.pairs.size(); ++i) {
                os << (i ? ";" : "") << pt.pairs[i].first << ':' << pt.pairs[i].second;
            }
            os << '\n';
        }
        return kOk;
    }

    os << "x,cdf,cdf_float\n";
    for (const auto& text : split(o.grid, ',')) {
        const Rational x = parse_exact(text);
        const Rational c = o.scaled ? cdf_scaled(*table, x) : cdf_J(*table, x);
        os << text << ',' << c.fraction_str() << ',' << c.to_double() << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// curves

struct CurvesOptions {
    std::string pairs = "10:20,60:60";
    std::string grid_max = "4";
    long grid_steps = 400;
    std::string out_path;
    std::optional<std::string> cache_dir;
    bool no_cache = false;
};

int cmd_curves(const CurvesOptions& o, std::ostream& out, std::ostream&) {
    std::vector<std::pair<long, long>> pairs;
    for (const auto& item : split(o.pairs, ',')) {
        const auto nm = parse_long_list(std::string(item).replace(item.find(':') == std::string::npos ? 0 : item.find(':'),
                                                                  item.find(':') == std::string::npos ? 0 : 1, ","),
                                        "pair");
        if (nm.size() != 2 || nm[0] < 1 || nm[1] < 1) throw InputError("pairs must look like n:m, got '" + item + "'");
        if (nm[1] % nm[0] != 0) throw InputError("pair " + item + ": m must be a multiple of n for the exact law");
        pairs.emplace_back(nm[0], nm[1]);
    }
    if (o.grid_steps < 1) throw InputError("--grid-steps must be >= 1");
    const Rational grid_max = parse_exact(o.grid_max);
    if (grid_max.sign() <= 0) throw InputError("--grid-max must be positive");

    auto cache = make_cache(o.cache_dir, o.no_cache);
    std::vector<std::shared_ptr<const ExactNullTable>> tables;
    for (const auto& [n, m] : pairs) tables.push_back(cache->get(n, m / n));

    Sink sink(o.out_path, out);
    auto& os = sink.stream();
    os << std::setprecision(17);
    os << "x";
    for (const auto& [n, m] : pairs) os << ",K_" << n << '_' << m;
    os << ",K\n";
    for (long i = 0; i <= o.grid_steps; ++i) {
        const Rational x = grid_max * Rational(i, o.grid_steps);
        os << x.to_double();
        for (const auto& t : tables) os << ',' << cdf_scaled(*t, x).to_double();
        os << ',' << maxwell_cdf(x.to_double()) << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    std::string model = "normal-shift";
    double shift = 0.4;
    std::string n_list = "10,15,20,25,30,35,40,50,60,70,80,100,200";
    std::size_t reps = 1000;
    std::uint64_t seed = 20240601;
    std::string mode = "exact";
    unsigned threads = 1;
    std::optional<double> alpha;
    double tau_q = 0.2;
    double delta = 2.0;
    std::string base = "uniform";
    bool json = false;
    bool timing = false;
    std::optional<std::string> cache_dir;
    bool no_cache = false;
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
    SimConfig cfg;
    cfg.n_values = parse_long_list(o.n_list, "--n-list");
    cfg.shift = o.shift;
    cfg.replicates = o.reps;
    cfg.seed = o.seed;
    cfg.p_value_mode = o.mode == "asymptotic" ? PValueMode::asymptotic : PValueMode::exact;
    cfg.threads = std::max(1u, o.threads);
    cfg.model = o.model;
    std::optional<Example1Family> fam;
    if (o.model == "example1") {
        BaseDistribution base = o.base == "normal" ? BaseDistribution::standard_normal() : BaseDistribution::uniform01();
        fam.emplace(Example1Family::from_quantile(base, o.tau_q, o.delta));
        cfg.sampler = [f = *fam, base](std::size_t n, std::size_t m, Engine& eng) {
            Sample x = f.sample(n, eng, Label::X);
            std::vector<double> y(m);
            for (auto& v : y) v = base.quantile(draw_uniform(eng));
            return std::make_pair(std::move(x), Sample(std::move(y), Label::Y));
        };
    }
    cfg.validate();

    auto cache = make_cache(o.cache_dir, o.no_cache);
    const auto t0 = std::chrono::steady_clock::now();
    const SimReport report = run_table1(cfg, TableSource(cache));
    std::optional<PowerReport> power;
    if (o.alpha) power = power_comparison(cfg, *o.alpha, TableSource(cache));
    const double total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    err << "simulate: " << fmt(total_seconds, 4) << " s total, " << fmt(report.table_build_seconds, 4)
        << " s in exact tables\n";

    if (o.json) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = "simulate";
        ordered_json c;
        c["model"] = o.model;
        if (fam) {
            c["base"] = o.base;
            c["tau_quantile"] = o.tau_q;
            c["tau"] = fam->tau();
            c["delta"] = fam->delta();
            c["beta"] = fam->beta();
        } else {
            c["shift"] = cfg.shift;
        }
        c["replicates"] = cfg.replicates;
        c["seed"] = cfg.seed;
        c["p_value_mode"] = to_string(cfg.p_value_mode);
        c["n_values"] = cfg.n_values;
        j["config"] = c;
        ordered_json rows = ordered_json::array();
        for (const auto& r : report.rows) {
            ordered_json row{{"n", r.n},
                             {"replicates", r.replicates},
                             {"mean_pV", r.mean_pV},
                             {"mean_pS", r.mean_pS},
                             {"std_err_pV", r.std_err_pV},
                             {"std_err_pS", r.std_err_pS},
                             {"std_err_diff", r.std_err_diff}};
            if (o.timing) row["runtime_seconds"] = r.runtime_seconds;
            rows.push_back(row);
        }
        j["rows"] = rows;
        if (power) {
            ordered_json prow = ordered_json::array();
            for (const auto& r : power->rows) {
                prow.push_back({{"n", r.n},
                                {"alpha", r.alpha},
                                {"critical_V", r.critical_v},
                                {"critical_S", r.critical_s},
                                {"size_V", r.size_v},
                                {"size_S", r.size_s},
                                {"rate_V", r.rate_v},
                                {"rate_S", r.rate_s},
                                {"std_err_V", r.std_err_v},
                                {"std_err_S", r.std_err_s}});
            }
            j["power"] = prow;
        }
        if (o.timing) j["table_build_seconds"] = report.table_build_seconds;
        out << j.dump(2) << "\n";
        return kOk;
    }

    out << "# mean p-values, model=" << o.model;
    if (!fam) out << " shift=" << cfg.shift;
    out << " reps=" << cfg.replicates << " seed=" << cfg.seed << " mode=" << to_string(cfg.p_value_mode) << "\n";
    out << std::fixed << std::setprecision(4);
    out << std::setw(6) << "n" << std::setw(10) << "p_V" << std::setw(10) << "p_S" << std::setw(10) << "se(p_V)"
        << std::setw(10) << "se(p_S)" << "\n";
    for (const auto& r : report.rows) {
        out << std::setw(6) << r.n << std::setw(10) << r.mean_pV << std::setw(10) << r.mean_pS << std::setw(10)
            << r.std_err_pV << std::setw(10) << r.std_err_pS << "\n";
    }
    if (power) {
        out << "# rejection rates at alpha=" << power->alpha << "\n";
        out << std::setw(6) << "n" << std::setw(10) << "rate_V" << std::setw(10) << "rate_S" << std::setw(10)
            << "size_V" << std::setw(10) << "size_S" << "\n";
        for (const auto& r : power->rows) {
            out << std::setw(6) << r.n << std::setw(10) << r.rate_v << std::setw(10) << r.rate_s << std::setw(10)
                << r.size_v << std::setw(10) << r.size_s << "\n";
        }
    }
    out.unsetf(std::ios::floatfield);
    return kOk;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOptions {
    long max_total = 12;
    bool bridge = false;
    std::size_t grid = 10000;
    std::size_t reps = 200000;
    std::uint64_t seed = 20240601;
    unsigned threads = 1;
    std::string bridge_mode = "continuous";
    bool json = false;
};

int cmd_oracle(const OracleOptions& o, std::ostream& out, std::ostream& err) {
    if (o.max_total < 2) throw InputError("--max-total must be >= 2");
    bool all_pass = true;
    ordered_json cases = ordered_json::array();
    std::ostringstream text;

    for (long n = 1; 2 * n <= o.max_total; ++n) {
        for (long p = 1; n * (p + 1) <= o.max_total; ++p) {
            const long m = n * p;
            const auto table = build_table(n, p);
            const auto enumerated = enumerate_null(n, m, Sided::one_sided).pmf_rk();
            ordered_json mismatches = ordered_json::array();
            std::size_t pairs = 0;
            for (long r = 1; r <= table.total(); ++r) {
                for (long k = 0; k <= m; ++k) {
                    auto it = enumerated.find({r, k});
                    const Rational e = it == enumerated.end() ? Rational(0) : it->second;
                    const Rational& f = table.pmf(r, k);
                    if (f.sign() != 0 || e.sign() != 0) ++pairs;
                    if (e != f) {
                        mismatches.push_back({{"r", r}, {"k", k}, {"formula", f.fraction_str()},
                                              {"enumeration", e.fraction_str()}});
                        text << "FAIL n=" << n << " p=" << p << " r=" << r << " k=" << k << " formula=" << f
                             << " enumeration=" << e << "\n";
                    }
                }
            }
            const bool normalized = table.total_mass() == Rational(1);
            const bool atom = table.pmf(table.total(), 0) == atom_probability(n, m);
            const bool ok = mismatches.empty() && normalized && atom;
            all_pass = all_pass && ok;
            if (!normalized) text << "FAIL n=" << n << " p=" << p << " pmf does not sum to 1\n";
            if (!atom) text << "FAIL n=" << n << " p=" << p << " P(R=n+m) differs from m/((n+m)(n+m-1))\n";
            if (ok) text << "PASS n=" << n << " p=" << p << " m=" << m << " pairs=" << pairs << "\n";
            cases.push_back({{"n", n}, {"p", p}, {"m", m}, {"pairs", pairs}, {"normalized", normalized},
                             {"atom", atom}, {"mismatches", mismatches}, {"pass", ok}});
        }
    }

    ordered_json bridge = ordered_json::array();
    if (o.bridge) {
        const BridgeMax mode = o.bridge_mode == "grid" ? BridgeMax::grid : BridgeMax::continuous;
        std::vector<double> xs;
        for (int i = 1; i <= 100; ++i) xs.push_back(0.05 * i);
        // 99.9% DKW band; the grid-only maximum is biased low by about 0.6 / sqrt(grid)
        double band = dkw_epsilon(o.reps, 0.999);
        if (mode == BridgeMax::grid) band += 1.0 / std::sqrt(static_cast<double>(o.grid));
        for (Sided kind : {Sided::one_sided, Sided::two_sided}) {
            const auto z = simulate_limit_variable(kind, o.grid, o.reps,
                                                   stream_seed(o.seed, kind == Sided::one_sided ? 1 : 2),
                                                   std::max(1u, o.threads), mode);
            const double sup = kind == Sided::one_sided
                                   ? ecdf_sup_distance(z, xs, maxwell_cdf)
                                   : ecdf_sup_distance(z, xs, [](double x) { return two_sided_cdf(x); });
            const bool ok = sup <= band;
            all_pass = all_pass && ok;
            const char* name = kind == Sided::one_sided ? "K" : "K*";
            text << (ok ? "PASS" : "FAIL") << " bridge " << name << " sup=" << fmt(sup) << " band=" << fmt(band)
                 << "\n";
            bridge.push_back({{"law", name}, {"sup_distance", sup}, {"band", band}, {"pass", ok}});
        }
    }

    if (o.json) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = "oracle";
        j["max_total"] = o.max_total;
        j["cases"] = cases;
        if (o.bridge) {
            j["bridge_config"] = {{"grid", o.grid}, {"reps", o.reps}, {"seed", o.seed}, {"mode", o.bridge_mode}};
            j["bridge"] = bridge;
        }
        j["pass"] = all_pass;
        out << j.dump(2) << "\n";
    } else {
        out << text.str();
        out << (all_pass ? "all checks passed" : "verification FAILED") << "\n";
    }
    if (!all_pass) err << "oracle: verification failed\n";
    return all_pass ? kOk : kVerification;
}

void add_cache_flags(CLI::App* cmd, std::optional<std::string>& dir, bool& disabled) {
    cmd->add_option("--cache-dir", dir, "Exact table cache directory (default $VTEST_CACHE_DIR)");
    cmd->add_flag("--no-cache", disabled, "Build exact tables in memory only");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"vtest: two-sample V-test with exact and limiting null distributions"};
    app.require_subcommand(1);

    TestOptions test;
    auto* t = app.add_subcommand("test", "Run the V-test on two samples");
    t->add_option("--x", test.x_path, "File with the X sample")->required();
    t->add_option("--y", test.y_path, "File with the Y sample")->required();
    t->add_flag("--two-sided", test.two_sided, "Two-sided statistic T*");
    t->add_option("--method", test.method, "exact|asymptotic|auto")
        ->check(CLI::IsMember({"exact", "asymptotic", "auto"}));
    t->add_option("--alpha", test.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    t->add_option("--tie-policy", test.tie_policy, "error|x-first|y-first")
        ->check(CLI::IsMember({"error", "x-first", "y-first"}));
    t->add_option("--tail", test.tail, "strict: P(T > t); inclusive: P(T >= t)")
        ->check(CLI::IsMember({"strict", "inclusive"}));
    t->add_option("--table-cap", test.table_cap, "Largest n+m for the exact route under --method auto");
    t->add_flag("--json", test.json, "JSON report");
    add_cache_flags(t, test.cache_dir, test.no_cache);

    DistOptions dist;
    auto* d = app.add_subcommand("dist", "Tabulate the exact null distribution for m = n p");
    d->add_option("--n", dist.n, "X sample size")->required();
    d->add_option("--p", dist.p, "Ratio m / n")->required();
    auto* grid_opt = d->add_option("--grid", dist.grid, "Comma-separated points for J (or K_nm with --scaled)");
    d->add_flag("--support", dist.support, "List support points of sqrt(nm(n+m)) T (default)")->excludes(grid_opt);
    d->add_flag("--scaled", dist.scaled, "Interpret --grid on the sqrt(nm(n+m)) T scale");
    d->add_option("--out", dist.out_path, "Output CSV file (default stdout)");
    add_cache_flags(d, dist.cache_dir, dist.no_cache);

    CurvesOptions curves;
    auto* c = app.add_subcommand("curves", "CSV of K_nm(x) for several (n, m) and the limit K(x)");
    c->add_option("--pairs", curves.pairs, "Comma-separated n:m pairs");
    c->add_option("--grid-max", curves.grid_max, "Largest x");
    c->add_option("--grid-steps", curves.grid_steps, "Number of grid intervals");
    c->add_option("--out", curves.out_path, "Output CSV file (default stdout)");
    add_cache_flags(c, curves.cache_dir, curves.no_cache);

    SimulateOptions sim;
    auto* s = app.add_subcommand("simulate", "Mean p-values of the V-test and the Smirnov test");
    s->add_option("--model", sim.model, "normal-shift|example1")->check(CLI::IsMember({"normal-shift", "example1"}));
    s->add_option("--shift", sim.shift, "Location shift (normal-shift model)");
    s->add_option("--n-list", sim.n_list, "Comma-separated sample sizes (m = n)");
    s->add_option("--reps", sim.reps, "Replicates per n")->check(CLI::PositiveNumber);
    s->add_option("--seed", sim.seed, "Base seed");
    s->add_option("--mode", sim.mode, "exact|asymptotic p-values")->check(CLI::IsMember({"exact", "asymptotic"}));
    s->add_option("--threads", sim.threads, "Worker threads (results do not depend on it)");
    s->add_option("--alpha", sim.alpha, "Also report rejection rates at this level")->check(CLI::Range(0.0, 1.0));
    s->add_option("--tau-q", sim.tau_q, "example1: tau as a quantile of the base distribution");
    s->add_option("--delta", sim.delta, "example1: delta > 1");
    s->add_option("--base", sim.base, "example1: uniform|normal")->check(CLI::IsMember({"uniform", "normal"}));
    s->add_flag("--json", sim.json, "JSON report");
    s->add_flag("--timing", sim.timing, "Include runtimes in the JSON report");
    add_cache_flags(s, sim.cache_dir, sim.no_cache);

    OracleOptions orc;
    auto* o = app.add_subcommand("oracle", "Check the closed-form null law against enumeration and simulation");
    o->add_option("--max-total", orc.max_total, "Check every (n, p) with n(p+1) <= this");
    o->add_flag("--bridge", orc.bridge, "Also compare K and K* with Brownian-bridge simulation");
    o->add_option("--grid", orc.grid, "Bridge grid points")->check(CLI::Range(1000, 100000000));
    o->add_option("--reps", orc.reps, "Bridge replicates")->check(CLI::PositiveNumber);
    o->add_option("--seed", orc.seed, "Bridge seed");
    o->add_option("--threads", orc.threads, "Worker threads");
    o->add_option("--bridge-mode", orc.bridge_mode, "continuous|grid")->check(CLI::IsMember({"continuous", "grid"}));
    o->add_flag("--json", orc.json, "JSON report");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*t) return cmd_test(test, out, err);
        if (*d) return cmd_dist(dist, out, err);
        if (*c) return cmd_curves(curves, out, err);
        if (*s) return cmd_simulate(sim, out, err);
        if (*o) return cmd_oracle(orc, out, err);
    } catch (const TieError& e) {
        err << "error: " << e.what() << "\n";
        return kPrecondition;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UnsupportedSampleRatio& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}

}  // namespace vtest::cli
