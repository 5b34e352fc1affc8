#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "tlsnl/constants.hpp"
#include "tlsnl/dynamics.hpp"
#include "tlsnl/errors.hpp"
#include "tlsnl/holeburning.hpp"
#include "tlsnl/perturbative.hpp"
#include "tlsnl/phase_diagram.hpp"
#include "tlsnl/presets.hpp"
#include "tlsnl/steady_solver.hpp"
#include "tlsnl/thermal.hpp"
#include "tlsnl/version.hpp"

namespace tlsnl::cli {
namespace {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- values

enum class Kind { Real, Int, Flag, Word, Freq, Temp, Power, Time, Length, Span, FreqSpan, TempSpan, PowerSpan, LogSpan };

struct Key {
    std::string name;
    Kind kind;
    std::string help;
};

struct Span {
    double start;
    double stop;
    std::size_t count;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> to_real(const std::string& text) {
    std::string s = trim(text);
    if (!s.empty() && s[0] == '+') s.erase(0, 1);
    if (s == "inf" || s == "Inf") return kInf;
    if (s == "-inf" || s == "-Inf") return -kInf;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

struct Suffix {
    const char* text;
    double scale;
};

// longest matching suffix wins; bare numbers take bare_scale
std::optional<double> with_suffix(const std::string& text, const std::vector<Suffix>& table, double bare_scale) {
    const std::string s = trim(text);
    const Suffix* best = nullptr;
    std::size_t best_len = 0;
    for (const Suffix& u : table) {
        const std::size_t n = std::char_traits<char>::length(u.text);
        if (s.size() > n && s.compare(s.size() - n, n, u.text) == 0 && n > best_len) {
            best = &u;
            best_len = n;
        }
    }
    const auto v = to_real(best ? s.substr(0, s.size() - best_len) : s);
    if (!v) return std::nullopt;
    return *v * (best ? best->scale : bare_scale);
}

const std::vector<Suffix> kFreqUnits{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
const std::vector<Suffix> kTempUnits{{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}};
const std::vector<Suffix> kTimeUnits{{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
const std::vector<Suffix> kLengthUnits{{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
const std::vector<Suffix> kWattUnits{{"W", 1.0},   {"mW", 1e-3},  {"uW", 1e-6}, {"nW", 1e-9},
                                     {"pW", 1e-12}, {"fW", 1e-15}, {"aW", 1e-18}};

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watt_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

// bare numbers are dBm
std::optional<double> to_power(const std::string& text) {
    const std::string s = trim(text);
    if (s.size() > 3 && s.compare(s.size() - 3, 3, "dBm") == 0) {
        const auto v = to_real(s.substr(0, s.size() - 3));
        if (!v) return std::nullopt;
        return dbm_to_watt(*v);
    }
    for (const Suffix& u : kWattUnits) {
        const std::size_t n = std::char_traits<char>::length(u.text);
        if (s.size() > n && s.compare(s.size() - n, n, u.text) == 0) {
            const auto v = with_suffix(s, kWattUnits, 1.0);
            if (!v || !(*v > 0.0)) return std::nullopt;
            return v;
        }
    }
    const auto v = to_real(s);
    if (!v) return std::nullopt;
    return dbm_to_watt(*v);
}

std::optional<double> to_scalar(const std::string& s, Kind k) {
    switch (k) {
        case Kind::Freq:
        case Kind::FreqSpan:
            return with_suffix(s, kFreqUnits, 1.0);
        case Kind::Temp:
        case Kind::TempSpan:
            return with_suffix(s, kTempUnits, 1e-3);
        case Kind::Time:
            return with_suffix(s, kTimeUnits, 1.0);
        case Kind::Length:
            return with_suffix(s, kLengthUnits, 1.0);
        case Kind::Power:
        case Kind::PowerSpan:
            return to_power(s);
        default:
            return to_real(s);
    }
}

std::optional<long long> to_int(const std::string& text) {
    const std::string s = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<bool> to_flag(const std::string& text) {
    const std::string s = trim(text);
    if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "off" || s == "no" || s == "0") return false;
    return std::nullopt;
}

// start:stop:count
std::optional<Span> to_span(const std::string& text, Kind k) {
    const std::string s = trim(text);
    const auto c1 = s.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : s.find(':', c1 + 1);
    if (c2 == std::string::npos) return std::nullopt;
    const auto a = to_scalar(s.substr(0, c1), k);
    const auto b = to_scalar(s.substr(c1 + 1, c2 - c1 - 1), k);
    const auto n = to_int(s.substr(c2 + 1));
    if (!a || !b || !n || *n < 1) return std::nullopt;
    if (*n == 1 && *a != *b) return std::nullopt;
    if (k == Kind::LogSpan && !(*a > 0.0 && *b > 0.0)) return std::nullopt;
    return Span{*a, *b, static_cast<std::size_t>(*n)};
}

bool parses(const std::string& value, Kind k) {
    switch (k) {
        case Kind::Int:
            return to_int(value).has_value();
        case Kind::Flag:
            return to_flag(value).has_value();
        case Kind::Word:
            return !trim(value).empty();
        case Kind::Span:
        case Kind::FreqSpan:
        case Kind::TempSpan:
        case Kind::PowerSpan:
        case Kind::LogSpan:
            return to_span(value, k).has_value();
        default:
            return to_scalar(value, k).has_value();
    }
}

std::vector<double> expand(const Span& s, Kind k) {
    std::vector<double> out(s.count);
    for (std::size_t i = 0; i < s.count; ++i) {
        const double u = s.count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(s.count - 1);
        if (k == Kind::PowerSpan || k == Kind::LogSpan)
            out[i] = std::exp(std::log(s.start) + u * (std::log(s.stop) - std::log(s.start)));
        else
            out[i] = s.start + u * (s.stop - s.start);
    }
    return out;
}

// ---------------------------------------------------------------- key tables

const std::vector<Key>& model_keys() {
    static const std::vector<Key> k{
        {"f_r0", Kind::Freq, "bare resonance frequency"},
        {"kappa_e_over_2pi", Kind::Freq, "external coupling rate / 2pi"},
        {"q_bkg", Kind::Real, "background quality factor"},
        {"fd0_reac", Kind::Real, "reactive loss tangent F delta0"},
        {"fd0_diss", Kind::Real, "dissipative loss tangent F delta0"},
        {"n_s", Kind::Real, "saturation phonon number"},
        {"beta", Kind::Real, "saturation exponent"},
        {"q_rel_ref", Kind::Real, "relaxation Q at 0.5 K"},
        {"d_exp", Kind::Real, "phonon bath dimensionality"},
        {"t0", Kind::Temp, "bath temperature (bare numbers in mK)"},
        {"n_ch", Kind::Real, "G_th(T0)/g0(T0)"},
        {"gamma", Kind::Real, "thermal conductance exponent"},
        {"c_th", Kind::Real, "heat capacity J/K"},
        {"omega_tls_over_2pi", Kind::Freq, "discrete TLS frequency"},
        {"g_over_2pi", Kind::Freq, "TLS coupling / 2pi"},
        {"discrete_tls", Kind::Flag, "enable the discrete TLS"},
        {"phi_rot", Kind::Real, "impedance mismatch rotation (rad)"},
        {"fixed_q", Kind::Real, "hold the total Q constant"},
    };
    return k;
}

const std::vector<Key>& tolerance_keys() {
    static const std::vector<Key> k{
        {"precise", Kind::Flag, "start from the tight tolerance set"},
        {"eps_alpha", Kind::Real, "alpha iteration tolerance"},
        {"eps_x", Kind::Real, "detuning tolerance"},
        {"eps_t", Kind::Real, "relative temperature tolerance"},
        {"max_alpha_iter", Kind::Int, "alpha iteration cap"},
        {"max_anderson_iter", Kind::Int, "Anderson iteration cap"},
        {"max_mixing_iter", Kind::Int, "mixing iteration cap"},
        {"anderson_depth", Kind::Int, "Anderson history depth"},
        {"mix_beta", Kind::Real, "mixing parameter"},
    };
    return k;
}

struct Command {
    std::string name;
    std::string help;
    bool uses_model;
    std::vector<Key> keys;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> c{
        {"sweep-s11",
         "steady-state S11 frequency sweep",
         true,
         {{"ps", Kind::Power, "probe power (bare numbers in dBm)"},
          {"f_range", Kind::FreqSpan, "start:stop:count, default spans the pulled resonance"},
          {"points", Kind::Int, "points of the default window"},
          {"direction", Kind::Word, "up, down or both"}}},
        {"power-sweep",
         "fixed-frequency power sweep with scaling exponents",
         true,
         {{"f_probe", Kind::Freq, "probe frequency, default the low-power resonance"},
          {"ps_range", Kind::PowerSpan, "start:stop:count in dBm"}}},
        {"ringdown",
         "time trace of T and n after switching the drive",
         true,
         {{"ps", Kind::Power, "probe power"},
          {"f_probe", Kind::Freq, "probe frequency"},
          {"t_end", Kind::Time, "trace length"},
          {"samples", Kind::Int, "output samples"},
          {"mode", Kind::Word, "ringdown or ringup"}}},
        {"sweep-dynamic",
         "time-domain frequency sweep with IF filtering",
         true,
         {{"ps", Kind::Power, "probe power"},
          {"f_range", Kind::FreqSpan, "start:stop:count"},
          {"points", Kind::Int, "points of the default window"},
          {"direction", Kind::Word, "up, down or both"},
          {"t_meas", Kind::Time, "dwell per point"},
          {"if_bw", Kind::Freq, "IF bandwidth"},
          {"if_k", Kind::Real, "IF settling factor"}}},
        {"phase-diagram",
         "bistability map over power and loss tangent or coupling",
         true,
         {{"ps_range", Kind::PowerSpan, "start:stop:count in dBm"},
          {"axis", Kind::Word, "fd0 or kappa_e"},
          {"param_range", Kind::LogSpan, "log-spaced start:stop:count"},
          {"verify", Kind::Flag, "direct up/down sweeps on boundary cells"},
          {"contour_output", Kind::Word, "path of the contour CSV"}}},
        {"swenson",
         "Swenson cubic branches",
         false,
         {{"a", Kind::Real, "nonlinearity a"},
          {"y0_range", Kind::Span, "start:stop:count"},
          {"direction", Kind::Word, "up, down or both"}}},
        {"duffing",
         "generalized Duffing response at T0",
         true,
         {{"ps", Kind::Power, "probe power"},
          {"y0_range", Kind::Span, "start:stop:count"},
          {"direction", Kind::Word, "up, down or both"}}},
        {"holeburn",
         "hole-burning pull and loss",
         true,
         {{"ps", Kind::Power, "probe power"},
          {"span", Kind::Freq, "half width of the window around f_r0"},
          {"points", Kind::Int, "grid points"},
          {"gamma0", Kind::Real, "TLS damping rad/s, default from fd0_diss and t0"},
          {"kappa_i0", Kind::Real, "background loss rad/s, default from q_bkg"},
          {"kappa_e", Kind::Real, "external rate rad/s, default from kappa_e_over_2pi"},
          {"tol", Kind::Real, "rad/s"},
          {"max_iter", Kind::Int, "iteration cap"}}},
        {"thermal-conductance",
         "Landauer conductance of the support beams",
         false,
         {{"width_w", Kind::Length, "beam width"},
          {"thickness_t", Kind::Length, "beam thickness"},
          {"speed_c", Kind::Real, "sound speed m/s"},
          {"bandgap_center_fb", Kind::Freq, "bandgap center"},
          {"bandgap_width_dfb", Kind::Freq, "bandgap width"},
          {"bandgap", Kind::Flag, "apply the bandgap window"},
          {"n_beams", Kind::Real, "number of beams"},
          {"channel_multiplier", Kind::Real, "channels per mode"},
          {"gap_window", Kind::Word, "half or full"},
          {"t_range", Kind::TempSpan, "start:stop:count"},
          {"x_max", Kind::Real, "upper cutoff in hbar omega / k_B T"},
          {"lm_max", Kind::Int, "band index limit, 0 for automatic"}}},
        {"presets", "list the named parameter presets", false, {}},
    };
    return c;
}

const Command& find_command(const std::string& name) {
    for (const Command& c : commands())
        if (c.name == name) return c;
    throw ConfigError("unknown subcommand " + name);
}

std::optional<Key> find_key(const Command& c, const std::string& name) {
    for (const Key& k : c.keys)
        if (k.name == name) return k;
    if (c.uses_model) {
        for (const Key& k : model_keys())
            if (k.name == name) return k;
        for (const Key& k : tolerance_keys())
            if (k.name == name) return k;
        if (name == "preset") return Key{"preset", Kind::Word, "named preset"};
    }
    return std::nullopt;
}

std::string dashed(std::string s) {
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

// ---------------------------------------------------------------- settings

class Settings {
public:
    explicit Settings(const Command& c) : cmd_(c) {}

    void put(const std::string& key, const std::string& value, const std::string& origin) {
        const auto k = find_key(cmd_, key);
        if (!k) throw ConfigError(origin + ": unknown key '" + key + "' for " + cmd_.name);
        if (!parses(value, k->kind))
            throw ConfigError(origin + ": key '" + key + "': cannot parse '" + trim(value) + "'");
        values_[key] = trim(value);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string word(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    double scalar(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : *to_scalar(it->second, kind(key));
    }
    double required(const std::string& key) const {
        if (!has(key)) throw ConfigError("missing required key '" + key + "' for " + cmd_.name);
        return scalar(key, 0.0);
    }
    long long integer(const std::string& key, long long fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : *to_int(it->second);
    }
    bool flag(const std::string& key, bool fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : *to_flag(it->second);
    }
    std::optional<std::vector<double>> grid(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return expand(*to_span(it->second, kind(key)), kind(key));
    }
    std::vector<double> grid(const std::string& key, const std::string& fallback) const {
        const Kind k = kind(key);
        return expand(*to_span(word(key, fallback), k), k);
    }

private:
    Kind kind(const std::string& key) const { return find_key(cmd_, key)->kind; }

    const Command& cmd_;
    std::map<std::string, std::string> values_;
};

void load_config_file(const std::string& path, Settings& s) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    std::map<std::string, int> seen;
    for (int ln = 1; std::getline(in, line); ++ln) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto sep = line.find_first_of("=:");
        const std::string where = path + ":" + std::to_string(ln);
        if (sep == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, sep));
        std::string value = trim(line.substr(sep + 1));
        // spans contain ':' so only the first separator splits
        if (key.empty() || value.empty()) throw ConfigError(where + ": expected 'key = value'");
        if (seen.count(key))
            throw ConfigError(where + ": key '" + key + "' already set on line " + std::to_string(seen[key]));
        seen[key] = ln;
        s.put(key, value, where);
    }
}

// ---------------------------------------------------------------- model assembly

ModelParams build_model(const ModelParams& base, const Settings& s) {
    ModelParams m = base;
    const auto real = [&](const char* k, double& dst) { dst = s.scalar(k, dst); };
    real("f_r0", m.res.f_r0);
    real("kappa_e_over_2pi", m.res.kappa_e_over_2pi);
    real("q_bkg", m.res.q_bkg);
    real("fd0_reac", m.tls.fd0_reac);
    real("fd0_diss", m.tls.fd0_diss);
    real("n_s", m.tls.n_s);
    real("beta", m.tls.beta);
    real("q_rel_ref", m.tls.q_rel_ref);
    real("d_exp", m.tls.d_exp);
    real("t0", m.th.t0);
    real("n_ch", m.th.n_ch);
    real("gamma", m.th.gamma);
    if (s.has("c_th")) m.th.c_th = s.scalar("c_th", 0.0);
    if (s.has("omega_tls_over_2pi") || s.has("g_over_2pi")) {
        DiscreteTlsParams d = m.disc.value_or(DiscreteTlsParams{});
        d.omega_tls_over_2pi = s.scalar("omega_tls_over_2pi", d.omega_tls_over_2pi);
        d.g_over_2pi = s.scalar("g_over_2pi", d.g_over_2pi);
        m.disc = d;
    }
    if (!s.flag("discrete_tls", true)) m.disc.reset();
    real("phi_rot", m.dcm.phi_rot);
    if (s.has("fixed_q")) m.fixed_q = s.scalar("fixed_q", 0.0);
    m.validate();
    return m;
}

SolverTolerances build_tolerances(const Settings& s) {
    SolverTolerances t = s.flag("precise", false) ? SolverTolerances::precise() : SolverTolerances{};
    t.eps_alpha = s.scalar("eps_alpha", t.eps_alpha);
    t.eps_x = s.scalar("eps_x", t.eps_x);
    t.eps_t = s.scalar("eps_t", t.eps_t);
    t.max_alpha_iter = static_cast<int>(s.integer("max_alpha_iter", t.max_alpha_iter));
    t.max_anderson_iter = static_cast<int>(s.integer("max_anderson_iter", t.max_anderson_iter));
    t.max_mixing_iter = static_cast<int>(s.integer("max_mixing_iter", t.max_mixing_iter));
    t.anderson_depth = static_cast<int>(s.integer("anderson_depth", t.anderson_depth));
    t.mix_beta = s.scalar("mix_beta", t.mix_beta);
    if (!(t.eps_alpha > 0.0 && t.eps_x > 0.0 && t.eps_t > 0.0)) throw ConfigError("tolerances must be positive");
    if (t.max_alpha_iter < 1 || t.max_anderson_iter < 0 || t.max_mixing_iter < 1 || t.anderson_depth < 1)
        throw ConfigError("iteration caps must be positive");
    if (!(t.mix_beta > 0.0 && t.mix_beta <= 1.0)) throw ConfigError("mix_beta must lie in (0, 1]");
    return t;
}

std::vector<SweepDirection> directions(const Settings& s) {
    const std::string d = s.word("direction", "both");
    if (d == "up") return {SweepDirection::Up};
    if (d == "down") return {SweepDirection::Down};
    if (d == "both") return {SweepDirection::Up, SweepDirection::Down};
    throw ConfigError("key 'direction': expected up, down or both, got '" + d + "'");
}

// ---------------------------------------------------------------- output

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(num(v)); }

using Cell = std::variant<double, long long, std::string, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return num(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return jnum(*d);
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    if (const auto* b = std::get_if<bool>(&c)) return *b;
    return std::get<std::string>(c);
}

struct Report {
    json meta = json::object();
    Table table;
    std::optional<Table> contour;
    std::string summary;
    int status = kExitOk;
};

void meta_lines(std::ostream& os, const json& j, const std::string& prefix) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object()) {
            meta_lines(os, *it, key);
        } else if (it->is_array()) {
            os << "# " << key << ":";
            for (const auto& e : *it) os << ' ' << (e.is_string() ? e.get<std::string>() : e.dump());
            os << '\n';
        } else if (it->is_string()) {
            os << "# " << key << ": " << it->get<std::string>() << '\n';
        } else if (it->is_number_float()) {
            os << "# " << key << ": " << num(it->get<double>()) << '\n';
        } else {
            os << "# " << key << ": " << it->dump() << '\n';
        }
    }
}

void write_csv(std::ostream& os, const json& meta, const Table& t) {
    meta_lines(os, meta, "");
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
        os << '\n';
    }
}

json table_json(const Table& t) {
    json records = json::array();
    for (const auto& row : t.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
        records.push_back(std::move(r));
    }
    return {{"columns", t.columns}, {"records", std::move(records)}};
}

void write_json(std::ostream& os, const Report& r) {
    json doc = json::object();
    doc["metadata"] = r.meta;
    const json main = table_json(r.table);
    doc["columns"] = main["columns"];
    doc["records"] = main["records"];
    if (r.contour) doc["contour"] = table_json(*r.contour);
    os << doc.dump(2) << '\n';
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

json versions() {
    json v = json::object();
    v["tlsnl"] = kVersion;
    v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                 std::to_string(BOOST_VERSION % 100);
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    v["cli11"] = CLI11_VERSION;
    v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    return v;
}

json model_echo(const ModelParams& m) {
    json j = json::object();
    j["f_r0"] = jnum(m.res.f_r0);
    j["kappa_e_over_2pi"] = jnum(m.res.kappa_e_over_2pi);
    j["q_bkg"] = jnum(m.res.q_bkg);
    j["fd0_reac"] = jnum(m.tls.fd0_reac);
    j["fd0_diss"] = jnum(m.tls.fd0_diss);
    j["n_s"] = jnum(m.tls.n_s);
    j["beta"] = jnum(m.tls.beta);
    j["q_rel_ref"] = jnum(m.tls.q_rel_ref);
    j["d_exp"] = jnum(m.tls.d_exp);
    j["t0"] = jnum(m.th.t0);
    j["n_ch"] = jnum(m.th.n_ch);
    j["gamma"] = jnum(m.th.gamma);
    j["c_th"] = jnum(heat_capacity(m));
    j["discrete_tls"] = m.disc.has_value();
    if (m.disc) {
        j["omega_tls_over_2pi"] = jnum(m.disc->omega_tls_over_2pi);
        j["g_over_2pi"] = jnum(m.disc->g_over_2pi);
    }
    j["phi_rot"] = jnum(m.dcm.phi_rot);
    j["fixed_q"] = m.fixed_q ? jnum(*m.fixed_q) : json("none");
    return j;
}

json tolerance_echo(const SolverTolerances& t) {
    json j = json::object();
    j["eps_alpha"] = jnum(t.eps_alpha);
    j["eps_x"] = jnum(t.eps_x);
    j["eps_t"] = jnum(t.eps_t);
    j["max_alpha_iter"] = t.max_alpha_iter;
    j["max_anderson_iter"] = t.max_anderson_iter;
    j["max_mixing_iter"] = t.max_mixing_iter;
    j["anderson_depth"] = t.anderson_depth;
    j["mix_beta"] = jnum(t.mix_beta);
    return j;
}

// ---------------------------------------------------------------- commands

struct Context {
    const Command& cmd;
    Settings settings;
    std::string preset;
    ModelParams model;
    SolverTolerances tol;
    unsigned threads = 0;
    std::string output;
};

std::vector<Cell> point_row(const OperatingPoint& p, SweepDirection d) {
    return {p.f_probe, std::string(to_string(d)), p.s11.real(), p.s11.imag(), p.temperature, p.nbar,
            p.q_i,     p.f_r,                     p.y_fractional, p.converged};
}

const std::vector<std::string> kPointColumns{"f_Hz", "direction", "re_s11", "im_s11", "T_K",
                                             "nbar", "Qi",        "fr_Hz",  "y",      "converged"};

// coarse lead-in from 25 low-power linewidths, `points` across the pulled resonance
std::vector<double> frequency_grid(const Context& c, double p_s, long long default_points) {
    if (auto g = c.settings.grid("f_range")) return *g;
    const long long n = c.settings.integer("points", default_points);
    if (n < 3) throw ConfigError("key 'points' must be at least 3");
    const double f_lp = low_power_resonance(c.model);
    const double p_lo = std::min(p_s, dbm_to_watt(-180.0));
    const auto steps = static_cast<std::size_t>(std::ceil(10.0 * std::log10(p_s / p_lo) / 2.0));
    const SweepResult trace = sweep_power(f_lp, expand(Span{p_lo, p_s, steps + 2}, Kind::PowerSpan), c.model, c.tol);
    VerificationOptions opt;
    opt.core_points = static_cast<std::size_t>(n);
    return verification_grid(c.model, trace.points.back(), opt);
}

std::vector<double> oriented(std::vector<double> g, SweepDirection d) {
    std::sort(g.begin(), g.end());
    if (d == SweepDirection::Down) std::reverse(g.begin(), g.end());
    return g;
}

json index_list(const std::vector<std::size_t>& v) {
    json a = json::array();
    for (std::size_t i : v) a.push_back(static_cast<long long>(i));
    return a;
}

Report cmd_sweep_s11(Context& c) {
    const double p_s = c.settings.required("ps");
    const std::vector<double> grid = frequency_grid(c, p_s, 800);
    Report r;
    r.table.columns = kPointColumns;
    r.meta["result"] = json::object();
    std::string summary = "sweep-s11: " + std::to_string(grid.size()) + " points";
    for (SweepDirection d : directions(c.settings)) {
        const SweepResult sw = sweep_frequency(oriented(grid, d), p_s, d, c.model, c.tol);
        for (const OperatingPoint& p : sw.points) r.table.rows.push_back(point_row(p, d));
        const std::string tag = to_string(d);
        r.meta["result"]["jumps_" + tag] = index_list(sw.jump_indices);
        r.meta["result"]["f_s11_min_" + tag] = jnum(sw.f_s11_min);
        summary += ", " + tag + " jumps " + std::to_string(sw.jump_indices.size());
    }
    r.summary = summary;
    return r;
}

Report cmd_power_sweep(Context& c) {
    const double f = c.settings.scalar("f_probe", low_power_resonance(c.model));
    const std::vector<double> pg = c.settings.grid("ps_range", "-180:0:361");
    const SweepResult sw = sweep_power(f, pg, c.model, c.tol);
    Report r;
    r.table.columns = {"ps_dBm", "ps_W", "T_K", "nbar", "Qi", "Q", "fr_Hz", "y", "re_s11", "im_s11", "pd_W",
                       "converged"};
    for (const OperatingPoint& p : sw.points)
        r.table.rows.push_back({watt_to_dbm(p.p_s), p.p_s, p.temperature, p.nbar, p.q_i, p.q_total, p.f_r,
                                p.y_fractional, p.s11.real(), p.s11.imag(), p.p_d, p.converged});
    json regimes = json::array();
    std::string hot;
    for (const RegimeSlopes& s : scaling_exponents(sw.points, c.model)) {
        json e = json::object();
        e["regime"] = to_string(s.regime);
        e["count"] = static_cast<long long>(s.count);
        e["p_lo_W"] = jnum(s.p_lo);
        e["p_hi_W"] = jnum(s.p_hi);
        e["slope_T"] = jnum(s.temperature);
        e["slope_dT"] = jnum(s.delta_t);
        e["slope_nbar"] = jnum(s.nbar);
        e["slope_kappa_i"] = jnum(s.kappa_i);
        e["slope_pd"] = jnum(s.p_d);
        regimes.push_back(e);
        if (s.regime == PowerRegime::Hot && s.count >= 2)
            hot = ", hot slopes T " + num(std::round(s.temperature * 1e3) / 1e3) + " nbar " +
                  num(std::round(s.nbar * 1e3) / 1e3) + " kappa_i " + num(std::round(s.kappa_i * 1e3) / 1e3);
    }
    r.meta["result"]["f_probe_Hz"] = jnum(f);
    r.meta["result"]["regimes"] = regimes;
    r.summary = "power-sweep: " + std::to_string(sw.points.size()) + " points" + hot;
    return r;
}

Report cmd_ringdown(Context& c) {
    const double p_s = c.settings.required("ps");
    const double f = c.settings.scalar("f_probe", low_power_resonance(c.model));
    const std::string mode = c.settings.word("mode", "ringdown");
    if (mode != "ringdown" && mode != "ringup") throw ConfigError("key 'mode': expected ringdown or ringup");
    IntegrationControl ctrl;
    ctrl.n_samples = static_cast<int>(c.settings.integer("samples", 400));
    if (ctrl.n_samples < 2) throw ConfigError("key 'samples' must be at least 2");

    const DriveCondition on{f, p_s, SweepDirection::Fixed};
    DynamicState start{0.0, c.model.th.t0, 0.0};
    DriveCondition drive = on;
    if (mode == "ringdown") {
        start = relax_to_steady(start, on, c.model);
        start.t = 0.0;
        drive.p_s = 0.0;
    }
    // the slowest of the heated and cold ring times, or the thermal time
    const double kappa_lp = 2.0 * kPi * low_power_resonance(c.model) / low_power_q(c.model);
    const double kappa = std::min(kappa_lp, instantaneous_rates(start.temperature, start.n, on, c.model).kappa);
    const double tau_th = heat_capacity(c.model) / c.model.th.g_th0();
    const double t_end = c.settings.scalar("t_end", 10.0 * std::max(2.0 / kappa, tau_th));
    if (!(t_end > 0.0)) throw ConfigError("key 't_end' must be positive");
    const Trajectory tr = integrate_tn(start, drive, c.model, t_end, ctrl);
    Report r;
    r.table.columns = {"t_s", "T_K", "n", "re_s11", "im_s11"};
    for (const TrajectorySample& s : tr.samples)
        r.table.rows.push_back({s.t, s.temperature, s.n, s.s11.real(), s.s11.imag()});
    r.meta["result"]["initial_T_K"] = jnum(start.temperature);
    r.meta["result"]["initial_n"] = jnum(start.n);
    r.meta["result"]["steps"] = tr.steps;
    r.meta["result"]["rejected"] = tr.rejected;
    r.summary = mode + ": " + std::to_string(tr.samples.size()) + " samples over " + num(t_end) + " s, final T " +
                num(tr.final_state.temperature) + " K";
    return r;
}

Report cmd_sweep_dynamic(Context& c) {
    const double p_s = c.settings.required("ps");
    const std::vector<double> grid = frequency_grid(c, p_s, 200);
    DynamicSweepOptions opt;
    opt.if_bandwidth = c.settings.scalar("if_bw", opt.if_bandwidth);
    opt.if_k = c.settings.scalar("if_k", opt.if_k);
    if (!(opt.if_bandwidth > 0.0 && opt.if_k > 0.0)) throw ConfigError("IF bandwidth and factor must be positive");
    opt.t_meas = c.settings.scalar("t_meas", 3.0 * opt.if_k / opt.if_bandwidth);
    Report r;
    r.table.columns = kPointColumns;
    r.meta["result"]["if_q_threshold"] = jnum(if_q_threshold(low_power_resonance(c.model), opt.if_bandwidth, opt.if_k));
    r.meta["result"]["t_meas_s"] = jnum(opt.t_meas);
    std::string summary = "sweep-dynamic: " + std::to_string(grid.size()) + " points";
    for (SweepDirection d : directions(c.settings)) {
        const SweepResult sw = swept_response_dynamic(oriented(grid, d), p_s, d, c.model, opt);
        for (const OperatingPoint& p : sw.points) r.table.rows.push_back(point_row(p, d));
        const std::string tag = to_string(d);
        r.meta["result"]["jumps_" + tag] = index_list(sw.jump_indices);
        summary += ", " + tag + " jumps " + std::to_string(sw.jump_indices.size());
    }
    r.summary = summary;
    return r;
}

Report cmd_phase_diagram(Context& c) {
    const std::string axis_name = c.settings.word("axis", "fd0");
    PhaseAxis axis;
    std::string fallback;
    if (axis_name == "fd0") {
        axis = PhaseAxis::LossTangent;
        fallback = "1.2589254117941673e-08:1e-4:40";
    } else if (axis_name == "kappa_e") {
        axis = PhaseAxis::KappaE;
        fallback = "1:1000:31";
    } else {
        throw ConfigError("key 'axis': expected fd0 or kappa_e, got '" + axis_name + "'");
    }
    const std::vector<double> ps = c.settings.grid("ps_range", "-180:-62:60");
    const std::vector<double> params = c.settings.grid("param_range", fallback);
    PhaseScanOptions opt;
    opt.tol = c.tol;
    opt.threads = c.threads;
    const PhaseGrid grid = phase_scan(ps, params, axis, c.model, opt);
    const BistabilityMap map = bistability_contour(grid);

    std::map<std::pair<std::size_t, std::size_t>, bool> checked;
    if (c.settings.flag("verify", false)) {
        for (const HysteresisCheck& h : verify_bistability(grid, map, c.model, boundary_cells(grid, map)))
            checked[{h.i_param, h.i_ps}] = h.hysteretic;
    }

    Report r;
    const std::string pcol = axis == PhaseAxis::LossTangent ? "fd0" : "kappa_e_over_2pi_Hz";
    r.table.columns = {pcol, "ps_dBm", "ps_W", "f_probe_Hz", "T_K", "nbar", "Qi", "y", "flagged", "verified",
                       "converged"};
    std::size_t flagged = 0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            const OperatingPoint& p = grid.at(i, j);
            const bool f = map.flags[i * ps.size() + j] != 0;
            flagged += f ? 1 : 0;
            std::string v = "-";
            if (const auto it = checked.find({i, j}); it != checked.end()) {
                v = it->second ? "hysteretic" : "single";
                agree += it->second == f ? 1 : 0;
            }
            r.table.rows.push_back({params[i], watt_to_dbm(ps[j]), ps[j], grid.f_probe[i], p.temperature, p.nbar,
                                    p.q_i, p.y_fractional, f, v, p.converged});
        }
    }
    Table contour;
    contour.columns = {pcol, "ps_dBm", "ps_W"};
    for (const ContourPoint& q : map.contour) contour.rows.push_back({q.param, watt_to_dbm(q.p_s), q.p_s});
    r.contour = contour;
    r.meta["result"]["threshold_abs_y"] = jnum(map.threshold);
    r.meta["result"]["flagged_cells"] = static_cast<long long>(flagged);
    r.meta["result"]["failures"] = grid.failures;
    if (!checked.empty()) {
        r.meta["result"]["verified_cells"] = static_cast<long long>(checked.size());
        r.meta["result"]["verified_agreeing"] = static_cast<long long>(agree);
    }
    r.summary = "phase-diagram: " + std::to_string(params.size()) + " x " + std::to_string(ps.size()) + " cells, " +
                std::to_string(flagged) + " flagged, " + std::to_string(grid.failures.size()) + " failed";
    if (!checked.empty())
        r.summary += ", verification agrees on " + std::to_string(agree) + "/" + std::to_string(checked.size());
    if (!grid.failures.empty()) r.status = kExitSolver;
    return r;
}

Report cmd_swenson(Context& c) {
    const double a = c.settings.scalar("a", 0.0);
    const std::vector<double> y0 = c.settings.grid("y0_range", "-3:3:601");
    Report r;
    r.table.columns = {"y0", "direction", "y", "real_roots"};
    std::string summary = "swenson: a = " + num(a);
    for (SweepDirection d : directions(c.settings)) {
        const std::vector<double> g = oriented(y0, d);
        const BranchTrace bt = swenson_branch(g, a, d);
        for (std::size_t i = 0; i < g.size(); ++i)
            r.table.rows.push_back({g[i], std::string(to_string(d)), bt.y[i],
                                    static_cast<long long>(swenson_real_root_count({g[i], a}))});
        r.meta["result"][std::string("jumps_") + to_string(d)] = index_list(bt.jump_indices);
        summary += ", " + std::string(to_string(d)) + " jumps " + std::to_string(bt.jump_indices.size());
    }
    r.meta["result"]["a_critical"] = jnum(swenson_a_critical());
    if (const auto fp = swenson_fold_points(a)) {
        r.meta["result"]["fold_lo"] = jnum(fp->first);
        r.meta["result"]["fold_hi"] = jnum(fp->second);
    }
    r.summary = summary;
    return r;
}

Report cmd_duffing(Context& c) {
    const double p_s = c.settings.required("ps");
    const std::vector<double> y0 = c.settings.grid("y0_range", "-3:3:601");
    const ModelParams& m = c.model;
    const DuffingScales sc = duffing_scales(m.th.t0, m.res, m.tls, m.th);
    const double q = low_power_q(m);
    const double q_e = m.res.q_e();
    const double a_star = duffing_a_star(q, p_s, 2.0 * kPi * low_power_resonance(m), q_e, sc.n_star);
    Report r;
    r.table.columns = {"y0", "direction", "k", "re_s11", "im_s11"};
    std::string summary = "duffing: a* = " + num(a_star) + ", phi_nl = " + num(sc.phi_nl);
    for (SweepDirection d : directions(c.settings)) {
        const std::vector<double> g = oriented(y0, d);
        const DuffingTrace tr = duffing_branch(g, a_star, sc, q, q_e);
        for (std::size_t i = 0; i < g.size(); ++i)
            r.table.rows.push_back({g[i], std::string(to_string(d)), tr.k[i], tr.s11[i].real(), tr.s11[i].imag()});
        r.meta["result"][std::string("jumps_") + to_string(d)] = index_list(tr.jump_indices);
    }
    r.meta["result"]["a_star"] = jnum(a_star);
    r.meta["result"]["phi_nl"] = jnum(sc.phi_nl);
    r.meta["result"]["bifurcation_factor"] = jnum(bifurcation_factor(sc.phi_nl));
    r.meta["result"]["t_star_K"] = jnum(sc.t_star);
    r.meta["result"]["n_star"] = jnum(sc.n_star);
    r.meta["result"]["q"] = jnum(q);
    r.summary = summary;
    return r;
}

Report cmd_holeburn(Context& c) {
    const ModelParams& m = c.model;
    if (!m.disc) throw ConfigError("holeburn needs g_over_2pi");
    const double p_s = c.settings.required("ps");
    const double omega_r0 = 2.0 * kPi * m.res.f_r0;
    HoleburnParams hp;
    hp.g_over_2pi = m.disc->g_over_2pi;
    hp.n_s = m.tls.n_s;
    hp.gamma0 = c.settings.scalar("gamma0", holeburn_gamma0(omega_r0, m.tls.fd0_diss, m.th.t0));
    hp.kappa_i0 = c.settings.scalar("kappa_i0", std::isfinite(m.res.q_bkg) ? omega_r0 / m.res.q_bkg : 0.0);
    hp.kappa_e = c.settings.scalar("kappa_e", 2.0 * kPi * m.res.kappa_e_over_2pi);
    hp.validate();
    HoleburnOptions opt;
    opt.tol = c.settings.scalar("tol", opt.tol);
    opt.max_iter = static_cast<int>(c.settings.integer("max_iter", opt.max_iter));
    const double span = c.settings.scalar("span", 5e3);
    const long long n = c.settings.integer("points", 201);
    if (!(span > 0.0) || n < 2) throw ConfigError("holeburn needs a positive span and at least 2 points");
    const std::vector<double> grid = expand(Span{m.res.f_r0 - span, m.res.f_r0 + span, static_cast<std::size_t>(n)}, Kind::Freq);
    const std::vector<HoleburnPoint> pts = holeburn_selfconsistent(grid, p_s, hp, omega_r0, opt);
    Report r;
    r.table.columns = {"f_Hz", "delta_rad_s", "dw_rad_s", "kappa_i_rad_s", "nbar", "iterations"};
    double max_shift = 0.0;
    for (const HoleburnPoint& p : pts) {
        r.table.rows.push_back({p.f_probe, p.delta, p.delta_omega_r, p.kappa_i, p.nbar,
                                static_cast<long long>(p.iterations)});
        max_shift = std::max(max_shift, std::fabs(p.delta_omega_r) / (2.0 * kPi));
    }
    const double pc = holeburn_critical_power(hp, omega_r0);
    r.meta["result"]["gamma0_rad_s"] = jnum(hp.gamma0);
    r.meta["result"]["gamma2_rad_s"] = jnum(hp.gamma2());
    r.meta["result"]["critical_power_W"] = jnum(pc);
    r.meta["result"]["critical_power_dBm"] = jnum(watt_to_dbm(pc));
    r.meta["result"]["max_pull_Hz"] = jnum(holeburn_max_pull(hp) / (2.0 * kPi));
    r.meta["result"]["max_shift_Hz"] = jnum(max_shift);
    r.summary = "holeburn: max |shift| " + num(max_shift) + " Hz, P_s^c " + num(watt_to_dbm(pc)) + " dBm";
    return r;
}

Report cmd_thermal(Context& c) {
    const Settings& s = c.settings;
    BeamGeometry g;
    g.width_w = s.scalar("width_w", 3.9e-6);
    g.thickness_t = s.scalar("thickness_t", 1e-6);
    g.speed_c = s.scalar("speed_c", 4000.0);
    if (s.flag("bandgap", true)) {
        g.bandgap_center_fb = s.scalar("bandgap_center_fb", 530e6);
        g.bandgap_width_dfb = s.scalar("bandgap_width_dfb", 170e6);
    }
    g.n_beams = s.scalar("n_beams", 1.0);
    g.channel_multiplier = s.scalar("channel_multiplier", 1.0);
    const std::string win = s.word("gap_window", "full");
    if (win == "half")
        g.gap_window = GapWindow::HalfWidth;
    else if (win == "full")
        g.gap_window = GapWindow::FullWidth;
    else
        throw ConfigError("key 'gap_window': expected half or full, got '" + win + "'");
    g.validate();
    LandauerOptions lo;
    lo.x_max = s.scalar("x_max", lo.x_max);
    lo.lm_max = static_cast<int>(s.integer("lm_max", lo.lm_max));
    const std::vector<double> ts = s.grid("t_range", "25mK:200mK:36");
    Report r;
    r.table.columns = {"T_K", "G_W_per_K", "gamma", "bands", "truncation_warning"};
    std::vector<double> G;
    for (double T : ts) {
        const LandauerResult lr = landauer_detail(g, T, lo);
        G.push_back(lr.conductance);
        r.table.rows.push_back({T, lr.conductance, gamma_exponent(g, T, lo), static_cast<long long>(lr.bands),
                                lr.truncation_warning});
    }
    r.meta["result"]["t_1d_K"] = jnum(one_dimensional_crossover(g.width_w, g.speed_c));
    std::string fit;
    if (ts.size() >= 2) {
        const PowerLawFit pf = fit_power_law(ts, G);
        r.meta["result"]["fit_prefactor_W_per_K"] = jnum(pf.prefactor);
        r.meta["result"]["fit_exponent"] = jnum(pf.exponent);
        fit = ", fit G = " + num(pf.prefactor) + " T^" + num(pf.exponent);
    }
    r.summary = "thermal-conductance: " + std::to_string(ts.size()) + " temperatures" + fit;
    return r;
}

Report cmd_presets(Context& c) {
    Report r;
    r.table.columns = {"preset", "description", "f_r0", "kappa_e_over_2pi", "q_bkg", "fd0_reac", "fd0_diss",
                       "n_s", "beta", "q_rel_ref", "d_exp", "t0", "n_ch", "gamma", "omega_tls_over_2pi",
                       "g_over_2pi"};
    std::vector<Preset> list = all_presets();
    if (!c.preset.empty()) list = {preset_by_name(c.preset)};
    for (const Preset& p : list) {
        const ModelParams& m = p.model;
        r.table.rows.push_back({p.name, p.description, m.res.f_r0, m.res.kappa_e_over_2pi, m.res.q_bkg,
                                m.tls.fd0_reac, m.tls.fd0_diss, m.tls.n_s, m.tls.beta, m.tls.q_rel_ref,
                                m.tls.d_exp, m.th.t0, m.th.n_ch, m.th.gamma,
                                m.disc ? m.disc->omega_tls_over_2pi : 0.0, m.disc ? m.disc->g_over_2pi : 0.0});
    }
    r.summary = "presets: " + std::to_string(list.size()) + " listed";
    return r;
}

Report dispatch(Context& c) {
    const std::string& n = c.cmd.name;
    if (n == "sweep-s11") return cmd_sweep_s11(c);
    if (n == "power-sweep") return cmd_power_sweep(c);
    if (n == "ringdown") return cmd_ringdown(c);
    if (n == "sweep-dynamic") return cmd_sweep_dynamic(c);
    if (n == "phase-diagram") return cmd_phase_diagram(c);
    if (n == "swenson") return cmd_swenson(c);
    if (n == "duffing") return cmd_duffing(c);
    if (n == "holeburn") return cmd_holeburn(c);
    if (n == "thermal-conductance") return cmd_thermal(c);
    return cmd_presets(c);
}

std::string contour_path(const Context& c) {
    if (c.settings.has("contour_output")) return c.settings.word("contour_output", "");
    if (c.output.empty()) return "";
    const auto dot = c.output.find_last_of('.');
    const auto slash = c.output.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return c.output + "_contour.csv";
    return c.output.substr(0, dot) + "_contour.csv";
}

void emit(const Context& c, const Report& r, const std::string& format, std::ostream& out) {
    std::ofstream file;
    if (!c.output.empty()) {
        file.open(c.output);
        if (!file) throw ConfigError("cannot open output file " + c.output);
    }
    std::ostream& os = c.output.empty() ? out : file;
    if (format == "json") {
        write_json(os, r);
        return;
    }
    write_csv(os, r.meta, r.table);
    if (!r.contour) return;
    json cmeta = r.meta;
    cmeta["table"] = "contour";
    const std::string path = contour_path(c);
    if (path.empty()) {
        os << '\n';
        write_csv(os, cmeta, *r.contour);
        return;
    }
    std::ofstream cf(path);
    if (!cf) throw ConfigError("cannot open contour file " + path);
    write_csv(cf, cmeta, *r.contour);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"tlsnl: nonlinear response of a resonator coupled to a heated TLS bath"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::vector<std::string> sets;
    std::string output;
    std::string format = "csv";
    std::string preset;
    unsigned threads = 0;
    app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--set", sets, "override key=value")->allow_extra_args(false);
    app.add_option("--output", output, "output path, stdout when absent");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--preset", preset, "named parameter preset");
    app.add_option("--threads", threads, "worker threads, 0 for all cores");

    // flag values keyed by config name, in the order the subcommand declares them
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> flag_values;
    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, CLI::App*> subs;
    for (const Command& cmd : commands()) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        subs[cmd.name] = sub;
        std::vector<Key> keys = cmd.keys;
        if (cmd.uses_model) {
            keys.insert(keys.end(), model_keys().begin(), model_keys().end());
            keys.insert(keys.end(), tolerance_keys().begin(), tolerance_keys().end());
        }
        for (const Key& k : keys) sub->add_option("--" + dashed(k.name), raw[cmd.name][k.name], k.help);
    }

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    const Command* cmd = nullptr;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) cmd = &find_command(name);

    try {
        Context c{*cmd, Settings(*cmd), "", {}, {}, threads, output};
        if (!config_path.empty()) load_config_file(config_path, c.settings);
        for (const std::string& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set '" + kv + "': expected key=value");
            c.settings.put(trim(kv.substr(0, eq)), kv.substr(eq + 1), "--set");
        }
        for (const auto& [key, value] : raw[cmd->name]) {
            if (subs[cmd->name]->count("--" + dashed(key)) > 0) c.settings.put(key, value, "--" + dashed(key));
        }
        c.preset = preset.empty() ? c.settings.word("preset", cmd->uses_model ? "fig2" : "") : preset;

        json meta = json::object();
        meta["command"] = cmd->name;
        meta["versions"] = versions();
        std::string canonical = cmd->name + "\n";
        if (cmd->uses_model) {
            c.model = build_model(preset_by_name(c.preset).model, c.settings);
            c.tol = build_tolerances(c.settings);
            meta["preset"] = c.preset;
            meta["parameters"] = model_echo(c.model);
            meta["tolerances"] = tolerance_echo(c.tol);
            canonical += "preset=" + c.preset + "\n" + meta["parameters"].dump() + "\n" + meta["tolerances"].dump() + "\n";
        } else if (cmd->name == "presets" && !c.preset.empty()) {
            meta["preset"] = c.preset;
        }
        json settings = json::object();
        for (const auto& [k, v] : c.settings.values()) {
            bool model_key = k == "preset";
            for (const Key& mk : model_keys()) model_key = model_key || mk.name == k;
            for (const Key& tk : tolerance_keys()) model_key = model_key || tk.name == k;
            if (model_key) continue;
            settings[k] = v;
            canonical += k + "=" + v + "\n";
        }
        meta["settings"] = settings;
        meta["config_hash"] = "fnv1a64:" + hex(fnv1a(canonical));

        Report r = dispatch(c);
        json full = meta;
        for (auto it = r.meta.begin(); it != r.meta.end(); ++it) full[it.key()] = *it;
        r.meta = full;
        emit(c, r, format, out);
        err << r.summary << '\n';
        return r.status;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ValidationError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        err << "solver error: " << e.what() << " (last residual " << num(e.last_residual()) << ")\n";
        return kExitSolver;
    } catch (const StiffnessError& e) {
        err << "solver error: " << e.what() << " at t = " << num(e.time()) << " s, dt = " << num(e.step()) << " s\n";
        return kExitSolver;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace tlsnl::cli
