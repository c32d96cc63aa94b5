#include "tbell/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "tbell/error.hpp"

namespace tbell {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k = {
            "mode", "model", "n_runs", "seed", "workers", "chunk_size", "disturbance",
            "significance", "format", "output.dir", "output.log_runs", "state.s", "state.phi",
            "prep.setting", "prep.sign", "two_series.runs_per_series", "search.objective",
            "search.n_starts", "search.step_tolerance", "search.max_iterations", "search.seed",
            "search.grid_resolution", "search.from_reference_point"};
        for (const char* base : {"directions.a", "directions.b", "directions.c", "state.e"})
            for (const char* leaf : {"theta", "phi", "x", "y", "z"})
                k.insert(std::string(base) + "." + leaf);
        for (std::size_t i = 0; i < 8; ++i)
            k.insert("lhv.weight." + HiddenTriple::from_index(i).name());
        return k;
    }();
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw Error(ErrorCode::parse, "bad value '" + value + "' for key '" + key + "'");
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || !std::isfinite(out)) bad_value(key, v);
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) bad_value(key, v);
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, v);
}

Outcome to_sign(const std::string& key, const std::string& v) {
    if (v == "+1" || v == "1" || v == "+") return Outcome::plus;
    if (v == "-1" || v == "-") return Outcome::minus;
    bad_value(key, v);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Entries = std::map<std::string, std::string>;

const std::string* find(const Entries& e, const std::string& key) {
    auto it = e.find(key);
    return it == e.end() ? nullptr : &it->second;
}

Direction read_direction(const Entries& e, const std::string& base, const Direction& fallback) {
    const auto* th = find(e, base + ".theta");
    const auto* ph = find(e, base + ".phi");
    const auto* x = find(e, base + ".x");
    const auto* y = find(e, base + ".y");
    const auto* z = find(e, base + ".z");
    const bool angles = th || ph;
    const bool xyz = x || y || z;
    if (angles && xyz)
        throw_invalid(base + ": give either theta/phi or x/y/z, not both");
    if (angles) {
        if (!th) throw_invalid(base + ".theta is required with " + base + ".phi");
        return direction_from_spherical(to_double(base + ".theta", *th),
                                        ph ? to_double(base + ".phi", *ph) : 0.0);
    }
    if (xyz) {
        if (!x || !y || !z) throw_invalid(base + ": x, y and z are all required");
        return Direction::from_xyz(to_double(base + ".x", *x), to_double(base + ".y", *y),
                                   to_double(base + ".z", *z));
    }
    return fallback;
}

void write_direction(std::ostringstream& out, const std::string& base, const Direction& d) {
    out << base << ".x = " << fmt_double(d.x()) << '\n'
        << base << ".y = " << fmt_double(d.y()) << '\n'
        << base << ".z = " << fmt_double(d.z()) << '\n';
}

}  // namespace

std::string_view format_name(ReportFormat f) {
    return f == ReportFormat::tabular ? "tabular" : "structured";
}

ReportFormat parse_format(std::string_view text) {
    if (text == "tabular") return ReportFormat::tabular;
    if (text == "structured") return ReportFormat::structured;
    throw_invalid("unknown format '" + std::string(text) + "' (expected tabular or structured)");
}

ProtocolConfig ExperimentConfig::default_protocol() {
    ProtocolConfig p;
    p.directions = reference_configuration(Objective::eq16).directions();
    return p;
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
    ConfigDocument doc;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::parse, "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (doc.entries_.count(key))
            throw Error(ErrorCode::parse, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        if (!known_keys().count(key))
            throw Error(ErrorCode::parse, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        doc.entries_[key] = value;
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void ConfigDocument::set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw Error(ErrorCode::parse, "unknown key '" + key + "'");
    const auto dot = key.rfind('.');
    if (dot != std::string::npos) {
        const std::string base = key.substr(0, dot);
        const std::string leaf = key.substr(dot + 1);
        if (base.rfind("directions.", 0) == 0 || base == "state.e") {
            static const std::vector<std::string> xyz{"x", "y", "z"}, angles{"theta", "phi"};
            const bool angle = leaf == "theta" || leaf == "phi";
            for (const std::string& other : angle ? xyz : angles) entries_.erase(base + "." + other);
        }
    }
    entries_[key] = value;
}

ExperimentConfig build_config(const ConfigDocument& doc) {
    const Entries& e = doc.entries();
    ExperimentConfig cfg;
    ProtocolConfig& p = cfg.protocol;
    SearchConfig& s = cfg.search;

    if (auto v = find(e, "mode")) p.mode = parse_mode(*v);
    if (auto v = find(e, "model")) p.model = parse_model(*v);
    if (auto v = find(e, "n_runs")) p.n_runs = to_u64("n_runs", *v);
    if (auto v = find(e, "seed")) p.seed = to_u64("seed", *v);
    if (auto v = find(e, "workers")) p.workers = static_cast<unsigned>(to_u64("workers", *v));
    if (auto v = find(e, "chunk_size")) p.chunk_size = to_u64("chunk_size", *v);
    if (auto v = find(e, "disturbance")) p.disturbance = parse_disturbance(*v);
    if (auto v = find(e, "two_series.runs_per_series"))
        p.runs_per_series = to_u64("two_series.runs_per_series", *v);
    if (auto v = find(e, "prep.setting")) p.prep.setting = parse_setting(*v);
    if (auto v = find(e, "prep.sign")) p.prep.sign = to_sign("prep.sign", *v);

    p.directions.a = read_direction(e, "directions.a", p.directions.a);
    p.directions.b = read_direction(e, "directions.b", p.directions.b);
    p.directions.c = read_direction(e, "directions.c", p.directions.c);

    {
        const Direction axis = read_direction(e, "state.e", Direction());
        const auto* sv = find(e, "state.s");
        const auto* pv = find(e, "state.phi");
        p.initial_state = PureState(sv ? to_double("state.s", *sv) : 1.0,
                                    pv ? to_double("state.phi", *pv) : 0.0, axis);
    }

    bool any_weight = false;
    std::array<double, 8> w{};
    for (std::size_t i = 0; i < 8; ++i) {
        const std::string key = "lhv.weight." + HiddenTriple::from_index(i).name();
        if (auto v = find(e, key)) {
            w[i] = to_double(key, *v);
            any_weight = true;
        }
    }
    if (any_weight) p.distribution = TripleDistribution(w);

    if (auto v = find(e, "significance")) cfg.significance = to_double("significance", *v);
    if (!(cfg.significance > 0.0)) throw_invalid("significance must be > 0");
    if (auto v = find(e, "format")) cfg.format = parse_format(*v);
    if (auto v = find(e, "output.dir")) cfg.out_dir = *v;
    if (auto v = find(e, "output.log_runs")) cfg.log_runs = to_bool("output.log_runs", *v);
    p.keep_records = cfg.log_runs;

    if (auto v = find(e, "search.objective")) s.objective = parse_objective(*v);
    if (auto v = find(e, "search.n_starts"))
        s.n_starts = static_cast<std::uint32_t>(to_u64("search.n_starts", *v));
    if (auto v = find(e, "search.step_tolerance"))
        s.step_tolerance = to_double("search.step_tolerance", *v);
    if (auto v = find(e, "search.max_iterations"))
        s.max_iterations = to_u64("search.max_iterations", *v);
    s.seed = p.seed;
    if (auto v = find(e, "search.seed")) s.seed = to_u64("search.seed", *v);
    s.workers = p.workers;
    if (auto v = find(e, "search.grid_resolution"))
        cfg.grid_resolution = to_double("search.grid_resolution", *v);
    if (!(cfg.grid_resolution >= 0.005)) throw_invalid("search.grid_resolution must be >= 0.005");
    if (auto v = find(e, "search.from_reference_point"))
        cfg.from_reference_point = to_bool("search.from_reference_point", *v);
    if (cfg.from_reference_point) s.starts = {reference_configuration(s.objective)};

    validate(p);
    validate(s);
    return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
    return build_config(ConfigDocument::parse(text));
}

std::string serialize_config(const ExperimentConfig& c) {
    const ProtocolConfig& p = c.protocol;
    std::ostringstream out;
    out << "mode = " << mode_name(p.mode) << '\n'
        << "model = " << model_name(p.model) << '\n'
        << "n_runs = " << p.n_runs << '\n'
        << "seed = " << p.seed << '\n'
        << "workers = " << p.workers << '\n'
        << "chunk_size = " << p.chunk_size << '\n'
        << "disturbance = " << disturbance_name(p.disturbance) << '\n'
        << "significance = " << fmt_double(c.significance) << '\n'
        << "format = " << format_name(c.format) << '\n'
        << "output.dir = " << c.out_dir << '\n'
        << "output.log_runs = " << (c.log_runs ? "true" : "false") << '\n';
    write_direction(out, "directions.a", p.directions.a);
    write_direction(out, "directions.b", p.directions.b);
    write_direction(out, "directions.c", p.directions.c);
    out << "state.s = " << fmt_double(p.initial_state.s()) << '\n'
        << "state.phi = " << fmt_double(p.initial_state.phi()) << '\n';
    write_direction(out, "state.e", p.initial_state.axis());
    out << "prep.setting = " << setting_name(p.prep.setting) << '\n'
        << "prep.sign = " << (p.prep.sign == Outcome::plus ? "+1" : "-1") << '\n';
    for (std::size_t i = 0; i < 8; ++i)
        out << "lhv.weight." << HiddenTriple::from_index(i).name() << " = "
            << fmt_double(p.distribution.weights()[i]) << '\n';
    out << "two_series.runs_per_series = " << p.runs_per_series << '\n'
        << "search.objective = " << (c.search.objective == Objective::eq16 ? "eq16" : "eq18") << '\n'
        << "search.n_starts = " << c.search.n_starts << '\n'
        << "search.step_tolerance = " << fmt_double(c.search.step_tolerance) << '\n'
        << "search.max_iterations = " << c.search.max_iterations << '\n'
        << "search.seed = " << c.search.seed << '\n'
        << "search.grid_resolution = " << fmt_double(c.grid_resolution) << '\n'
        << "search.from_reference_point = " << (c.from_reference_point ? "true" : "false") << '\n';
    return out.str();
}

std::string config_digest(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.protocol.workers = 1;
    c.search.workers = 1;
    c.format = ReportFormat::tabular;
    c.out_dir.clear();
    c.log_runs = false;
    c.protocol.keep_records = false;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace tbell
