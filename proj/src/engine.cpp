#include "tbell/engine.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "parallel.hpp"
#include "tbell/error.hpp"

namespace tbell {

namespace {

constexpr std::uint64_t kLowStats = 10;

// Stream tags. Disturbance streams are offset so that the disturbance model
// never perturbs the run streams.
constexpr std::uint64_t kTagSingle = 0;
constexpr std::uint64_t kTagPlus = 1;
constexpr std::uint64_t kTagMinus = 2;
constexpr std::uint64_t kTagDisturbanceOffset = 100;

const char* outcome_text(Outcome o) { return o == Outcome::plus ? "+1" : "-1"; }

Outcome parse_outcome(const std::string& s) {
    if (s == "+1" || s == "1") return Outcome::plus;
    if (s == "-1") return Outcome::minus;
    throw Error(ErrorCode::parse, "bad outcome '" + s + "'");
}

// Everything a chunk needs, derived once from the config.
struct RunContext {
    const ProtocolConfig& config;
    PureState prepared_state;
    std::optional<TripleDistribution> prepared_population;
};

PreparedRun prepared_run_with(const RunContext& ctx, RandomStream& rng, RandomStream* drng) {
    const ProtocolConfig& cfg = ctx.config;
    const SettingPair pair = draw_setting_pair(rng);
    PreparedRun out;
    if (cfg.model == Model::quantum) {
        out.record = execute_run_quantum(ctx.prepared_state, cfg.directions, pair, rng);
    } else {
        LhvRun r = execute_run_lhv(*ctx.prepared_population, pair, cfg.disturbance, rng, drng);
        out.record = r.record;
        out.between = r.between;
    }
    out.record.prep = cfg.prep;
    return out;
}

RunContext make_context(const ProtocolConfig& cfg) {
    RunContext ctx{cfg, cfg.initial_state, std::nullopt};
    if (cfg.mode == Mode::prepared) {
        ctx.prepared_state = eigenstate(cfg.directions[cfg.prep.setting], cfg.prep.sign);
        if (cfg.model == Model::lhv)
            ctx.prepared_population = cfg.distribution.conditioned(cfg.prep.setting, cfg.prep.sign);
    }
    return ctx;
}

struct ChunkResult {
    RunCountTable table;
    HiddenCountTable hidden;
    SeriesTable series;
    std::vector<RunRecord> records;
};

void run_single_chunk(const RunContext& ctx, std::uint64_t begin, std::uint64_t end,
                      RandomStream& rng, RandomStream& drng, ChunkResult& out) {
    const ProtocolConfig& cfg = ctx.config;
    for (std::uint64_t id = begin; id < end; ++id) {
        RunRecord rec;
        if (cfg.mode == Mode::prepared) {
            PreparedRun pr = prepared_run_with(ctx, rng, &drng);
            rec = pr.record;
            if (pr.between) out.hidden.add(*pr.between);
        } else if (cfg.model == Model::quantum) {
            rec = execute_run_quantum(cfg.initial_state, cfg.directions, draw_setting_pair(rng), rng);
        } else {
            LhvRun r = execute_run_lhv(cfg.distribution, draw_setting_pair(rng), cfg.disturbance,
                                       rng, &drng);
            rec = r.record;
            out.hidden.add(r.between);
        }
        rec.run_id = id;
        out.table.add(rec);
        if (cfg.keep_records) out.records.push_back(rec);
    }
}

void run_series_chunk(const RunContext& ctx, Outcome retained, std::uint64_t begin,
                      std::uint64_t end, RandomStream& rng, RandomStream& drng, ChunkResult& out) {
    const ProtocolConfig& cfg = ctx.config;
    out.series.retained_sign = retained;
    for (std::uint64_t id = begin; id < end; ++id) {
        const SettingPair pair = draw_setting_pair(rng);
        const Direction& x = cfg.directions[pair.first];
        const Direction& y = cfg.directions[pair.second];
        RunRecord rec;
        rec.run_id = id;
        rec.first_setting = pair.first;
        rec.second_setting = pair.second;
        if (cfg.model == Model::quantum) {
            const Measurement m1 = measure(cfg.initial_state, x, rng);
            if (m1.outcome != retained) {
                ++out.series.discarded[3 * index_of(pair.first) + index_of(pair.second)];
                continue;
            }
            rec.first_outcome = m1.outcome;
            rec.second_outcome = measure(m1.state, y, rng).outcome;
        } else {
            const HiddenTriple t = sample_triple(cfg.distribution, rng);
            rec.first_outcome = lhv_read(t, pair.first);
            if (rec.first_outcome != retained) {
                ++out.series.discarded[3 * index_of(pair.first) + index_of(pair.second)];
                continue;
            }
            rec.second_outcome = lhv_read(t, pair.second);
            out.hidden.add(t);
            apply_disturbance(t, cfg.disturbance, pair.first, pair.second, cfg.distribution, drng);
        }
        out.series.retained.add(rec);
        out.table.add(rec);
        if (cfg.keep_records) out.records.push_back(rec);
    }
}

}  // namespace

std::uint64_t RunCountTable::pair_total(Setting x, Setting y) const {
    const std::size_t base = (3 * index_of(x) + index_of(y)) * 4;
    return cells[base] + cells[base + 1] + cells[base + 2] + cells[base + 3];
}

std::uint64_t RunCountTable::total_runs() const {
    return std::accumulate(cells.begin(), cells.end(), std::uint64_t{0});
}

RunCountTable& RunCountTable::merge(const RunCountTable& o) {
    for (std::size_t i = 0; i < kCells; ++i) cells[i] += o.cells[i];
    return *this;
}

std::uint64_t SeriesTable::total_runs() const {
    return retained.total_runs() +
           std::accumulate(discarded.begin(), discarded.end(), std::uint64_t{0});
}

SeriesTable& SeriesTable::merge(const SeriesTable& o) {
    retained.merge(o.retained);
    for (std::size_t i = 0; i < 9; ++i) discarded[i] += o.discarded[i];
    return *this;
}

std::string_view mode_name(Mode m) {
    switch (m) {
        case Mode::free: return "free";
        case Mode::two_series: return "two-series";
        case Mode::prepared: return "prepared";
    }
    return "?";
}

std::string_view model_name(Model m) { return m == Model::quantum ? "quantum" : "lhv"; }

Mode parse_mode(std::string_view text) {
    if (text == "free") return Mode::free;
    if (text == "two-series") return Mode::two_series;
    if (text == "prepared") return Mode::prepared;
    throw_invalid("unknown mode '" + std::string(text) + "'");
}

Model parse_model(std::string_view text) {
    if (text == "quantum") return Model::quantum;
    if (text == "lhv") return Model::lhv;
    throw_invalid("unknown model '" + std::string(text) + "'");
}

void validate(const ProtocolConfig& c) {
    if (c.n_runs < 1) throw_invalid("n_runs must be >= 1");
    if (c.chunk_size < 1) throw_invalid("chunk_size must be >= 1");
    if (c.workers < 1) throw_invalid("workers must be >= 1");
    if (c.mode == Mode::prepared && c.model == Model::lhv)
        (void)c.distribution.conditioned(c.prep.setting, c.prep.sign);
}

SettingPair draw_setting_pair(RandomStream& rng) {
    const auto k = rng.below(9);
    return {static_cast<Setting>(k / 3), static_cast<Setting>(k % 3)};
}

RunRecord execute_run_quantum(const PureState& state, const Directions& dirs, SettingPair pair,
                              RandomStream& rng) {
    const Measurement m1 = measure(state, dirs[pair.first], rng);
    const Measurement m2 = measure(m1.state, dirs[pair.second], rng);
    RunRecord r;
    r.first_setting = pair.first;
    r.second_setting = pair.second;
    r.first_outcome = m1.outcome;
    r.second_outcome = m2.outcome;
    return r;
}

LhvRun execute_run_lhv(const TripleDistribution& dist, SettingPair pair, Disturbance disturbance,
                       RandomStream& rng, RandomStream* disturbance_rng) {
    LhvRun out;
    out.between = sample_triple(dist, rng);
    out.record.first_setting = pair.first;
    out.record.second_setting = pair.second;
    out.record.first_outcome = lhv_read(out.between, pair.first);
    out.record.second_outcome = lhv_read(out.between, pair.second);
    out.after = apply_disturbance(out.between, disturbance, pair.first, pair.second, dist,
                                  disturbance_rng ? *disturbance_rng : rng);
    return out;
}

PreparedRun prepared_run(const ProtocolConfig& config, RandomStream& rng) {
    ProtocolConfig cfg = config;
    cfg.mode = Mode::prepared;
    return prepared_run_with(make_context(cfg), rng, nullptr);
}

EnsembleResult run_ensemble(const ProtocolConfig& config) {
    validate(config);
    const RunContext ctx = make_context(config);

    struct SeriesPlan {
        std::uint64_t tag;
        std::uint64_t id_offset;
        std::uint64_t n;
    };
    std::vector<SeriesPlan> plans;
    if (config.mode == Mode::two_series) {
        const std::uint64_t n = config.runs_per_series ? config.runs_per_series : config.n_runs;
        plans = {{kTagPlus, 0, n}, {kTagMinus, n, n}};
    } else {
        plans = {{kTagSingle, 0, config.n_runs}};
    }

    struct Task {
        std::size_t plan;
        std::uint64_t chunk;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < plans.size(); ++p) {
        const std::uint64_t chunks = (plans[p].n + config.chunk_size - 1) / config.chunk_size;
        for (std::uint64_t i = 0; i < chunks; ++i) tasks.push_back({p, i});
    }

    std::vector<ChunkResult> results(tasks.size());
    detail::parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
        const SeriesPlan& plan = plans[tasks[t].plan];
        const std::uint64_t chunk = tasks[t].chunk;
        const std::uint64_t begin = chunk * config.chunk_size;
        const std::uint64_t end = std::min(plan.n, begin + config.chunk_size);
        RandomStream rng = RandomStream::derive(config.seed, plan.tag, chunk);
        RandomStream drng =
            RandomStream::derive(config.seed, plan.tag + kTagDisturbanceOffset, chunk);
        ChunkResult& out = results[t];
        if (config.mode == Mode::two_series) {
            const Outcome retained = plan.tag == kTagPlus ? Outcome::plus : Outcome::minus;
            run_series_chunk(ctx, retained, plan.id_offset + begin, plan.id_offset + end, rng, drng,
                             out);
        } else {
            run_single_chunk(ctx, begin, end, rng, drng, out);
        }
    });

    EnsembleResult res;
    res.n_runs = 0;
    for (const auto& p : plans) res.n_runs += p.n;
    if (config.model == Model::lhv) res.hidden = HiddenCountTable{};
    if (config.mode == Mode::two_series) {
        res.series_plus = SeriesTable{Outcome::plus, {}, {}};
        res.series_minus = SeriesTable{Outcome::minus, {}, {}};
    }
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        ChunkResult& r = results[t];
        res.table.merge(r.table);
        if (res.hidden) res.hidden->merge(r.hidden);
        if (config.mode == Mode::two_series) {
            (r.series.retained_sign == Outcome::plus ? *res.series_plus : *res.series_minus)
                .merge(r.series);
        }
        if (config.keep_records)
            res.records.insert(res.records.end(), r.records.begin(), r.records.end());
    }
    return res;
}

PairProbability estimate_pair_prob(const RunCountTable& table, Setting x, Outcome sx, Setting y,
                                   Outcome sy) {
    PairProbability p;
    p.n_conditioning = table.pair_total(x, y);
    p.count = table.at(x, sx, y, sy);
    if (p.n_conditioning == 0) return p;
    const double n = static_cast<double>(p.n_conditioning);
    p.defined = true;
    p.estimate = static_cast<double>(p.count) / n;
    p.std_error = std::sqrt(p.estimate * (1.0 - p.estimate) / n);
    p.low_stats = p.count < kLowStats;
    return p;
}

PairProbability estimate_pair_prob(const SeriesTable& series, Setting x, Outcome sx, Setting y,
                                   Outcome sy) {
    PairProbability p;
    p.n_conditioning = series.pair_total(x, y);
    p.count = series.retained.at(x, sx, y, sy);
    if (p.n_conditioning == 0 || sx != series.retained_sign) return p;
    const double n = static_cast<double>(p.n_conditioning);
    p.defined = true;
    p.estimate = static_cast<double>(p.count) / n;
    p.std_error = std::sqrt(p.estimate * (1.0 - p.estimate) / n);
    p.low_stats = p.count < kLowStats;
    return p;
}

ExpectationEstimate estimate_expectation(const RunCountTable& table, Setting x, Setting y) {
    ExpectationEstimate e;
    e.n_conditioning = table.pair_total(x, y);
    if (e.n_conditioning == 0) return e;
    const auto pp = table.at(x, Outcome::plus, y, Outcome::plus);
    const auto mm = table.at(x, Outcome::minus, y, Outcome::minus);
    const auto pm = table.at(x, Outcome::plus, y, Outcome::minus);
    const auto mp = table.at(x, Outcome::minus, y, Outcome::plus);
    const double n = static_cast<double>(e.n_conditioning);
    e.defined = true;
    e.estimate = (static_cast<double>(pp + mm) - static_cast<double>(pm + mp)) / n;
    e.std_error = std::sqrt(std::max(0.0, 1.0 - e.estimate * e.estimate) / n);
    e.low_stats = e.n_conditioning < kLowStats;
    return e;
}

ExpectationEstimate two_series_estimate(const SeriesTable& plus, const SeriesTable& minus,
                                        Setting x, Setting y) {
    ExpectationEstimate e;
    if (plus.retained_sign != Outcome::plus || minus.retained_sign != Outcome::minus)
        throw_invalid("two-series estimate needs a +1 series and a -1 series");
    const std::uint64_t np = plus.pair_total(x, y);
    const std::uint64_t nm = minus.pair_total(x, y);
    e.n_conditioning = np + nm;
    if (plus.retained.pair_total(x, y) == 0 || minus.retained.pair_total(x, y) == 0) return e;

    // Each series run scores +1, -1, or 0 (discarded); its mean is the
    // series' signed contribution to E.
    const auto contribution = [&](const SeriesTable& s, Outcome first, std::uint64_t n,
                                  double& var) {
        const double same = static_cast<double>(s.retained.at(x, first, y, first));
        const double diff = static_cast<double>(s.retained.at(x, first, y, flip(first)));
        const double dn = static_cast<double>(n);
        const double mean = (same - diff) / dn;
        const double second_moment = (same + diff) / dn;
        var = std::max(0.0, second_moment - mean * mean) / dn;
        return mean;
    };
    double vp = 0.0, vm = 0.0;
    e.estimate = contribution(plus, Outcome::plus, np, vp) +
                 contribution(minus, Outcome::minus, nm, vm);
    e.std_error = std::sqrt(vp + vm);
    e.defined = true;
    e.low_stats = plus.retained.pair_total(x, y) < kLowStats ||
                  minus.retained.pair_total(x, y) < kLowStats;
    return e;
}

FractionEstimate perfect_correlation_check(std::span<const RunRecord> records) {
    FractionEstimate f;
    for (const RunRecord& r : records) {
        if (r.first_setting != r.second_setting) continue;
        ++f.total;
        if (r.first_outcome == r.second_outcome) ++f.matched;
    }
    if (f.total == 0) return f;
    f.defined = true;
    f.value = static_cast<double>(f.matched) / static_cast<double>(f.total);
    return f;
}

FractionEstimate perfect_correlation_check(const RunCountTable& table) {
    FractionEstimate f;
    for (Setting s : kSettings) {
        f.total += table.pair_total(s, s);
        f.matched += table.at(s, Outcome::plus, s, Outcome::plus) +
                     table.at(s, Outcome::minus, s, Outcome::minus);
    }
    if (f.total == 0) return f;
    f.defined = true;
    f.value = static_cast<double>(f.matched) / static_cast<double>(f.total);
    return f;
}

void write_run_log(std::ostream& out, std::span<const RunRecord> records, Mode mode, Model model) {
    for (const RunRecord& r : records) {
        out << r.run_id << ',' << mode_name(mode) << ',' << model_name(model) << ',';
        if (r.prep) out << setting_name(r.prep->setting) << ',' << outcome_text(r.prep->sign);
        else out << ',';
        out << ',' << setting_name(r.first_setting) << ',' << outcome_text(r.first_outcome) << ','
            << setting_name(r.second_setting) << ',' << outcome_text(r.second_outcome) << '\n';
    }
}

void write_count_table(std::ostream& out, const RunCountTable& table) {
    out << "pair_first,pair_second,outcome_first,outcome_second,count\n";
    for (Setting x : kSettings)
        for (Setting y : kSettings)
            for (Outcome sx : kOutcomes)
                for (Outcome sy : kOutcomes)
                    out << setting_name(x) << ',' << setting_name(y) << ',' << outcome_text(sx)
                        << ',' << outcome_text(sy) << ',' << table.at(x, sx, y, sy) << '\n';
}

RunCountTable read_count_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        line != "pair_first,pair_second,outcome_first,outcome_second,count")
        throw Error(ErrorCode::parse, "count table: missing or wrong header");
    RunCountTable t;
    std::array<bool, kCells> seen{};
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 5) throw Error(ErrorCode::parse, "count table: expected 5 columns");
        const std::size_t idx = cell_index(parse_setting(f[0]), parse_outcome(f[2]),
                                           parse_setting(f[1]), parse_outcome(f[3]));
        if (seen[idx]) throw Error(ErrorCode::parse, "count table: duplicate cell");
        seen[idx] = true;
        std::size_t pos = 0;
        try {
            t.cells[idx] = std::stoull(f[4], &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != f[4].size() || f[4].empty() || f[4][0] == '-')
            throw Error(ErrorCode::parse, "count table: bad count '" + f[4] + "'");
        ++rows;
    }
    if (rows != kCells) throw Error(ErrorCode::parse, "count table: expected 36 rows");
    return t;
}

}  // namespace tbell
