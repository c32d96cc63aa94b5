#include "tbell/commands.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "tbell/error.hpp"
#include "tbell/inequalities.hpp"

namespace tbell {

namespace {

using json = nlohmann::ordered_json;

constexpr Setting A = Setting::A;
constexpr Setting B = Setting::B;
constexpr Setting C = Setting::C;
constexpr Outcome P = Outcome::plus;
constexpr Outcome M = Outcome::minus;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string setting_str(Setting s) { return std::string(1, setting_name(s)); }

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json directions_json(const Directions& d) {
    json j;
    j["a"] = vec_json(d.a.vec());
    j["b"] = vec_json(d.b.vec());
    j["c"] = vec_json(d.c.vec());
    return j;
}

json report_json(const InequalityReport& r) {
    json j;
    j["inequality_id"] = inequality_name(r.id);
    j["defined"] = r.defined;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["margin"] = r.margin;
    j["stderr_margin"] = r.stderr_margin;
    j["n_sigma"] = r.n_sigma;
    j["violated"] = r.violated;
    j["n_runs"] = r.n_runs;
    return j;
}

void report_row(std::ostringstream& out, const InequalityReport& r) {
    char buf[200];
    if (!r.defined) {
        std::snprintf(buf, sizeof buf, "  %-5s undefined\n", std::string(inequality_name(r.id)).c_str());
    } else {
        std::snprintf(buf, sizeof buf, "  %-5s lhs=%-16.10g rhs=%-16.10g margin=%-16.10g stderr=%-12.6g %s\n",
                      std::string(inequality_name(r.id)).c_str(), r.lhs, r.rhs, r.margin,
                      r.stderr_margin, r.violated ? "VIOLATED" : "holds");
    }
    out << buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

/// State entering the first measurement of each run.
PureState run_state(const ProtocolConfig& p) {
    if (p.mode == Mode::prepared) return eigenstate(p.directions[p.prep.setting], p.prep.sign);
    return p.initial_state;
}

double exact_pair_prob(const ProtocolConfig& p, Setting x, Outcome sx, Setting y, Outcome sy) {
    if (p.model == Model::quantum)
        return quantum_pair_prob(run_state(p), p.directions[x], sx, p.directions[y], sy);
    const TripleDistribution dist =
        p.mode == Mode::prepared ? p.distribution.conditioned(p.prep.setting, p.prep.sign)
                                 : p.distribution;
    double sum = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        const HiddenTriple t = HiddenTriple::from_index(i);
        if (lhv_read(t, x) == sx && lhv_read(t, y) == sy) sum += dist.weights()[i];
    }
    return sum;
}

double exact_expectation_of(const ProtocolConfig& p, Setting x, Setting y) {
    if (p.model == Model::quantum) return quantum_expectation(p.directions[x], p.directions[y]);
    double e = 0.0;
    for (Outcome sx : kOutcomes)
        for (Outcome sy : kOutcomes) e += sign(sx) * sign(sy) * exact_pair_prob(p, x, sx, y, sy);
    return e;
}

}  // namespace

// ---------------------------------------------------------------- predict

CommandOutput cmd_predict(const ExperimentConfig& cfg) {
    const ProtocolConfig& p = cfg.protocol;
    const auto prob = [&](Setting x, Outcome sx, Setting y, Outcome sy) {
        return exact_probability(exact_pair_prob(p, x, sx, y, sy));
    };
    const auto expct = [&](Setting x, Setting y) {
        return exact_expectation(exact_expectation_of(p, x, y));
    };

    std::vector<InequalityReport> reports;
    {
        // Expected counts for n_runs runs, each ordered pair drawn w.p. 1/9.
        const double scale = static_cast<double>(p.n_runs) / 9.0;
        const double lhs = scale * prob(A, P, C, M).estimate;
        const double rhs = scale * (prob(A, P, B, M).estimate + prob(B, P, C, M).estimate);
        reports.push_back(make_report(InequalityId::EQ6, lhs, rhs, 0.0, cfg.significance, p.n_runs));
    }
    reports.push_back(eval_eq7(prob(A, P, C, M), prob(A, P, B, M), prob(B, P, C, M), cfg.significance));
    reports.push_back(eval_eq8(prob(A, M, C, P), prob(A, M, B, P), prob(B, M, C, P), cfg.significance));
    reports.push_back(eval_eq10(expct(A, B), expct(B, C), expct(A, C), cfg.significance));
    reports.push_back(eval_eq16(p.directions));
    reports.push_back(eval_eq18(p.directions));

    const std::string digest = config_digest(cfg);
    CommandOutput out;
    if (cfg.format == ReportFormat::structured) {
        json j;
        j["command"] = "predict";
        j["config_digest"] = digest;
        j["model"] = model_name(p.model);
        j["mode"] = mode_name(p.mode);
        j["directions"] = directions_json(p.directions);
        if (p.model == Model::quantum) j["state_bloch"] = vec_json(bloch_vector(run_state(p)));
        json probs = json::array();
        for (Setting x : kSettings)
            for (Setting y : kSettings)
                for (Outcome sx : kOutcomes)
                    for (Outcome sy : kOutcomes)
                        probs.push_back({{"first", setting_str(x)}, {"second", setting_str(y)},
                                         {"outcome_first", sign(sx)}, {"outcome_second", sign(sy)},
                                         {"probability", prob(x, sx, y, sy).estimate}});
        j["pair_probabilities"] = probs;
        json ex = json::array();
        for (Setting x : kSettings)
            for (Setting y : kSettings)
                ex.push_back({{"first", setting_str(x)}, {"second", setting_str(y)},
                              {"expectation", expct(x, y).estimate}});
        j["expectations"] = ex;
        json ineq = json::array();
        for (const auto& r : reports) ineq.push_back(report_json(r));
        j["inequalities"] = ineq;
        out.text = j.dump(2) + "\n";
        return out;
    }

    std::ostringstream t;
    t << "predict  model=" << model_name(p.model) << " mode=" << mode_name(p.mode)
      << " digest=" << digest << "\n";
    for (Setting s : kSettings) {
        const Vec3& v = p.directions[s].vec();
        t << "  " << setting_name(s) << " = (" << num(v[0]) << ", " << num(v[1]) << ", " << num(v[2])
          << ")\n";
    }
    t << "pair probabilities P(x^s, y^t | x then y):\n";
    for (Setting x : kSettings)
        for (Setting y : kSettings) {
            t << "  " << setting_name(x) << setting_name(y) << ":";
            for (Outcome sx : kOutcomes)
                for (Outcome sy : kOutcomes)
                    t << "  " << (sx == P ? '+' : '-') << (sy == P ? '+' : '-') << " "
                      << num(prob(x, sx, y, sy).estimate);
            t << "   E=" << num(expct(x, y).estimate) << "\n";
        }
    t << "inequalities:\n";
    for (const auto& r : reports) report_row(t, r);
    out.text = t.str();
    return out;
}

// --------------------------------------------------------------- simulate

CommandOutput cmd_simulate(const ExperimentConfig& cfg) {
    ProtocolConfig p = cfg.protocol;
    p.keep_records = cfg.log_runs;
    const EnsembleResult res = run_ensemble(p);
    const double k = cfg.significance;
    const bool two = p.mode == Mode::two_series;

    const auto prob = [&](Setting x, Outcome sx, Setting y, Outcome sy) {
        if (two) return estimate_pair_prob(sx == P ? *res.series_plus : *res.series_minus, x, sx, y, sy);
        return estimate_pair_prob(res.table, x, sx, y, sy);
    };
    const auto expct = [&](Setting x, Setting y) {
        if (two) return two_series_estimate(*res.series_plus, *res.series_minus, x, y);
        return estimate_expectation(res.table, x, y);
    };

    std::vector<InequalityReport> reports;
    if (two) reports.push_back(eval_eq6(res.series_plus->retained, k, res.series_plus->total_runs()));
    else reports.push_back(eval_eq6(res.table, k));
    reports.push_back(eval_eq7(prob(A, P, C, M), prob(A, P, B, M), prob(B, P, C, M), k, res.n_runs));
    reports.push_back(eval_eq8(prob(A, M, C, P), prob(A, M, B, P), prob(B, M, C, P), k, res.n_runs));
    reports.push_back(eval_eq10(expct(A, B), expct(B, C), expct(A, C), k, res.n_runs));
    if (res.hidden) {
        InequalityReport eq4 = check_count_inequality(*res.hidden);
        reports.push_back(eq4);
    }
    const FractionEstimate corr = perfect_correlation_check(res.table);
    const double lhs18_est = lhs18_from_eq7(reports[1]);

    std::vector<std::pair<std::array<std::size_t, 1>, RatioEstimate>> ratios;
    if (res.hidden && !two) {
        for (Setting x : kSettings)
            for (Setting y : kSettings)
                for (Outcome sx : kOutcomes)
                    for (Outcome sy : kOutcomes)
                        ratios.push_back({{cell_index(x, sx, y, sy)},
                                          eq5_ratio(*res.hidden, res.table, x, sx, y, sy)});
    }

    const std::string digest = config_digest(cfg);
    CommandOutput out;
    if (cfg.format == ReportFormat::structured) {
        json j;
        j["command"] = "simulate";
        j["config_digest"] = digest;
        j["mode"] = mode_name(p.mode);
        j["model"] = model_name(p.model);
        j["n_runs"] = res.n_runs;
        j["seed"] = p.seed;
        json counts = json::array();
        json probs = json::array();
        for (Setting x : kSettings)
            for (Setting y : kSettings)
                for (Outcome sx : kOutcomes)
                    for (Outcome sy : kOutcomes) {
                        json key = {{"first", setting_str(x)}, {"second", setting_str(y)},
                                    {"outcome_first", sign(sx)}, {"outcome_second", sign(sy)}};
                        json c = key;
                        c["count"] = res.table.at(x, sx, y, sy);
                        counts.push_back(c);
                        const PairProbability pp = prob(x, sx, y, sy);
                        json e = key;
                        e["defined"] = pp.defined;
                        e["estimate"] = pp.estimate;
                        e["stderr"] = pp.std_error;
                        e["n_conditioning"] = pp.n_conditioning;
                        e["low_stats"] = pp.low_stats;
                        probs.push_back(e);
                    }
        j["count_table"] = counts;
        j["pair_probabilities"] = probs;
        json ex = json::array();
        for (Setting x : kSettings)
            for (Setting y : kSettings) {
                const ExpectationEstimate e = expct(x, y);
                ex.push_back({{"first", setting_str(x)}, {"second", setting_str(y)},
                              {"defined", e.defined}, {"estimate", e.estimate},
                              {"stderr", e.std_error}, {"n_conditioning", e.n_conditioning}});
            }
        j["expectations"] = ex;
        json ineq = json::array();
        for (const auto& r : reports) ineq.push_back(report_json(r));
        j["inequalities"] = ineq;
        j["perfect_correlation"] = {{"defined", corr.defined}, {"fraction", corr.value},
                                    {"matched", corr.matched}, {"same_setting_runs", corr.total}};
        j["lhs18_from_eq7"] = lhs18_est;
        if (res.hidden) {
            json h;
            for (std::size_t i = 0; i < 8; ++i)
                h[HiddenTriple::from_index(i).name()] = res.hidden->counts[i];
            j["hidden_counts"] = h;
        }
        if (!ratios.empty()) {
            json rj = json::array();
            for (const auto& [idx, r] : ratios) {
                const json& c = counts[idx[0]];
                rj.push_back({{"first", c["first"]}, {"second", c["second"]},
                              {"outcome_first", c["outcome_first"]},
                              {"outcome_second", c["outcome_second"]}, {"defined", r.defined},
                              {"ratio", r.value}, {"stderr", r.std_error},
                              {"hidden_marginal", r.marginal}});
            }
            j["eq5_ratios"] = rj;
        }
        out.text = j.dump(2) + "\n";
    } else {
        std::ostringstream t;
        t << "simulate  model=" << model_name(p.model) << " mode=" << mode_name(p.mode)
          << " runs=" << res.n_runs << " seed=" << p.seed << " digest=" << digest << "\n";
        t << "pair probabilities (estimate +- stderr):\n";
        for (Setting x : kSettings)
            for (Setting y : kSettings) {
                t << "  " << setting_name(x) << setting_name(y) << ":";
                for (Outcome sx : kOutcomes)
                    for (Outcome sy : kOutcomes) {
                        const PairProbability pp = prob(x, sx, y, sy);
                        t << "  " << (sx == P ? '+' : '-') << (sy == P ? '+' : '-') << " ";
                        if (pp.defined) t << num(pp.estimate) << "+-" << num(pp.std_error);
                        else t << "undefined";
                    }
                const ExpectationEstimate e = expct(x, y);
                t << "   E=" << (e.defined ? num(e.estimate) + "+-" + num(e.std_error) : "undefined") << "\n";
            }
        t << "inequalities (k=" << num(k) << "):\n";
        for (const auto& r : reports) report_row(t, r);
        t << "perfect correlation: ";
        if (corr.defined) t << corr.matched << "/" << corr.total << " = " << num(corr.value) << "\n";
        else t << "undefined (no same-setting runs)\n";
        t << "lhs18 from EQ7 probabilities: " << num(lhs18_est) << "\n";
        if (!ratios.empty()) {
            t << "9 N[x y] / N(x y):\n";
            for (const auto& [idx, r] : ratios) {
                if (!r.defined) continue;
                const std::size_t pair = idx[0] / 4, o = idx[0] % 4;
                t << "  " << "ABC"[pair / 3] << ((o & 2) ? '-' : '+') << " " << "ABC"[pair % 3]
                  << ((o & 1) ? '-' : '+') << "  " << num(r.value) << "+-" << num(r.std_error)
                  << "  (N=" << r.marginal << ")\n";
            }
        }
        out.text = t.str();
    }

    if (!cfg.out_dir.empty()) {
        const std::filesystem::path dir(cfg.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + cfg.out_dir + "'");
        std::ostringstream csv;
        write_count_table(csv, res.table);
        write_file(dir / "count_table.csv", csv.str());
        if (cfg.log_runs) {
            std::ostringstream log;
            write_run_log(log, res.records, p.mode, p.model);
            write_file(dir / "run_log.csv", log.str());
        }
        for (const auto& r : reports)
            write_file(dir / ("report_" + std::string(inequality_name(r.id)) + ".json"),
                       serialize_report(r, digest));
        write_file(dir / (cfg.format == ReportFormat::structured ? "simulate.json" : "simulate.txt"),
                   out.text);
    }
    return out;
}

// --------------------------------------------------------------- optimize

CommandOutput cmd_optimize(const ExperimentConfig& cfg) {
    const SearchConfig& s = cfg.search;
    const SearchResult best = maximize(s);
    const GridResult grid = grid_oracle(s.objective, cfg.grid_resolution);
    const TripleConfiguration reference = reference_configuration(s.objective);
    const double reference_value = objective(s.objective, reference);
    const bool discrepancy = std::abs(best.value - grid.value) > 1e-3;

    CommandOutput out;
    out.ok = !discrepancy;
    const Directions d = best.best.directions();
    if (cfg.format == ReportFormat::structured) {
        json j;
        j["command"] = "optimize";
        j["config_digest"] = config_digest(cfg);
        j["objective"] = objective_name(s.objective);
        j["n_starts"] = s.n_starts;
        j["seed"] = s.seed;
        j["best_angles"] = best.best.angles;
        j["best_directions"] = directions_json(d);
        j["best_value"] = best.value;
        j["gradient_norm"] = best.gradient_norm;
        j["iterations"] = best.iterations;
        j["budget_exhausted"] = best.budget_exhausted;
        j["grid"] = {{"resolution", cfg.grid_resolution}, {"value", grid.value},
                     {"angles", grid.best.angles}, {"evaluations", grid.evaluations}};
        j["reference_configuration"] = {{"angles", reference.angles}, {"value", reference_value}};
        j["analytic_global_maximum"] = global_maximum(s.objective);
        j["discrepancy"] = discrepancy;
        out.text = j.dump(2) + "\n";
        return out;
    }
    std::ostringstream t;
    t << "optimize  objective=" << objective_name(s.objective) << " starts=" << s.n_starts
      << " seed=" << s.seed << "\n";
    t << "  best value        " << num(best.value) << "  (gradient norm " << num(best.gradient_norm)
      << (best.budget_exhausted ? ", iteration budget exhausted" : "") << ")\n";
    t << "  best angles      ";
    for (double a : best.best.angles) t << " " << num(a);
    t << "\n";
    for (Setting st : kSettings) {
        const Vec3& v = d[st].vec();
        t << "  " << setting_name(st) << " = (" << num(v[0]) << ", " << num(v[1]) << ", " << num(v[2])
          << ")\n";
    }
    t << "  grid oracle       " << num(grid.value) << "  (resolution " << num(cfg.grid_resolution)
      << " rad, " << grid.evaluations << " points)\n";
    t << "  reference point   " << num(reference_value) << "\n";
    t << "  global maximum    " << num(global_maximum(s.objective)) << "\n";
    t << "  " << (discrepancy ? "DISCREPANCY: optimizer and grid differ by more than 1e-3"
                              : "optimizer and grid agree within 1e-3")
      << "\n";
    out.text = t.str();
    return out;
}

// ----------------------------------------------------------------- verify

namespace {

struct Item {
    std::string name;
    bool passed;
    std::string detail;
};

Item check_normalization(RandomStream& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const PureState st = i % 2 ? random_state(rng)
                                   : eigenstate(random_direction(rng), i % 4 ? P : M,
                                                random_direction(rng), 6.283 * rng.uniform());
        const auto amp = st.amplitudes();
        worst = std::max(worst, std::abs(std::norm(amp[0]) + std::norm(amp[1]) - 1.0));
        const Vec3 r = bloch_vector(st);
        worst = std::max(worst, std::abs(std::sqrt(dot3(r, r)) - 1.0));
    }
    return {"normalization", worst <= 1e-12, "max deviation " + num(worst)};
}

Item check_completeness(RandomStream& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const PureState st = random_state(rng);
        const Direction x = random_direction(rng);
        worst = std::max(worst, std::abs(born_prob(st, x, P) + born_prob(st, x, M) - 1.0));
    }
    return {"completeness", worst <= 1e-12, "max deviation " + num(worst)};
}

Item check_orthogonality(RandomStream& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Direction x = random_direction(rng), e = random_direction(rng);
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        const auto u = eigenstate(x, P, e, phase).amplitudes();
        const auto v = eigenstate(x, M, e, phase).amplitudes();
        worst = std::max(worst, std::abs(std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1]));
    }
    return {"eigenstate_orthogonality", worst <= 1e-12, "max |<x+|x->| " + num(worst)};
}

Item check_frame_covariance(RandomStream& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const PureState st = random_state(rng);
        const PureState other = reexpress(st, random_direction(rng));
        const Direction x = random_direction(rng);
        worst = std::max(worst, std::abs(born_prob(st, x, P) - born_prob(other, x, P)));
    }
    return {"frame_covariance", worst <= 1e-10, "max deviation " + num(worst)};
}

Item check_perfect_correlation(Model model, std::uint64_t seed, RandomStream& rng) {
    ProtocolConfig p = ExperimentConfig::default_protocol();
    p.model = model;
    p.seed = seed;
    p.n_runs = 300'000;
    p.initial_state = random_state(rng);
    p.directions = {random_direction(rng), random_direction(rng), random_direction(rng)};
    std::array<double, 8> w;
    for (double& x : w) x = -std::log(1.0 - rng.uniform());
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    p.distribution = TripleDistribution(w);
    const FractionEstimate f = perfect_correlation_check(run_ensemble(p).table);
    return {std::string("perfect_correlation_") + std::string(model_name(model)),
            f.defined && f.matched == f.total,
            std::to_string(f.matched) + "/" + std::to_string(f.total)};
}

Item check_eq4_identity(RandomStream& rng, MarginalRule rule) {
    std::uint64_t failures = 0;
    const auto check = [&](const HiddenCountTable& t) {
        const InequalityReport r = check_count_inequality(t, rule);
        const double expected = static_cast<double>(t.at(triple_from_name("pmp")) +
                                                    t.at(triple_from_name("mpm")));
        if (r.violated || r.margin != expected) ++failures;
    };
    HiddenCountTable counterexample;
    counterexample.counts[triple_from_name("mpm").index()] = 5;
    check(counterexample);
    for (int i = 0; i < 10'000; ++i) {
        HiddenCountTable t;
        for (auto& c : t.counts) c = rng.below(1000);
        check(t);
    }
    return {"count_identity", failures == 0, std::to_string(failures) + " of 10001 tables failed"};
}

Item check_lhv_satisfaction(std::uint64_t seed, double k, RandomStream& rng) {
    int violated = 0;
    for (int d = 0; d < 5; ++d) {
        ProtocolConfig p = ExperimentConfig::default_protocol();
        p.model = Model::lhv;
        p.seed = mix64(seed + d);
        p.n_runs = 200'000;
        p.directions = {random_direction(rng), random_direction(rng), random_direction(rng)};
        std::array<double, 8> w;
        double sum = 0.0;
        for (double& x : w) sum += (x = -std::log(1.0 - rng.uniform()));
        for (double& x : w) x /= sum;
        p.distribution = TripleDistribution(w);
        const EnsembleResult res = run_ensemble(p);
        for (const auto& r : {eval_eq6(res.table, k), eval_eq7(res.table, k), eval_eq8(res.table, k),
                              eval_eq10(res.table, k), check_count_inequality(*res.hidden)})
            if (r.violated) ++violated;
    }
    return {"lhv_satisfaction", violated == 0, std::to_string(violated) + " violated reports"};
}

Item check_eq5(std::uint64_t seed, MarginalRule rule) {
    ProtocolConfig p = ExperimentConfig::default_protocol();
    p.model = Model::lhv;
    p.seed = seed;
    p.n_runs = 900'000;
    p.distribution = TripleDistribution({0.05, 0.05, 0.05, 0.05, 0.1, 0.5, 0.1, 0.1});
    const EnsembleResult res = run_ensemble(p);
    int checked = 0, failed = 0;
    for (Setting x : kSettings)
        for (Setting y : kSettings)
            for (Outcome sx : kOutcomes)
                for (Outcome sy : kOutcomes) {
                    const RatioEstimate r = eq5_ratio(*res.hidden, res.table, x, sx, y, sy, rule);
                    if (!r.defined || r.marginal < 1000) continue;
                    ++checked;
                    if (std::abs(r.value - 1.0) > 3.0 * r.std_error) ++failed;
                }
    return {"sampling_factor", failed == 0 && checked > 0,
            std::to_string(failed) + " of " + std::to_string(checked) + " outside 3 sigma"};
}

Item check_state_independence(RandomStream& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const PureState st = random_state(rng);
        const Direction x = random_direction(rng), y = random_direction(rng);
        double e = 0.0;
        for (Outcome sx : kOutcomes)
            for (Outcome sy : kOutcomes) e += sign(sx) * sign(sy) * quantum_pair_prob(st, x, sx, y, sy);
        worst = std::max(worst, std::abs(e - dot(x, y)));
    }
    return {"state_independence", worst <= 1e-12, "max deviation " + num(worst)};
}

Item check_gradients(RandomStream& rng) {
    double worst = 0.0;
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        TripleConfiguration c;
        for (double& a : c.angles) a = 2.0 * std::numbers::pi * rng.uniform();
        for (Objective kind : {Objective::eq16, Objective::eq18}) {
            const auto g = gradient(kind, c);
            for (int j = 0; j < 6; ++j) {
                TripleConfiguration up = c, dn = c;
                up.angles[j] += h;
                dn.angles[j] -= h;
                const double fd = (objective(kind, up) - objective(kind, dn)) / (2.0 * h);
                worst = std::max(worst, std::abs(g[j] - fd) / std::max(1.0, std::abs(g[j])));
            }
        }
    }
    return {"gradient_check", worst <= 1e-6, "max relative error " + num(worst)};
}

Item check_reference_values() {
    const double v16 = objective(Objective::eq16, reference_configuration(Objective::eq16));
    const double v18 = objective(Objective::eq18, reference_configuration(Objective::eq18));
    const bool ok = std::abs(v16 - std::sqrt(2.0)) <= 1e-12 &&
                    std::abs(v18 - (std::sqrt(2.0) + 0.5)) <= 1e-12;
    return {"reference_values", ok, "lhs16=" + num(v16) + " lhs18=" + num(v18)};
}

Item check_probability_route(RandomStream& rng) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Directions d{random_direction(rng), random_direction(rng), random_direction(rng)};
        const PureState a_plus = eigenstate(d.a, P);
        const auto pr = [&](const Direction& x, const Direction& y) {
            return exact_probability(quantum_pair_prob(a_plus, x, P, y, M));
        };
        const InequalityReport r = eval_eq7(pr(d.a, d.c), pr(d.a, d.b), pr(d.b, d.c));
        worst = std::max(worst, std::abs(lhs18_from_eq7(r) - lhs18(d.a, d.b, d.c)));
    }
    return {"lhs18_probability_route", worst <= 1e-12, "max deviation " + num(worst)};
}

}  // namespace

CommandOutput cmd_verify(const ExperimentConfig& cfg, const VerifyOptions& options) {
    const std::uint64_t seed = cfg.protocol.seed;
    const MarginalRule rule =
        options.repeated_term_fault ? MarginalRule::repeated_term : MarginalRule::corrected;
    std::uint64_t stream = 0;
    const auto next_rng = [&] { return RandomStream::derive(seed, 0x7e51f, stream++); };

    std::vector<Item> items;
    const auto run = [&](const std::function<Item(RandomStream&)>& f) {
        RandomStream rng = next_rng();
        items.push_back(f(rng));
    };
    run(check_normalization);
    run(check_completeness);
    run(check_orthogonality);
    run(check_frame_covariance);
    run([&](RandomStream& r) { return check_perfect_correlation(Model::quantum, seed, r); });
    run([&](RandomStream& r) { return check_perfect_correlation(Model::lhv, seed, r); });
    run([&](RandomStream& r) { return check_eq4_identity(r, rule); });
    run([&](RandomStream& r) { return check_lhv_satisfaction(seed, cfg.significance, r); });
    run([&](RandomStream&) { return check_eq5(seed, rule); });
    run(check_state_independence);
    run(check_gradients);
    run([&](RandomStream&) { return check_reference_values(); });
    run(check_probability_route);

    CommandOutput out;
    for (const auto& it : items) {
        out.items.emplace_back(it.name, it.passed);
        out.ok = out.ok && it.passed;
    }
    if (cfg.format == ReportFormat::structured) {
        json j;
        j["command"] = "verify";
        j["seed"] = seed;
        json arr = json::array();
        for (const auto& it : items)
            arr.push_back({{"name", it.name}, {"passed", it.passed}, {"detail", it.detail}});
        j["items"] = arr;
        j["all_passed"] = out.ok;
        out.text = j.dump(2) + "\n";
    } else {
        std::ostringstream t;
        for (const auto& it : items)
            t << (it.passed ? "PASS  " : "FAIL  ") << it.name << "  (" << it.detail << ")\n";
        t << (out.ok ? "all checks passed\n" : "some checks FAILED\n");
        out.text = t.str();
    }
    return out;
}

}  // namespace tbell
