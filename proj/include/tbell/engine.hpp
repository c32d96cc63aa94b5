#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "tbell/lhv.hpp"
#include "tbell/qubit.hpp"
#include "tbell/rng.hpp"

namespace tbell {

struct SettingPair {
    Setting first = Setting::A;
    Setting second = Setting::A;
    bool operator==(const SettingPair&) const = default;
};

struct Directions {
    Direction a;
    Direction b;
    Direction c;

    const Direction& operator[](Setting s) const {
        return s == Setting::A ? a : (s == Setting::B ? b : c);
    }
    bool operator==(const Directions&) const = default;
};

struct Preparation {
    Setting setting = Setting::A;
    Outcome sign = Outcome::plus;
    bool operator==(const Preparation&) const = default;
};

struct RunRecord {
    std::uint64_t run_id = 0;
    std::optional<Preparation> prep;
    Setting first_setting = Setting::A;
    Setting second_setting = Setting::A;
    Outcome first_outcome = Outcome::plus;
    Outcome second_outcome = Outcome::plus;
    bool operator==(const RunRecord&) const = default;
};

/// Square-bracket counts N[x^alpha y^beta], indexed by cell_index.
struct RunCountTable {
    std::array<std::uint64_t, kCells> cells{};

    void add(const RunRecord& r) {
        ++cells[cell_index(r.first_setting, r.first_outcome, r.second_setting, r.second_outcome)];
    }
    std::uint64_t at(Setting x, Outcome sx, Setting y, Outcome sy) const {
        return cells[cell_index(x, sx, y, sy)];
    }
    std::uint64_t pair_total(Setting x, Setting y) const;
    std::uint64_t total_runs() const;
    RunCountTable& merge(const RunCountTable& o);

    bool operator==(const RunCountTable&) const = default;
};

/// One series of the two-series protocol: runs whose first outcome differs
/// from `retained_sign` are discarded after the first measurement but still
/// counted per setting pair, so they enter the denominators.
struct SeriesTable {
    Outcome retained_sign = Outcome::plus;
    RunCountTable retained;
    std::array<std::uint64_t, 9> discarded{};

    std::uint64_t pair_total(Setting x, Setting y) const {
        return retained.pair_total(x, y) + discarded[3 * index_of(x) + index_of(y)];
    }
    std::uint64_t total_runs() const;
    SeriesTable& merge(const SeriesTable& o);

    bool operator==(const SeriesTable&) const = default;
};

enum class Mode { free, two_series, prepared };
enum class Model { quantum, lhv };

std::string_view mode_name(Mode m);
std::string_view model_name(Model m);
Mode parse_mode(std::string_view text);
Model parse_model(std::string_view text);

struct ProtocolConfig {
    Mode mode = Mode::free;
    Model model = Model::quantum;
    PureState initial_state;
    TripleDistribution distribution;
    Directions directions;
    std::uint64_t n_runs = 1'000'000;
    std::uint64_t seed = 42;
    Disturbance disturbance = Disturbance::none;
    Preparation prep;
    /// Runs per series in two-series mode; 0 means n_runs.
    std::uint64_t runs_per_series = 0;
    /// Work partition; results depend on it, not on `workers`.
    std::uint64_t chunk_size = 65'536;
    unsigned workers = 1;
    bool keep_records = false;

    bool operator==(const ProtocolConfig&) const = default;
};

/// Throws tbell::Error on any invalid field.
void validate(const ProtocolConfig& config);

/// Binomial estimate of P(x^alpha, y^beta) conditional on the ordered pair.
struct PairProbability {
    bool defined = false;
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t count = 0;
    std::uint64_t n_conditioning = 0;
    /// Fewer than 10 counts in the cell.
    bool low_stats = false;
};

struct ExpectationEstimate {
    bool defined = false;
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t n_conditioning = 0;
    bool low_stats = false;
};

struct FractionEstimate {
    bool defined = false;
    double value = 0.0;
    std::uint64_t matched = 0;
    std::uint64_t total = 0;
};

SettingPair draw_setting_pair(RandomStream& rng);

RunRecord execute_run_quantum(const PureState& state, const Directions& dirs, SettingPair pair,
                              RandomStream& rng);

struct LhvRun {
    RunRecord record;
    /// Reality between the two measurements.
    HiddenTriple between;
    /// Reality after the second measurement (post-disturbance).
    HiddenTriple after;
};

/// `disturbance_rng`, when given, feeds the post-run disturbance so that the
/// run stream (and hence every later record) is unaffected by the model.
LhvRun execute_run_lhv(const TripleDistribution& dist, SettingPair pair, Disturbance disturbance,
                       RandomStream& rng, RandomStream* disturbance_rng = nullptr);

struct PreparedRun {
    RunRecord record;
    std::optional<HiddenTriple> between;
};

/// Prepare the configured eigenstate (quantum) or condition the population
/// on the preparation reading (lhv), then run a freshly drawn pair.
PreparedRun prepared_run(const ProtocolConfig& config, RandomStream& rng);

struct EnsembleResult {
    /// All completed runs (both retained series in two-series mode).
    RunCountTable table;
    std::optional<HiddenCountTable> hidden;
    std::optional<SeriesTable> series_plus;
    std::optional<SeriesTable> series_minus;
    std::vector<RunRecord> records;
    std::uint64_t n_runs = 0;
};

/// Generates the ensemble in fixed-size chunks; chunk i of series t draws from
/// RandomStream::derive(seed, t, i). Bit-identical for any worker count.
EnsembleResult run_ensemble(const ProtocolConfig& config);

PairProbability estimate_pair_prob(const RunCountTable& table, Setting x, Outcome sx, Setting y,
                                   Outcome sy);
/// Same, with the series denominators (retained + discarded).
PairProbability estimate_pair_prob(const SeriesTable& series, Setting x, Outcome sx, Setting y,
                                   Outcome sy);

ExpectationEstimate estimate_expectation(const RunCountTable& table, Setting x, Setting y);

/// E(x, y) combined from the +1 and -1 retained series.
ExpectationEstimate two_series_estimate(const SeriesTable& plus, const SeriesTable& minus,
                                        Setting x, Setting y);

FractionEstimate perfect_correlation_check(std::span<const RunRecord> records);
FractionEstimate perfect_correlation_check(const RunCountTable& table);

/// `run_id,mode,model,prep_setting,prep_sign,first_setting,first_outcome,
/// second_setting,second_outcome`, no header, one record per line.
void write_run_log(std::ostream& out, std::span<const RunRecord> records, Mode mode, Model model);

/// Header plus 36 rows in cell_index order.
void write_count_table(std::ostream& out, const RunCountTable& table);
RunCountTable read_count_table(std::istream& in);

}  // namespace tbell
