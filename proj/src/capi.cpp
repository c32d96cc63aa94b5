#include "tbell/tbell.h"

#include <exception>
#include <new>
#include <string>

#include "tbell/commands.hpp"
#include "tbell/config.hpp"
#include "tbell/error.hpp"
#include "tbell/inequalities.hpp"

struct tbell_config {
    tbell::ConfigDocument doc;
    tbell::ExperimentConfig built;
    std::string scratch;
};

struct tbell_result {
    tbell::CommandOutput output;
};

struct tbell_ensemble {
    tbell::EnsembleResult result;
    tbell::Mode mode;
};

namespace {

thread_local std::string g_last_error;

tbell_status status_of(tbell::ErrorCode code) {
    switch (code) {
        case tbell::ErrorCode::invalid_argument: return TBELL_ERR_INVALID_ARGUMENT;
        case tbell::ErrorCode::parse: return TBELL_ERR_PARSE;
        case tbell::ErrorCode::io: return TBELL_ERR_IO;
        case tbell::ErrorCode::undefined: return TBELL_ERR_UNDEFINED;
        case tbell::ErrorCode::internal: return TBELL_ERR_INTERNAL;
    }
    return TBELL_ERR_INTERNAL;
}

tbell_status fail(tbell_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

template <class F>
tbell_status guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const tbell::Error& e) {
        return fail(status_of(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(TBELL_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(TBELL_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(TBELL_ERR_INTERNAL, "unknown error");
    }
}

tbell_status null_handle(const char* what) {
    return fail(TBELL_ERR_NULL_HANDLE, std::string("null ") + what);
}

tbell::Setting to_setting(int x) {
    if (x < 0 || x > 2) tbell::throw_invalid("setting index must be 0, 1 or 2");
    return tbell::kSettings[static_cast<std::size_t>(x)];
}

tbell::Outcome to_outcome(int s) {
    if (s != 1 && s != -1) tbell::throw_invalid("outcome must be +1 or -1");
    return tbell::outcome_from_sign(s);
}

tbell::Direction to_direction(const double* v) {
    if (!v) tbell::throw_invalid("null direction");
    return tbell::Direction::from_xyz(v[0], v[1], v[2]);
}

tbell_status make_config(tbell::ConfigDocument doc, tbell_config** out) {
    if (!out) return null_handle("output pointer");
    auto* c = new tbell_config{std::move(doc), {}, {}};
    try {
        c->built = tbell::build_config(c->doc);
    } catch (...) {
        delete c;
        throw;
    }
    *out = c;
    return TBELL_OK;
}

}  // namespace

extern "C" {

const char* tbell_version(void) { return "1.0.0"; }

const char* tbell_last_error(void) { return g_last_error.c_str(); }

const char* tbell_status_string(tbell_status status) {
    switch (status) {
        case TBELL_OK: return "ok";
        case TBELL_ERR_INVALID_ARGUMENT: return "invalid argument";
        case TBELL_ERR_PARSE: return "parse error";
        case TBELL_ERR_IO: return "i/o error";
        case TBELL_ERR_UNDEFINED: return "undefined";
        case TBELL_ERR_INTERNAL: return "internal error";
        case TBELL_ERR_NULL_HANDLE: return "null handle";
    }
    return "unknown status";
}

tbell_status tbell_config_new(tbell_config** out) {
    return guarded([&] { return make_config({}, out); });
}

tbell_status tbell_config_parse(const char* text, tbell_config** out) {
    if (!text) return null_handle("text");
    return guarded([&] { return make_config(tbell::ConfigDocument::parse(text), out); });
}

tbell_status tbell_config_load(const char* path, tbell_config** out) {
    if (!path) return null_handle("path");
    return guarded([&] { return make_config(tbell::ConfigDocument::load(path), out); });
}

tbell_status tbell_config_set(tbell_config* config, const char* key, const char* value) {
    if (!config) return null_handle("config");
    if (!key || !value) return null_handle("key or value");
    return guarded([&] {
        tbell::ConfigDocument next = config->doc;
        next.set(key, value);
        config->built = tbell::build_config(next);
        config->doc = std::move(next);
        return TBELL_OK;
    });
}

tbell_status tbell_config_update(tbell_config* config, const char* const* keys,
                                 const char* const* values, size_t count) {
    if (!config) return null_handle("config");
    if (count && (!keys || !values)) return null_handle("key or value array");
    return guarded([&] {
        tbell::ConfigDocument next = config->doc;
        for (size_t i = 0; i < count; ++i) {
            if (!keys[i] || !values[i]) return null_handle("key or value");
            next.set(keys[i], values[i]);
        }
        config->built = tbell::build_config(next);
        config->doc = std::move(next);
        return TBELL_OK;
    });
}

tbell_status tbell_config_serialize(tbell_config* config, const char** text) {
    if (!config) return null_handle("config");
    if (!text) return null_handle("output pointer");
    return guarded([&] {
        config->scratch = tbell::serialize_config(config->built);
        *text = config->scratch.c_str();
        return TBELL_OK;
    });
}

tbell_status tbell_config_digest(tbell_config* config, const char** digest) {
    if (!config) return null_handle("config");
    if (!digest) return null_handle("output pointer");
    return guarded([&] {
        config->scratch = tbell::config_digest(config->built);
        *digest = config->scratch.c_str();
        return TBELL_OK;
    });
}

void tbell_config_free(tbell_config* config) { delete config; }

tbell_status tbell_run(const tbell_config* config, tbell_command command, uint32_t flags,
                       tbell_result** out) {
    if (!config) return null_handle("config");
    if (!out) return null_handle("output pointer");
    return guarded([&] {
        if (flags & ~TBELL_VERIFY_FAULT_REPEATED_TERM) tbell::throw_invalid("unknown flags");
        if (flags && command != TBELL_VERIFY)
            tbell::throw_invalid("fault injection applies to verify only");
        tbell::CommandOutput o;
        switch (command) {
            case TBELL_PREDICT: o = tbell::cmd_predict(config->built); break;
            case TBELL_SIMULATE: o = tbell::cmd_simulate(config->built); break;
            case TBELL_OPTIMIZE: o = tbell::cmd_optimize(config->built); break;
            case TBELL_VERIFY:
                o = tbell::cmd_verify(config->built,
                                      {(flags & TBELL_VERIFY_FAULT_REPEATED_TERM) != 0});
                break;
            default: tbell::throw_invalid("unknown command");
        }
        *out = new tbell_result{std::move(o)};
        return TBELL_OK;
    });
}

tbell_status tbell_result_text(const tbell_result* result, const char** text) {
    if (!result) return null_handle("result");
    if (!text) return null_handle("output pointer");
    *text = result->output.text.c_str();
    return TBELL_OK;
}

tbell_status tbell_result_ok(const tbell_result* result, int* ok) {
    if (!result) return null_handle("result");
    if (!ok) return null_handle("output pointer");
    *ok = result->output.ok ? 1 : 0;
    return TBELL_OK;
}

tbell_status tbell_result_item_count(const tbell_result* result, size_t* count) {
    if (!result) return null_handle("result");
    if (!count) return null_handle("output pointer");
    *count = result->output.items.size();
    return TBELL_OK;
}

tbell_status tbell_result_item(const tbell_result* result, size_t index, const char** name,
                               int* passed) {
    if (!result) return null_handle("result");
    if (!name || !passed) return null_handle("output pointer");
    if (index >= result->output.items.size())
        return fail(TBELL_ERR_INVALID_ARGUMENT, "item index out of range");
    *name = result->output.items[index].first.c_str();
    *passed = result->output.items[index].second ? 1 : 0;
    return TBELL_OK;
}

void tbell_result_free(tbell_result* result) { delete result; }

tbell_status tbell_ensemble_run(const tbell_config* config, tbell_ensemble** out) {
    if (!config) return null_handle("config");
    if (!out) return null_handle("output pointer");
    return guarded([&] {
        tbell::ProtocolConfig p = config->built.protocol;
        p.keep_records = false;
        *out = new tbell_ensemble{tbell::run_ensemble(p), p.mode};
        return TBELL_OK;
    });
}

tbell_status tbell_ensemble_total(const tbell_ensemble* ensemble, uint64_t* runs) {
    if (!ensemble) return null_handle("ensemble");
    if (!runs) return null_handle("output pointer");
    *runs = ensemble->result.n_runs;
    return TBELL_OK;
}

tbell_status tbell_ensemble_count(const tbell_ensemble* ensemble, int x, int sx, int y, int sy,
                                  uint64_t* count) {
    if (!ensemble) return null_handle("ensemble");
    if (!count) return null_handle("output pointer");
    return guarded([&] {
        *count = ensemble->result.table.at(to_setting(x), to_outcome(sx), to_setting(y),
                                           to_outcome(sy));
        return TBELL_OK;
    });
}

tbell_status tbell_ensemble_pair_prob(const tbell_ensemble* ensemble, int x, int sx, int y, int sy,
                                      double* estimate, double* std_error) {
    if (!ensemble) return null_handle("ensemble");
    if (!estimate || !std_error) return null_handle("output pointer");
    return guarded([&] {
        const auto& r = ensemble->result;
        const tbell::Outcome ox = to_outcome(sx);
        const tbell::PairProbability p =
            ensemble->mode == tbell::Mode::two_series
                ? tbell::estimate_pair_prob(ox == tbell::Outcome::plus ? *r.series_plus
                                                                       : *r.series_minus,
                                            to_setting(x), ox, to_setting(y), to_outcome(sy))
                : tbell::estimate_pair_prob(r.table, to_setting(x), ox, to_setting(y),
                                            to_outcome(sy));
        if (!p.defined) return fail(TBELL_ERR_UNDEFINED, "no runs measured this pair");
        *estimate = p.estimate;
        *std_error = p.std_error;
        return TBELL_OK;
    });
}

tbell_status tbell_ensemble_expectation(const tbell_ensemble* ensemble, int x, int y,
                                        double* estimate, double* std_error) {
    if (!ensemble) return null_handle("ensemble");
    if (!estimate || !std_error) return null_handle("output pointer");
    return guarded([&] {
        const auto& r = ensemble->result;
        const tbell::ExpectationEstimate e =
            ensemble->mode == tbell::Mode::two_series
                ? tbell::two_series_estimate(*r.series_plus, *r.series_minus, to_setting(x),
                                             to_setting(y))
                : tbell::estimate_expectation(r.table, to_setting(x), to_setting(y));
        if (!e.defined) return fail(TBELL_ERR_UNDEFINED, "no runs measured this pair");
        *estimate = e.estimate;
        *std_error = e.std_error;
        return TBELL_OK;
    });
}

void tbell_ensemble_free(tbell_ensemble* ensemble) { delete ensemble; }

tbell_status tbell_lhs16(const double a[3], const double b[3], const double c[3], double* value) {
    if (!value) return null_handle("output pointer");
    return guarded([&] {
        *value = tbell::lhs16(to_direction(a), to_direction(b), to_direction(c));
        return TBELL_OK;
    });
}

tbell_status tbell_lhs18(const double a[3], const double b[3], const double c[3], double* value) {
    if (!value) return null_handle("output pointer");
    return guarded([&] {
        *value = tbell::lhs18(to_direction(a), to_direction(b), to_direction(c));
        return TBELL_OK;
    });
}

tbell_status tbell_quantum_pair_prob(double s, double phi, const double e[3], const double x[3],
                                     int sx, const double y[3], int sy, double* value) {
    if (!value) return null_handle("output pointer");
    return guarded([&] {
        const tbell::PureState state(s, phi, to_direction(e));
        *value = tbell::quantum_pair_prob(state, to_direction(x), to_outcome(sx), to_direction(y),
                                          to_outcome(sy));
        return TBELL_OK;
    });
}

}  // extern "C"
