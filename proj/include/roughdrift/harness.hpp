#pragma once

#include "roughdrift/corpus.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace roughdrift {

using Json = nlohmann::json;

const std::vector<std::string>& suite_names();

/// Defaults of every key a config may set, with per-suite overrides.
Json default_config(const std::string& suite = "");

/// Overlays `user` on the defaults of `suite`. Unknown keys and type
/// mismatches raise config errors naming the field path, e.g.
/// "config.sde.paths: expected a number".
Json resolve_config(const std::string& suite, const Json& user);
Json load_config_file(const std::string& path);

/// Canonical text of a resolved config and its FNV-1a 64 hash (hex).
std::string canonical(const Json& cfg);
std::string fingerprint(const Json& cfg);

PresetParams drift_params(const Json& cfg);

enum class Status { pass, fail, report, error };
const char* to_string(Status s);

struct CheckResult {
    std::string id;
    std::string anchor;  // short statement of what is checked
    Status status = Status::report;
    Json numbers = Json::object();
    std::string error;
};

struct Series {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct SuiteResult {
    std::string suite;
    std::string fingerprint;
    std::vector<CheckResult> checks;
    std::map<std::string, Series> series;
    double wall_seconds = 0.0;

    bool all_pass() const;
    std::size_t count(Status s) const;
    const CheckResult* find(const std::string& id) const;
};

/// Runs one suite on a resolved config. Errors inside a check are recorded
/// on that check and the suite continues.
SuiteResult run_suite(const std::string& name, const Json& cfg);

/// report.jsonl payload: one line per check plus a closing summary line.
/// Contains no timestamps or wall times.
std::string report_jsonl(const SuiteResult& r);
std::string series_csv(const Series& s);

/// Writes report.jsonl, series/*.csv and config.lock into `dir`.
void write_outputs(const SuiteResult& r, const Json& cfg, const std::string& dir);

/// Corpus registry as JSON: name, parameters, exponents, margin, mode.
Json corpus_json();

/// Exit code of a suite: 0 when every asserted check passes, 2 otherwise.
int exit_code(const SuiteResult& r);

}  // namespace roughdrift
