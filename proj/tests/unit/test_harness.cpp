#include "roughdrift/error.hpp"
#include "roughdrift/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace roughdrift;

namespace {

std::string config_error(const std::string& suite, const Json& user) {
    try {
        resolve_config(suite, user);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config validation names the offending field") {
    CHECK(config_error("lemma2", Json{{"sde", {{"paths", "many"}}}}).find("config.sde.paths") != std::string::npos);
    CHECK(config_error("", Json{{"sde", {{"pathz", 3}}}}).find("config.sde.pathz") != std::string::npos);
    CHECK(config_error("", Json{{"drift", {{"preset", "nope"}}}}).find("config.drift.preset") != std::string::npos);
    CHECK(config_error("", Json{{"drift", {{"cap", 5.0}}}}).empty());
    CHECK_THROWS_AS(default_config("lemma9"), Error);
}

TEST_CASE("suite overrides and fingerprints") {
    const auto l3 = default_config("lemma3");
    CHECK(l3["drift"]["preset"] == "truncated_radial");
    CHECK(default_config("lemma2")["grid"]["time_nodes"] == 129);
    const auto a = resolve_config("lemma1", Json::object());
    const auto b = resolve_config("lemma1", Json{{"seed", 7}});
    CHECK(fingerprint(a) == fingerprint(resolve_config("lemma1", Json::object())));
    CHECK(fingerprint(a) != fingerprint(b));
    CHECK(fingerprint(a).size() == 16);
}

TEST_CASE("corpus dump") {
    const auto c = corpus_json();
    CHECK(c.size() >= 5);
    for (const auto& e : c) CHECK((e["prodi_serrin"].get<bool>() || e["holder_mode"].get<bool>()));
}

TEST_CASE("lemma1 on the zero drift passes with all-zero constants") {
    const auto cfg = resolve_config("lemma1", Json{{"drift", {{"preset", "zero"}}}, {"grid", {{"nodes", 32}, {"time_nodes", 9}}}});
    const auto r = run_suite("lemma1", cfg);
    CHECK(r.count(Status::fail) == 0);
    CHECK(r.count(Status::error) == 0);
    CHECK(exit_code(r) == 0);
    const auto* cn = r.find("lemma1.C_n");
    REQUIRE(cn);
    CHECK(cn->numbers["C_n"] == 0.0);
    for (const auto& row : r.series.at("lemma1_contraction").rows) CHECK(row[1] == 0.0);

    const auto text = report_jsonl(r);
    CHECK(text.find("wall") == std::string::npos);
    CHECK(text == report_jsonl(run_suite("lemma1", cfg)));

    const auto dir = std::filesystem::temp_directory_path() / "roughdrift_suite_out";
    write_outputs(r, cfg, dir.string());
    CHECK(std::filesystem::exists(dir / "report.jsonl"));
    CHECK(std::filesystem::exists(dir / "config.lock"));
    CHECK(std::filesystem::exists(dir / "series" / "lemma1_contraction.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("errors inside a check do not abort the suite") {
    // A truncated horizon list makes the depth-8 stability check impossible.
    const auto cfg = resolve_config("lemma1", Json{{"drift", {{"preset", "zero"}}},
                                                   {"ladder", {{"depth", 2}}},
                                                   {"grid", {{"nodes", 32}, {"time_nodes", 9}}}});
    const auto r = run_suite("lemma1", cfg);
    const auto* d = r.find("lemma1.D_stable");
    REQUIRE(d);
    CHECK(d->status == Status::error);
    CHECK(r.find("lemma1.C_monotone")->status == Status::pass);
    CHECK(exit_code(r) == 1);
}

TEST_CASE("series csv format") {
    Series s{{"a", "b"}, {{1.0, 0.5}, {2.0, 0.25}}};
    CHECK(series_csv(s) == "a,b\n1,0.5\n2,0.25\n");
}
