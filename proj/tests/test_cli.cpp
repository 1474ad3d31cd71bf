#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "latocc/cli/cli.hpp"
#include "latocc/cli/config.hpp"
#include "latocc/data/record.hpp"
#include "latocc/io.hpp"
#include "latocc/model/model_io.hpp"

using namespace latocc;
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "latocc");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::path(LATOCC_TEST_TMP) / "cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

void spit(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

ojson json_at(const fs::path& p) { return ojson::parse(slurp(p)); }

// Two-site depth record for 1961 where site B is dry all of July.
std::string dry_july_record() {
    std::ostringstream ss;
    ss << "year,month,day,A,B\n";
    Date d = make_date(1961, 1, 1);
    for (int t = 0; t < 365; ++t, d = add_days(d, 1)) {
        const bool a = t % 2 == 0;
        const bool b = unsigned(d.month()) != 7 && t % 3 == 0;
        ss << int(d.year()) << ',' << unsigned(d.month()) << ',' << unsigned(d.day()) << ',' << (a ? "2.5" : "0")
           << ',' << (b ? "1.0" : "0.2") << '\n';
    }
    return ss.str();
}

// Sorted list of (relative path, bytes) under a directory.
std::vector<std::pair<std::string, std::string>> tree(const fs::path& root) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), root).string(), slurp(e.path()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"bogus"}).code == kExitUsage);
    const Run r = cli({"fit"});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("--input") != std::string::npos);
    CHECK(cli({"fit", "--max-lag", "two"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("the installed binary runs") {
    const fs::path dir = fresh_dir("binary");
    const std::string base = std::string("\"") + LATOCC_CLI + "\"";
    CHECK(std::system((base + " --help > \"" + (dir / "help.txt").string() + "\"").c_str()) == 0);
    CHECK(slurp(dir / "help.txt").find("simulate") != std::string::npos);
    const int rc = std::system((base + " fit --input \"" + (dir / "nope.csv").string() + "\" --out \"" +
                                dir.string() + "\" 2> \"" + (dir / "err.txt").string() + "\"")
                                   .c_str());
    REQUIRE(WIFEXITED(rc));
    CHECK(WEXITSTATUS(rc) == kExitData);
}

TEST_CASE("synth is reproducible and rejects bad truth") {
    const fs::path a = fresh_dir("synth-a"), b = fresh_dir("synth-b");
    for (const fs::path& d : {a, b}) {
        REQUIRE(cli({"synth", "--sites", "2", "--max-lag", "1", "--years", "50", "--seed", "9", "--out", d.string()})
                    .code == kExitOk);
    }
    CHECK(slurp(a / "record.csv") == slurp(b / "record.csv"));
    CHECK(slurp(a / "truth.json") == slurp(b / "truth.json"));
    const FittedModel truth = load_model((a / "truth.json").string());
    CHECK(truth.n_sites() == 2);
    CHECK(truth.max_lag == 1);
    CHECK(load_record((a / "record.csv").string()).n_days() == 18262);
    const ojson m = json_at(a / "manifest.json");
    CHECK(m["synth"]["record_digest"] == sha256_file((a / "record.csv").string()));

    const fs::path c = fresh_dir("synth-c");
    REQUIRE(cli({"synth", "--sites", "2", "--max-lag", "1", "--years", "50", "--seed", "10", "--out", c.string()})
                .code == kExitOk);
    CHECK(slurp(a / "record.csv") != slurp(c / "record.csv"));

    const fs::path bad = fresh_dir("synth-bad");
    ojson t;
    t["sites"] = {"x", "y"};
    t["p_wet"] = ojson::array({std::vector<double>(12, 0.3), std::vector<double>(12, 0.4)});
    t["lag_blocks"] = ojson::array({ojson::array({ojson::array({1.0, 1.4}), ojson::array({1.4, 1.0})})});
    spit(bad / "truth-in.json", t.dump());
    const Run r = cli({"synth", "--truth", (bad / "truth-in.json").string(), "--out", bad.string()});
    CHECK(r.code == kExitData);
    CHECK(r.err.find("truth") != std::string::npos);
    spit(bad / "broken.json", "{not json");
    CHECK(cli({"synth", "--truth", (bad / "broken.json").string(), "--out", bad.string()}).code == kExitData);

    // A valid custom truth works and is echoed.
    t["lag_blocks"] = ojson::array({ojson::array({ojson::array({1.0, 0.4}), ojson::array({0.4, 1.0})})});
    spit(bad / "truth-in.json", t.dump());
    CHECK(cli({"synth", "--truth", (bad / "truth-in.json").string(), "--years", "2", "--out", bad.string()}).code ==
          kExitOk);
    CHECK(load_model((bad / "truth.json").string()).sites == std::vector<std::string>{"x", "y"});
}

TEST_CASE("fit writes a model that reloads bit-identically") {
    const fs::path d = fresh_dir("fit");
    REQUIRE(cli({"synth", "--years", "100", "--start-year", "1901", "--sites", "3", "--out", d.string()}).code ==
            kExitOk);
    const Run r = cli({"fit", "--input", (d / "record.csv").string(), "--calibration-start", "1901-01-01",
                       "--calibration-end", "2000-12-31", "--out", d.string()});
    REQUIRE(r.code == kExitOk);
    const std::string text = slurp(d / "model.json");
    CHECK(dump_model(load_model((d / "model.json").string())) == text);
    CHECK(dump_model(parse_model(text)) == text);

    const ojson echo = json_at(d / "config-fit.json");
    CHECK(echo["wet_threshold_mm"] == 1.0);
    CHECK(echo["max_lag"] == 2);
    CHECK(echo["eps2"] == 0.05);
    CHECK(echo["input"] == "record.csv");
    CHECK(!echo.contains("threads"));

    const auto diag = read_csv(d / "diagnostics.csv");
    REQUIRE(diag.size() == 13);
    CHECK(diag[0][0] == "month");
    CHECK(diag[0][1] == "raw_min_eigenvalue");
    const ojson m = json_at(d / "manifest.json");
    CHECK(m["fit"]["model_digest"] == sha256_hex(text));
    CHECK(m["fit"]["source_digest"] == sha256_file((d / "record.csv").string()));

    const FittedModel model = parse_model(text);
    CHECK(model.provenance.calibration_start == "1901-01-01");
    CHECK(model.provenance.source == "record.csv");
}

TEST_CASE("fit failures map to exit codes") {
    const fs::path d = fresh_dir("fit-fail");
    spit(d / "dry.csv", dry_july_record());
    const Run r = cli({"fit", "--input", (d / "dry.csv").string(), "--calibration-start", "1961-01-01",
                       "--calibration-end", "1961-12-31", "--out", d.string()});
    CHECK(r.code == kExitEstimation);
    CHECK(r.err.find("site B") != std::string::npos);
    CHECK(r.err.find("month 7") != std::string::npos);
    CHECK(!fs::exists(d / "model.json"));

    CHECK(cli({"fit", "--input", (d / "missing.csv").string(), "--out", d.string()}).code == kExitData);
    spit(d / "gap.csv", "year,month,day,A\n1961,1,1,0\n1961,1,3,1\n");
    const Run g = cli({"fit", "--input", (d / "gap.csv").string(), "--out", d.string()});
    CHECK(g.code == kExitData);
    CHECK(g.err.find("1961-01-02") != std::string::npos);
    CHECK(cli({"fit", "--input", (d / "dry.csv").string(), "--eps2", "-1", "--out", d.string()}).code == kExitUsage);
}

TEST_CASE("synthetic refit recovers marginals") {
    // Built-in truth with r = 0: days are independent, so the binomial
    // bound holds for every site-month of the calibration period.
    const fs::path d = fresh_dir("refit");
    REQUIRE(cli({"synth", "--max-lag", "0", "--years", "41", "--out", d.string()}).code == kExitOk);
    REQUIRE(cli({"fit", "--input", (d / "record.csv").string(), "--max-lag", "0", "--out", d.string()}).code ==
            kExitOk);
    const FittedModel truth = load_model((d / "truth.json").string());
    const FittedModel fitted = load_model((d / "model.json").string());
    const OccurrenceRecord cal = binarize(load_record((d / "record.csv").string()), 1.0)
                                     .slice(make_date(1961, 1, 1), make_date(1985, 12, 31));
    for (unsigned m = 1; m <= 12; ++m) {
        const double n = double(month_slice(cal, m).days.size());
        for (std::size_t i = 0; i < truth.n_sites(); ++i) {
            const double p = truth.marginals.p_hat(i, m);
            CHECK(std::abs(fitted.marginals.p_hat(i, m) - p) <= 3 * std::sqrt(p * (1 - p) / n));
        }
    }
}

TEST_CASE("simulate is deterministic and checks the model digest") {
    const fs::path a = fresh_dir("sim-a");
    REQUIRE(cli({"synth", "--years", "12", "--start-year", "1961", "--out", a.string()}).code == kExitOk);
    REQUIRE(cli({"fit", "--input", (a / "record.csv").string(), "--calibration-end", "1972-12-31", "--out",
                 a.string()})
                .code == kExitOk);
    const fs::path b = fresh_dir("sim-b");
    fs::copy_file(a / "model.json", b / "model.json");

    REQUIRE(cli({"simulate", "-n", "2", "--seed", "5", "--start", "1961-01-01", "--end", "1965-12-31", "--threads",
                 "1", "--out", a.string()})
                .code == kExitOk);
    REQUIRE(cli({"simulate", "-n", "2", "--seed", "5", "--start", "1961-01-01", "--end", "1965-12-31", "--threads",
                 "2", "--out", b.string()})
                .code == kExitOk);
    for (const char* f : {"sim/rep-0.csv", "sim/rep-1.csv", "config-simulate.json"}) {
        CAPTURE(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(slurp(a / "sim/rep-0.csv") != slurp(a / "sim/rep-1.csv"));
    const ojson m = json_at(a / "manifest.json");
    CHECK(m["simulate"]["seed"] == 5);
    CHECK(m["simulate"]["n_replicates"] == 2);
    CHECK(m["simulate"]["model_digest"] == m["fit"]["model_digest"]);
    CHECK(m["simulate"]["files"].size() == 2);
    const std::string rep = slurp(a / "sim/rep-0.csv");
    CHECK(rep.rfind("year,month,day,S01,S02,S03,S04\n1961,1,1,", 0) == 0);

    // --as-depth writes 1.0 / 0.0.
    REQUIRE(cli({"simulate", "-n", "1", "--seed", "5", "--start", "1961-01-01", "--end", "1961-01-31",
                 "--as-depth", "--out", b.string()})
                .code == kExitOk);
    CHECK(slurp(b / "sim/rep-0.csv").find(",1.0") != std::string::npos);

    // Tampering with the model after fit.
    std::string text = slurp(a / "model.json");
    const auto pos = text.find("\"p_hat\"");
    REQUIRE(pos != std::string::npos);
    const auto digit = text.find_first_of("123456789", pos + 12);
    text[digit] = text[digit] == '9' ? '8' : char(text[digit] + 1);
    spit(a / "model.json", text);
    const Run r = cli({"simulate", "-n", "2", "--out", a.string()});
    CHECK(r.code == kExitSimulation);
    CHECK(r.err.find("digest") != std::string::npos);

    spit(b / "model.json", "{\"format\": \"latocc-model\"}");
    CHECK(cli({"simulate", "-n", "1", "--out", b.string()}).code == kExitSimulation);
    CHECK(cli({"simulate", "-n", "1", "--start", "2000-01-01", "--end", "1999-01-01", "--model",
               (a / "nope.json").string(), "--out", b.string()})
              .code == kExitSimulation);
}

TEST_CASE("evaluate reports and failures") {
    const fs::path d = fresh_dir("eval");
    REQUIRE(cli({"synth", "--years", "41", "--sites", "3", "--out", d.string()}).code == kExitOk);
    REQUIRE(cli({"fit", "--input", (d / "record.csv").string(), "--out", d.string()}).code == kExitOk);
    REQUIRE(cli({"simulate", "-n", "50", "--out", d.string()}).code == kExitOk);
    REQUIRE(cli({"evaluate", "--input", (d / "record.csv").string(), "--emit-svg", "--out", d.string()}).code ==
            kExitOk);
    for (const char* stem : {"pct_wet", "lag_corr", "max_dry_run", "agg_total_mean", "agg_total_std", "agg_total_corr"}) {
        for (const char* period : {"calibration", "validation"}) {
            for (const char* ext : {".csv", ".json", ".svg"}) {
                const fs::path p = d / "reports" / (std::string(stem) + "-" + period + ext);
                CAPTURE(p.string());
                CHECK(fs::exists(p));
            }
        }
    }
    const ojson j = json_at(d / "reports" / "pct_wet-calibration.json");
    CHECK(j["format_version"] == 1);
    CHECK(j["construction"] == "qq");
    CHECK(j["replicates"] == 50);
    CHECK(json_at(d / "manifest.json")["evaluate"]["replicates"] == 50);

    // In-sample lag correlations sit close to the diagonal. Observed phi uses
    // the sample mean of the lagged series (which reaches into the previous
    // month), so single cells of a 25-year record can stray a few hundredths.
    const auto rows = read_csv(d / "reports" / "lag_corr-calibration.csv");
    REQUIRE(rows.size() == 1 + 12 * (6 + 9 + 9));
    double worst = 0, total = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double dev = std::abs(std::stod(rows[i][1]) - std::stod(rows[i][2]));
        worst = std::max(worst, dev);
        total += dev;
    }
    const double mean_dev = total / double(rows.size() - 1);
    MESSAGE("LAG_CORR calibration: mean |dev| = " << mean_dev << ", max = " << worst);
    CHECK(mean_dev <= 0.02);
    CHECK(worst <= 0.1);

    // Missing replicate.
    fs::remove(d / "sim" / "rep-7.csv");
    const Run r = cli({"evaluate", "--input", (d / "record.csv").string(), "--out", d.string()});
    CHECK(r.code == kExitEvaluation);
    CHECK(r.err.find("replicate 7") != std::string::npos);

    // Misaligned replicate.
    REQUIRE(cli({"simulate", "-n", "2", "--start", "1970-01-01", "--end", "1990-12-31", "--out", d.string()}).code ==
            kExitOk);
    CHECK(cli({"evaluate", "--input", (d / "record.csv").string(), "--out", d.string()}).code == kExitEvaluation);

    CHECK(cli({"evaluate", "--input", (d / "record.csv").string(), "--manifest", (d / "none.json").string(), "--out",
               d.string()})
              .code == kExitEvaluation);
    CHECK(cli({"evaluate", "--input", (d / "none.csv").string(), "--out", d.string()}).code == kExitData);
}

TEST_CASE("evaluating the observations against themselves") {
    const fs::path d = fresh_dir("self");
    REQUIRE(cli({"synth", "--years", "41", "--sites", "2", "--missing-rate", "0.02", "--out", d.string()}).code ==
            kExitOk);
    ojson m;
    m["simulate"]["files"] = {"record.csv"};
    spit(d / "self.json", m.dump());
    REQUIRE(cli({"evaluate", "--input", (d / "record.csv").string(), "--manifest", (d / "self.json").string(),
                 "--out", d.string()})
                .code == kExitOk);
    for (const char* f : {"pct_wet-calibration.csv", "max_dry_run-validation.csv", "lag_corr-calibration.csv"}) {
        const auto rows = read_csv(d / "reports" / f);
        REQUIRE(rows.size() > 1);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CAPTURE(rows[i][0]);
            CHECK(rows[i][1] == rows[i][2]);
        }
    }
}

TEST_CASE("config files") {
    const fs::path d = fresh_dir("config");
    REQUIRE(cli({"synth", "--years", "30", "--sites", "2", "--out", d.string()}).code == kExitOk);

    spit(d / "run.toml",
         "# fit settings\n"
         "seed = 3\n"
         "[fit]\n"
         "input = \"" + (d / "record.csv").string() + "\"\n"
         "max_lag = 1\n"
         "eps2 = 0.1\n"
         "calibration_end = \"1980-12-31\"\n");
    const fs::path t = d / "toml-out";
    REQUIRE(cli({"fit", "--config", (d / "run.toml").string(), "--out", t.string()}).code == kExitOk);
    ojson echo = json_at(t / "config-fit.json");
    CHECK(echo["max_lag"] == 1);
    CHECK(echo["eps2"] == 0.1);
    CHECK(echo["calibration_end"] == "1980-12-31");
    CHECK(echo["wet_threshold_mm"] == 1.0);

    // Flags win over the file.
    REQUIRE(cli({"fit", "--config", (d / "run.toml").string(), "--max-lag", "0", "--out", t.string()}).code == kExitOk);
    echo = json_at(t / "config-fit.json");
    CHECK(echo["max_lag"] == 0);
    CHECK(echo["eps2"] == 0.1);

    ojson j;
    j["fit"]["input"] = (d / "record.csv").string();
    j["fit"]["wet_threshold_mm"] = 0.5;
    j["out"] = (d / "json-out").string();
    spit(d / "run.json", j.dump(2));
    REQUIRE(cli({"fit", "--config", (d / "run.json").string()}).code == kExitOk);
    echo = json_at(d / "json-out" / "config-fit.json");
    CHECK(echo["wet_threshold_mm"] == 0.5);
    CHECK(echo["max_lag"] == 2);

    spit(d / "bad.toml", "[fit]\nmax_lag = \"two\"\n");
    CHECK(cli({"fit", "--config", (d / "bad.toml").string(), "--input", (d / "record.csv").string(), "--out",
               t.string()})
              .code == kExitUsage);
    spit(d / "syntax.toml", "[fit\n");
    CHECK(cli({"fit", "--config", (d / "syntax.toml").string(), "--out", t.string()}).code == kExitUsage);
}

TEST_CASE("config parser") {
    const ConfigMap c = parse_toml(
        "a = 1\n"
        "b = 2.5 # trailing\n"
        "s = 'lit'\n"
        "q = \"esc\\tx\"\n"
        "flag = true\n"
        "levels = [0.1, 0.9]\n"
        "[sec]\n"
        "a = -4\n");
    CHECK(c.get_int("", "a") == 1);
    CHECK(c.get_int("sec", "a") == -4);
    CHECK(c.get_double("sec", "b") == 2.5);
    CHECK(c.get_double("", "a") == 1.0);
    CHECK(c.get_string("", "s") == "lit");
    CHECK(c.get_string("", "q") == "esc\tx");
    CHECK(c.get_bool("", "flag") == true);
    CHECK(c.get_doubles("", "levels") == std::vector<double>{0.1, 0.9});
    CHECK(!c.get_int("", "zzz"));
    CHECK_THROWS_AS(c.get_int("", "s"), UsageError);

    const ConfigMap j = parse_config("{\"fit\": {\"max_lag\": 1}, \"seed\": 4}");
    CHECK(j.get_int("fit", "max_lag") == 1);
    CHECK(j.get_int("fit", "seed") == 4);
    CHECK_THROWS_AS(parse_toml("x = \n"), UsageError);
}
