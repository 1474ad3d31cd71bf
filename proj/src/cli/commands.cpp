#include "latocc/cli/cli.hpp"

#include <atomic>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "latocc/cli/config.hpp"
#include "latocc/errors.hpp"
#include "latocc/evaluate/evaluate.hpp"
#include "latocc/io.hpp"
#include "latocc/model/model_io.hpp"
#include "latocc/simulate/simulate.hpp"
#include "latocc/simulate/truth.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace latocc {

namespace {

class CommandFailure : public std::runtime_error {
public:
    CommandFailure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const noexcept { return code_; }

private:
    int code_;
};

[[noreturn]] void fail(int code, const std::string& what) { throw CommandFailure(code, what); }

constexpr std::uint64_t kDefaultSeed = 1;
constexpr std::size_t kDefaultReplicates = 1000;
constexpr const char* kCalibrationStart = "1961-01-01";
constexpr const char* kCalibrationEnd = "1985-12-31";
constexpr const char* kValidationStart = "1986-01-01";
constexpr const char* kValidationEnd = "2001-12-31";

// Flags shared by every subcommand. Unset optionals fall back to the config
// file, then to defaults.
struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "TOML or JSON config file");
    cmd->add_option("--seed", c.seed, "base random seed");
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
    cmd->add_option("--out", c.out, "output directory");
}

struct Resolved {
    ConfigMap cfg;
    std::string section;
    fs::path out;
    std::uint64_t seed = kDefaultSeed;
    unsigned threads = 0;

    std::string str(const std::optional<std::string>& flag, std::string_view key, std::string def) const {
        if (flag) return *flag;
        return cfg.get_string(section, key).value_or(std::move(def));
    }
    std::optional<std::string> opt_str(const std::optional<std::string>& flag, std::string_view key) const {
        if (flag) return flag;
        return cfg.get_string(section, key);
    }
    double num(const std::optional<double>& flag, std::string_view key, double def) const {
        if (flag) return *flag;
        return cfg.get_double(section, key).value_or(def);
    }
    std::int64_t integer(const std::optional<std::int64_t>& flag, std::string_view key,
                         std::int64_t def) const {
        if (flag) return *flag;
        return cfg.get_int(section, key).value_or(def);
    }
    bool flag(bool set, std::string_view key) const {
        return set || cfg.get_bool(section, key).value_or(false);
    }
    Date date(const std::optional<std::string>& flag, std::string_view key, const char* def) const {
        const std::string text = str(flag, key, def);
        try {
            return parse_date(text);
        } catch (const DataError& e) {
            throw UsageError(std::string(key) + ": " + e.what());
        }
    }
    std::string rel(const fs::path& p) const { return relative_path(p, out); }
};

Resolved resolve_common(const Common& c, std::string section) {
    Resolved r;
    r.section = std::move(section);
    if (!c.config_path.empty()) r.cfg = load_config(c.config_path);
    r.out = r.str(c.out, "out", "out");
    const std::int64_t seed = r.integer(
        c.seed ? std::optional<std::int64_t>(static_cast<std::int64_t>(*c.seed)) : std::nullopt, "seed",
        static_cast<std::int64_t>(kDefaultSeed));
    r.seed = static_cast<std::uint64_t>(seed);
    const std::int64_t threads = r.integer(
        c.threads ? std::optional<std::int64_t>(*c.threads) : std::nullopt, "threads", 0);
    if (threads < 0) throw UsageError("threads must be non-negative");
    r.threads = static_cast<unsigned>(threads);
    if (r.threads == 0) r.threads = std::max(1u, std::thread::hardware_concurrency());
    return r;
}

std::string to_text(const ojson& j) { return j.dump(1) + "\n"; }

// Manifest sections are replaced wholesale; a new fit or simulate drops the
// downstream sections it invalidates.
void update_manifest(const fs::path& out, const std::string& section, ojson value,
                     const std::vector<std::string>& invalidates) {
    const fs::path path = out / "manifest.json";
    ojson doc = ojson::object();
    if (fs::exists(path)) {
        try {
            doc = ojson::parse(read_file(path));
        } catch (const std::exception&) {
            doc = ojson::object();
        }
        if (!doc.is_object()) doc = ojson::object();
    }
    doc["format_version"] = 1;
    for (const std::string& s : invalidates) doc.erase(s);
    doc[section] = std::move(value);
    write_file_atomic(path, to_text(doc));
}

std::string record_text(const PrecipRecord& rec) {
    std::ostringstream ss;
    write_record(ss, rec);
    return ss.str();
}

// --- fit ---------------------------------------------------------------------

struct FitArgs {
    Common common;
    std::optional<std::string> input;
    std::optional<double> threshold;
    std::optional<std::int64_t> max_lag;
    std::optional<double> eps2;
    std::optional<std::string> cal_start, cal_end, val_start, val_end;
};

void add_periods(CLI::App* cmd, std::optional<std::string>& cs, std::optional<std::string>& ce,
                 std::optional<std::string>& vs, std::optional<std::string>& ve) {
    cmd->add_option("--calibration-start", cs, std::string("default ") + kCalibrationStart);
    cmd->add_option("--calibration-end", ce, std::string("default ") + kCalibrationEnd);
    cmd->add_option("--validation-start", vs, std::string("default ") + kValidationStart);
    cmd->add_option("--validation-end", ve, std::string("default ") + kValidationEnd);
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const Resolved r = resolve_common(a.common, "fit");
    const std::optional<std::string> input = r.opt_str(a.input, "input");
    if (!input) throw UsageError("fit: --input is required");
    const double thr = r.num(a.threshold, "wet_threshold_mm", kDefaultWetThresholdMm);
    const std::int64_t max_lag = r.integer(a.max_lag, "max_lag", static_cast<std::int64_t>(kDefaultMaxLag));
    const double eps2 = r.num(a.eps2, "eps2", kDefaultEps2);
    const Date cs = r.date(a.cal_start, "calibration_start", kCalibrationStart);
    const Date ce = r.date(a.cal_end, "calibration_end", kCalibrationEnd);
    const Date vs = r.date(a.val_start, "validation_start", kValidationStart);
    const Date ve = r.date(a.val_end, "validation_end", kValidationEnd);
    if (max_lag < 0) throw UsageError("max_lag must be non-negative");
    if (!(thr > 0.0)) throw UsageError("wet_threshold_mm must be positive");
    if (!(eps2 > 0.0)) throw UsageError("eps2 must be positive");

    OccurrenceRecord cal;
    PrecipRecord rec;
    std::string digest;
    try {
        rec = load_record(*input);
        digest = sha256_file(*input);
        cal = binarize(rec, thr).slice(cs, ce);
    } catch (const DataError& e) {
        fail(kExitData, e.what());
    }

    FitOptions opt;
    opt.max_lag = static_cast<std::size_t>(max_lag);
    opt.eps2 = eps2;
    opt.wet_threshold_mm = thr;
    FitResult res;
    try {
        res = fit(cal, opt);
    } catch (const EstimationError& e) {
        std::string msg = e.what();
        for (std::size_t i = 1; i < e.failures().size(); ++i) msg += "\n  " + e.failures()[i];
        fail(kExitEstimation, msg);
    } catch (const Error& e) {
        fail(kExitEstimation, e.what());
    }

    FittedModel& model = res.model;
    model.provenance.source = r.rel(*input);
    model.provenance.source_digest = digest;
    model.provenance.calibration_start = format_date(cal.calendar().start());
    model.provenance.calibration_end = format_date(cal.calendar().end());
    model.provenance.record_start = format_date(rec.calendar().start());
    model.provenance.record_end = format_date(rec.calendar().end());

    const std::string model_text = dump_model(model);
    write_file_atomic(r.out / "model.json", model_text);

    std::ostringstream diag;
    diag << "month,raw_min_eigenvalue,adjusted_min_eigenvalue,eps1,eps2,max_abs_delta,sum_delta,clamped_pairs\n";
    for (const MonthDiagnostics& d : res.diagnostics.months) {
        std::size_t clamps = 0;
        for (const ClampEvent& c : res.diagnostics.clamps) clamps += c.month == d.month;
        diag << d.month << ',' << ojson(d.raw_min_eigenvalue).dump() << ','
             << ojson(d.adjusted_min_eigenvalue).dump() << ',' << ojson(d.eps1).dump() << ','
             << ojson(d.eps2).dump() << ',' << ojson(d.max_abs_delta).dump() << ','
             << ojson(d.sum_delta).dump() << ',' << clamps << '\n';
    }
    write_file_atomic(r.out / "diagnostics.csv", diag.str());

    std::ostringstream clamps;
    clamps << "month,lag,site_u,site_v,p_joint,lower,upper\n";
    for (const ClampEvent& c : res.diagnostics.clamps) {
        clamps << c.month << ',' << c.lag << ',' << model.sites[c.u] << ',' << model.sites[c.v] << ','
               << ojson(c.p_joint).dump() << ',' << ojson(c.lower).dump() << ','
               << ojson(c.upper).dump() << '\n';
    }
    write_file_atomic(r.out / "clamps.csv", clamps.str());

    ojson echo;
    echo["command"] = "fit";
    echo["input"] = r.rel(*input);
    echo["wet_threshold_mm"] = thr;
    echo["max_lag"] = max_lag;
    echo["eps2"] = eps2;
    echo["calibration_start"] = format_date(cs);
    echo["calibration_end"] = format_date(ce);
    echo["validation_start"] = format_date(vs);
    echo["validation_end"] = format_date(ve);
    echo["out"] = ".";
    write_file_atomic(r.out / "config-fit.json", to_text(echo));

    ojson section;
    section["model"] = "model.json";
    section["model_digest"] = sha256_hex(model_text);
    section["diagnostics"] = "diagnostics.csv";
    section["clamps"] = "clamps.csv";
    section["config"] = "config-fit.json";
    section["source"] = model.provenance.source;
    section["source_digest"] = digest;
    update_manifest(r.out, "fit", std::move(section), {"simulate", "evaluate"});

    if (!res.diagnostics.clamps.empty()) {
        out << "fit: " << res.diagnostics.clamps.size()
            << " joint probabilities clamped to their feasible bounds (see clamps.csv)\n";
    }
    out << "fit: " << model.n_sites() << " sites, max_lag " << model.max_lag << ", calibration "
        << model.provenance.calibration_start << " .. " << model.provenance.calibration_end << " -> "
        << (r.out / "model.json").string() << '\n';
    return kExitOk;
}

// --- simulate ----------------------------------------------------------------

struct SimArgs {
    Common common;
    std::optional<std::string> model;
    std::optional<std::string> start, end;
    std::optional<std::int64_t> n_replicates;
    bool as_depth = false;
};

int cmd_simulate(const SimArgs& a, std::ostream& out) {
    const Resolved r = resolve_common(a.common, "simulate");
    const fs::path model_path = r.str(a.model, "model", (r.out / "model.json").string());
    const Date start = r.date(a.start, "start", kCalibrationStart);
    const Date end = r.date(a.end, "end", kValidationEnd);
    const std::int64_t n = r.integer(a.n_replicates, "n_replicates", static_cast<std::int64_t>(kDefaultReplicates));
    const bool as_depth = r.flag(a.as_depth, "as_depth");
    if (n <= 0) throw UsageError("n_replicates must be positive");

    std::string model_text;
    try {
        model_text = read_file(model_path);
    } catch (const DataError& e) {
        fail(kExitSimulation, e.what());
    }
    const std::string digest = sha256_hex(model_text);

    const fs::path manifest_path = r.out / "manifest.json";
    if (fs::exists(manifest_path)) {
        ojson manifest;
        try {
            manifest = ojson::parse(read_file(manifest_path));
        } catch (const std::exception& e) {
            fail(kExitSimulation, "cannot parse " + manifest_path.string() + ": " + e.what());
        }
        if (manifest.contains("fit") && manifest["fit"].contains("model_digest")) {
            std::error_code ec;
            const fs::path recorded = r.out / manifest["fit"].value("model", std::string("model.json"));
            if (fs::equivalent(recorded, model_path, ec) &&
                manifest["fit"]["model_digest"].get<std::string>() != digest) {
                fail(kExitSimulation, "model digest mismatch: " + model_path.string() +
                                          " does not match the digest recorded at fit time");
            }
        }
    }

    SimulationConfig sc;
    sc.start = start;
    sc.end = end;
    sc.n_replicates = static_cast<std::size_t>(n);
    sc.base_seed = r.seed;

    std::vector<std::string> files;
    for (std::int64_t k = 0; k < n; ++k) files.push_back("sim/rep-" + std::to_string(k) + ".csv");

    std::size_t n_sites = 0;
    std::vector<std::string> sites;
    try {
        FittedModel model = parse_model(model_text);
        sites = model.sites;
        n_sites = model.n_sites();
        const Simulator sim(std::move(model));
        simulate_ensemble(sim, sc, r.threads, [&](std::uint64_t id, OccurrenceRecord&& rec) {
            std::ostringstream ss;
            write_occurrence(ss, rec, as_depth);
            write_file_atomic(r.out / files[id], ss.str());
        });
    } catch (const Error& e) {
        fail(kExitSimulation, e.what());
    }

    ojson echo;
    echo["command"] = "simulate";
    echo["model"] = r.rel(model_path);
    echo["start"] = format_date(start);
    echo["end"] = format_date(end);
    echo["n_replicates"] = n;
    echo["seed"] = r.seed;
    echo["as_depth"] = as_depth;
    echo["out"] = ".";
    write_file_atomic(r.out / "config-simulate.json", to_text(echo));

    ojson section;
    section["model"] = r.rel(model_path);
    section["model_digest"] = digest;
    section["seed"] = r.seed;
    section["n_replicates"] = n;
    section["replicate_ids"] = {0, n - 1};
    section["start"] = format_date(start);
    section["end"] = format_date(end);
    section["sites"] = sites;
    section["as_depth"] = as_depth;
    section["files"] = files;
    section["config"] = "config-simulate.json";
    update_manifest(r.out, "simulate", std::move(section), {"evaluate"});

    out << "simulate: " << n << " replicates x " << sc.n_days() << " days x " << n_sites << " sites -> "
        << (r.out / "sim").string() << '\n';
    return kExitOk;
}

// --- evaluate ----------------------------------------------------------------

struct EvalArgs {
    Common common;
    std::optional<std::string> input;
    std::optional<std::string> manifest;
    std::optional<double> threshold;
    std::optional<std::int64_t> max_lag;
    std::optional<std::string> cal_start, cal_end, val_start, val_end;
    std::vector<double> levels;
    bool emit_svg = false;
};

struct Period {
    std::string name;
    Date start;
    Date end;
    OccurrenceRecord observed;
    std::vector<ComparisonBuilder> builders;
};

int cmd_evaluate(const EvalArgs& a, std::ostream& out) {
    const Resolved r = resolve_common(a.common, "evaluate");
    const std::optional<std::string> input = r.opt_str(a.input, "input");
    if (!input) throw UsageError("evaluate: --input is required");
    const fs::path manifest_path = r.str(a.manifest, "manifest", (r.out / "manifest.json").string());
    const double thr = r.num(a.threshold, "wet_threshold_mm", kDefaultWetThresholdMm);
    const std::int64_t max_lag = r.integer(a.max_lag, "max_lag", static_cast<std::int64_t>(kDefaultMaxLag));
    const Date cs = r.date(a.cal_start, "calibration_start", kCalibrationStart);
    const Date ce = r.date(a.cal_end, "calibration_end", kCalibrationEnd);
    const Date vs = r.date(a.val_start, "validation_start", kValidationStart);
    const Date ve = r.date(a.val_end, "validation_end", kValidationEnd);
    std::vector<double> levels = a.levels;
    if (levels.empty()) levels = r.cfg.get_doubles(r.section, "levels").value_or(std::vector<double>{0.05, 0.95});
    for (double p : levels) {
        if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile levels must lie in [0, 1]");
    }
    const bool emit_svg = r.flag(a.emit_svg, "emit_svg");
    if (max_lag < 0) throw UsageError("max_lag must be non-negative");

    OccurrenceRecord observed;
    try {
        observed = binarize(load_record(*input), thr);
    } catch (const DataError& e) {
        fail(kExitData, e.what());
    }

    ojson manifest;
    try {
        manifest = ojson::parse(read_file(manifest_path));
    } catch (const std::exception& e) {
        fail(kExitEvaluation, "cannot read ensemble manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("simulate") || !manifest["simulate"].contains("files")) {
        fail(kExitEvaluation, "manifest " + manifest_path.string() + " lists no simulated ensemble");
    }
    const fs::path base = manifest_path.parent_path();
    std::vector<fs::path> files;
    for (const auto& f : manifest["simulate"]["files"]) files.push_back(base / f.get<std::string>());
    if (files.empty()) fail(kExitEvaluation, "ensemble is empty");
    for (std::size_t k = 0; k < files.size(); ++k) {
        if (!fs::exists(files[k])) {
            fail(kExitEvaluation, "replicate " + std::to_string(k) + ": missing file " + files[k].string());
        }
    }

    const std::vector<IndexKind> kinds(std::begin(kAllIndices), std::end(kAllIndices));
    std::vector<Period> periods;
    for (auto [name, ps, pe] : {std::tuple{"calibration", cs, ce}, std::tuple{"validation", vs, ve}}) {
        Period p{name, ps, pe, {}, {}};
        try {
            p.observed = observed.slice(ps, pe);
        } catch (const DataError&) {
            out << "evaluate: observed record does not overlap the " << name << " period; skipped\n";
            continue;
        }
        for (IndexKind kind : kinds) {
            p.builders.emplace_back(compute_index(p.observed, kind, static_cast<std::size_t>(max_lag)), levels,
                                    files.size());
        }
        periods.push_back(std::move(p));
    }
    if (periods.empty()) fail(kExitEvaluation, "no evaluation period overlaps the observed record");

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex err_mu;
    std::size_t failed_id = std::numeric_limits<std::size_t>::max();
    std::string failed_what;

    auto worker = [&] {
        for (;;) {
            if (abort.load()) return;
            const std::size_t id = next.fetch_add(1);
            if (id >= files.size()) return;
            try {
                const OccurrenceRecord rep = binarize(load_record(files[id].string()), 1.0);
                if (rep.sites() != observed.sites()) {
                    throw AlignmentError("site list differs from the observed record");
                }
                for (Period& p : periods) {
                    OccurrenceRecord rp;
                    try {
                        rp = rep.slice(p.observed.calendar().start(), p.observed.calendar().end());
                    } catch (const DataError&) {
                        throw AlignmentError("does not cover the " + p.name + " period");
                    }
                    if (!(rp.calendar() == p.observed.calendar())) {
                        throw AlignmentError("covers " + format_date(rp.calendar().start()) + " .. " +
                                             format_date(rp.calendar().end()) + " but the observed " + p.name +
                                             " period is " + format_date(p.observed.calendar().start()) +
                                             " .. " + format_date(p.observed.calendar().end()));
                    }
                    for (std::size_t i = 0; i < kinds.size(); ++i) {
                        p.builders[i].add(id, compute_index(rp, kinds[i], static_cast<std::size_t>(max_lag)));
                    }
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (id < failed_id) {
                    failed_id = id;
                    failed_what = e.what();
                }
                abort.store(true);
                return;
            }
        }
    };
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(r.threads, files.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (abort.load()) fail(kExitEvaluation, "replicate " + std::to_string(failed_id) + ": " + failed_what);

    ojson reports = ojson::array();
    ojson period_doc = ojson::object();
    for (Period& p : periods) {
        period_doc[p.name] = {format_date(p.observed.calendar().start()), format_date(p.observed.calendar().end())};
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            const EnsembleComparison cmp = p.builders[i].finish();
            const std::string stem = "reports/" + file_stem(kinds[i]) + "-" + p.name;
            std::ostringstream csv;
            write_report_csv(csv, cmp);
            write_file_atomic(r.out / (stem + ".csv"), csv.str());
            write_file_atomic(r.out / (stem + ".json"), to_text(report_json(cmp, p.name)));
            reports.push_back(stem + ".csv");
            reports.push_back(stem + ".json");
            if (emit_svg) {
                std::ostringstream svg;
                write_report_svg(svg, cmp, to_string(kinds[i]) + " (" + p.name + ")");
                write_file_atomic(r.out / (stem + ".svg"), svg.str());
                reports.push_back(stem + ".svg");
            }
        }
    }

    ojson echo;
    echo["command"] = "evaluate";
    echo["input"] = r.rel(*input);
    echo["manifest"] = r.rel(manifest_path);
    echo["wet_threshold_mm"] = thr;
    echo["max_lag"] = max_lag;
    echo["calibration_start"] = format_date(cs);
    echo["calibration_end"] = format_date(ce);
    echo["validation_start"] = format_date(vs);
    echo["validation_end"] = format_date(ve);
    echo["levels"] = levels;
    echo["emit_svg"] = emit_svg;
    echo["out"] = ".";
    write_file_atomic(r.out / "config-evaluate.json", to_text(echo));

    ojson section;
    section["observed"] = r.rel(*input);
    section["replicates"] = files.size();
    section["periods"] = std::move(period_doc);
    section["reports"] = std::move(reports);
    section["config"] = "config-evaluate.json";
    update_manifest(r.out, "evaluate", std::move(section), {});

    out << "evaluate: " << files.size() << " replicates, " << periods.size() << " period(s) -> "
        << (r.out / "reports").string() << '\n';
    return kExitOk;
}

// --- synth -------------------------------------------------------------------

struct SynthArgs {
    Common common;
    std::optional<std::string> truth;
    std::optional<std::int64_t> sites;
    std::optional<std::int64_t> max_lag;
    std::optional<std::int64_t> years;
    std::optional<std::int64_t> start_year;
    std::optional<double> missing_rate;
    std::optional<double> threshold;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const Resolved r = resolve_common(a.common, "synth");
    const std::optional<std::string> truth_path = r.opt_str(a.truth, "truth");
    const std::int64_t n_sites = r.integer(a.sites, "sites", 4);
    const std::int64_t max_lag = r.integer(a.max_lag, "max_lag", static_cast<std::int64_t>(kDefaultMaxLag));
    const std::int64_t years = r.integer(a.years, "years", 41);
    const std::int64_t start_year = r.integer(a.start_year, "start_year", 1961);
    const double missing_rate = r.num(a.missing_rate, "missing_rate", 0.0);
    const double thr = r.num(a.threshold, "wet_threshold_mm", kDefaultWetThresholdMm);
    if (years <= 0) throw UsageError("years must be positive");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw UsageError("missing_rate must lie in [0, 1)");

    FittedModel truth;
    PrecipRecord rec;
    try {
        if (truth_path) {
            ojson doc;
            try {
                doc = ojson::parse(read_file(*truth_path));
            } catch (const nlohmann::json::exception& e) {
                throw DataError(std::string("truth: invalid JSON: ") + e.what());
            }
            truth = truth_from_json(doc);
        } else {
            if (n_sites <= 0 || max_lag < 0) throw UsageError("sites must be positive and max_lag non-negative");
            truth = default_truth_model(static_cast<std::size_t>(n_sites), static_cast<std::size_t>(max_lag), thr);
        }
        truth.provenance.source = "synthetic";
        rec = synth_record(truth, static_cast<int>(start_year), static_cast<int>(years), r.seed, missing_rate);
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        fail(kExitData, std::string("invalid truth parameters: ") + e.what());
    }

    const std::string record = record_text(rec);
    const std::string truth_text = dump_model(truth);
    write_file_atomic(r.out / "record.csv", record);
    write_file_atomic(r.out / "truth.json", truth_text);

    ojson echo;
    echo["command"] = "synth";
    if (truth_path) {
        echo["truth"] = r.rel(*truth_path);
    } else {
        echo["sites"] = n_sites;
        echo["max_lag"] = max_lag;
        echo["wet_threshold_mm"] = thr;
    }
    echo["years"] = years;
    echo["start_year"] = start_year;
    echo["missing_rate"] = missing_rate;
    echo["seed"] = r.seed;
    echo["out"] = ".";
    write_file_atomic(r.out / "config-synth.json", to_text(echo));

    ojson section;
    section["record"] = "record.csv";
    section["record_digest"] = sha256_hex(record);
    section["truth"] = "truth.json";
    section["truth_digest"] = sha256_hex(truth_text);
    section["seed"] = r.seed;
    section["config"] = "config-synth.json";
    update_manifest(r.out, "synth", std::move(section), {});

    out << "synth: " << truth.n_sites() << " sites x " << rec.n_days() << " days -> "
        << (r.out / "record.csv").string() << '\n';
    return kExitOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
    if (dynamic_cast<const DataError*>(&e)) return kExitData;
    if (dynamic_cast<const EstimationError*>(&e)) return kExitEstimation;
    if (dynamic_cast<const SimulationError*>(&e)) return kExitSimulation;
    if (dynamic_cast<const EvaluationError*>(&e)) return kExitEvaluation;
    return kExitUsage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multisite daily precipitation occurrence: fit, simulate, evaluate", "latocc"};
    app.require_subcommand(1);

    FitArgs fa;
    CLI::App* fit_cmd = app.add_subcommand("fit", "estimate a model from an observed record");
    add_common(fit_cmd, fa.common);
    fit_cmd->add_option("--input", fa.input, "observed depth record (CSV/TSV)");
    fit_cmd->add_option("--wet-threshold", fa.threshold, "wet-day threshold in mm (default 1.0)");
    fit_cmd->add_option("--max-lag", fa.max_lag, "temporal order r (default 2)");
    fit_cmd->add_option("--eps2", fa.eps2, "eigenvalue floor (default 0.05)");
    add_periods(fit_cmd, fa.cal_start, fa.cal_end, fa.val_start, fa.val_end);

    SimArgs sa;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "generate an ensemble from a fitted model");
    add_common(sim_cmd, sa.common);
    sim_cmd->add_option("--model", sa.model, "model file (default <out>/model.json)");
    sim_cmd->add_option("--start", sa.start, std::string("first simulated day (default ") + kCalibrationStart + ")");
    sim_cmd->add_option("--end", sa.end, std::string("last simulated day (default ") + kValidationEnd + ")");
    sim_cmd->add_option("-n,--n-replicates", sa.n_replicates, "ensemble size (default 1000)");
    sim_cmd->add_flag("--as-depth", sa.as_depth, "write 1.0/0.0 depths instead of 1/0 states");

    EvalArgs ea;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "compare an ensemble with the observed record");
    add_common(eval_cmd, ea.common);
    eval_cmd->add_option("--input", ea.input, "observed depth record");
    eval_cmd->add_option("--manifest", ea.manifest, "ensemble manifest (default <out>/manifest.json)");
    eval_cmd->add_option("--wet-threshold", ea.threshold, "wet-day threshold in mm (default 1.0)");
    eval_cmd->add_option("--max-lag", ea.max_lag, "largest lag for LAG_CORR (default 2)");
    add_periods(eval_cmd, ea.cal_start, ea.cal_end, ea.val_start, ea.val_end);
    eval_cmd->add_option("--levels", ea.levels, "ensemble quantile levels (default 0.05 0.95)");
    eval_cmd->add_flag("--emit-svg", ea.emit_svg, "also write SVG plots");

    SynthArgs ya;
    CLI::App* synth_cmd = app.add_subcommand("synth", "write a synthetic record from a truth model");
    add_common(synth_cmd, ya.common);
    synth_cmd->add_option("--truth", ya.truth, "truth parameters (JSON); built-in defaults otherwise");
    synth_cmd->add_option("--sites", ya.sites, "sites for the built-in truth (default 4)");
    synth_cmd->add_option("--max-lag", ya.max_lag, "temporal order for the built-in truth (default 2)");
    synth_cmd->add_option("--years", ya.years, "record length in years (default 41)");
    synth_cmd->add_option("--start-year", ya.start_year, "first year (default 1961)");
    synth_cmd->add_option("--missing-rate", ya.missing_rate, "per-cell missing probability (default 0)");
    synth_cmd->add_option("--wet-threshold", ya.threshold, "threshold recorded in the truth model");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "latocc: " << e.what() << "\n" << "run 'latocc --help' for usage\n";
        return kExitUsage;
    }

    std::string name;
    try {
        if (fit_cmd->parsed()) {
            name = "fit";
            return cmd_fit(fa, out);
        }
        if (sim_cmd->parsed()) {
            name = "simulate";
            return cmd_simulate(sa, out);
        }
        if (eval_cmd->parsed()) {
            name = "evaluate";
            return cmd_evaluate(ea, out);
        }
        name = "synth";
        return cmd_synth(ya, out);
    } catch (const CommandFailure& e) {
        err << "latocc " << name << ": error: " << e.what() << '\n';
        return e.code();
    } catch (const std::exception& e) {
        err << "latocc " << name << ": error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace latocc
