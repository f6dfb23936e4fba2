#pragma once

// The four CLI workflows as plain functions over parsed arguments. They return
// the process exit code and write human-readable output to the given streams,
// so tests can drive them without spawning a process.

#include "aadt/aadt.hpp"
#include "aadt/fetch.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace aadt::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDegraded = 2;

/// Default fold seed unless AADT_SEED is set to an unsigned integer.
inline std::uint64_t default_seed()
{
    if (const char* env = std::getenv("AADT_SEED")) {
        auto v = csv::parse_int(env);
        if (!v || *v < 0) throw Error(Errc::BadConfig, std::string("AADT_SEED must be a non-negative integer, got '") + env + "'");
        return static_cast<std::uint64_t>(*v);
    }
    return 0;
}

/// Reproducibility record written next to each command's output.
class RunManifest {
public:
    explicit RunManifest(std::string subcommand)
        : started_(std::chrono::system_clock::now()), stage_start_(std::chrono::steady_clock::now())
    {
        doc_["subcommand"] = std::move(subcommand);
        doc_["inputs"] = nlohmann::json::object();
        doc_["stages"] = nlohmann::json::object();
    }

    void input(const std::string& name, const fs::path& p) { doc_["inputs"][name] = fs::absolute(p).lexically_normal().string(); }
    void set(const std::string& key, nlohmann::json v) { doc_[key] = std::move(v); }

    /// Closes the current stage and starts timing the next one.
    void stage(const std::string& name)
    {
        const auto now = std::chrono::steady_clock::now();
        doc_["stages"][name] = std::chrono::duration<double>(now - stage_start_).count();
        stage_start_ = now;
    }

    void write(const fs::path& output, const fs::path& manifest_path)
    {
        doc_["output"] = fs::absolute(output).lexically_normal().string();
        doc_["started_at"] = iso_time(started_);
        doc_["finished_at"] = iso_time(std::chrono::system_clock::now());
        write_text_file(manifest_path, doc_.dump(2) + "\n");
    }

private:
    static std::string iso_time(std::chrono::system_clock::time_point tp)
    {
        auto t = std::chrono::system_clock::to_time_t(tp);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    nlohmann::json doc_;
    std::chrono::system_clock::time_point started_;
    std::chrono::steady_clock::time_point stage_start_;
};

/// Prints "progress: N%" whenever the integer percentage increases.
class PercentPrinter {
public:
    explicit PercentPrinter(std::ostream& out) : out_(&out) {}
    void operator()(std::size_t done, std::size_t total)
    {
        const int pct = total == 0 ? 100 : static_cast<int>(100 * done / total);
        if (pct <= last_) return;
        last_ = pct;
        *out_ << "progress: " << pct << "%" << std::endl;
    }

private:
    std::ostream* out_;
    int last_ = -1;
};

inline std::optional<int> parse_year(std::string_view text)
{
    if (text.size() != 4) return std::nullopt;
    for (char ch : text)
        if (ch < '0' || ch > '9') return std::nullopt;
    return static_cast<int>(*csv::parse_int(text));
}

/// Most frequent calendar year among the dated rows of the stations' ATR files.
inline int infer_atr_year(const fs::path& dir, const std::vector<AtrStationMeta>& stations)
{
    std::map<int, std::size_t> counts;
    for (const auto& m : stations) {
        const auto path = dir / atr_file_name(m.key);
        if (!fs::is_regular_file(path)) continue;
        for (const auto& row : csv::read_rows(read_text_file(path)))
            if (auto d = parse_date(row.cells.front())) ++counts[static_cast<int>(d->year())];
    }
    if (counts.empty()) throw Error(Errc::MissingStationFile, "no dated ATR rows found under " + dir.string());
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

// ---------------------------------------------------------------------------

struct FetchArgs {
    fs::path config;
    fs::path atr_list;
    std::string year;
    fs::path out;
};

inline int cmd_fetch(const FetchArgs& a, std::ostream& out, std::ostream& err)
{
    try {
        const auto year = parse_year(a.year);
        if (!year) {
            err << "error: --year must be a four-digit year (e.g. 2017), got '" << a.year << "'\n";
            return kExitError;
        }
        RunManifest manifest("fetch");
        manifest.input("config", a.config);
        manifest.input("atr_list", a.atr_list);
        const FetchConfig cfg = parse_fetch_config(read_text_file(a.config));
        const auto stations = parse_atr_list(read_text_file(a.atr_list));
        manifest.stage("read_inputs");

        PercentPrinter progress(err);
        const FetchReport report = fetch_atr_data(cfg, stations, *year, a.out, std::ref(progress));
        manifest.stage("fetch");
        nlohmann::json failures = nlohmann::json::object();
        for (const auto& r : report.results) {
            if (r.ok) out << "ok     " << to_string(r.key) << " -> " << r.file.string() << "\n";
            else {
                out << "FAILED " << to_string(r.key) << ": " << r.error << "\n";
                failures[to_string(r.key)] = r.error;
            }
        }
        out << "fetched " << report.succeeded() << " of " << report.results.size() << " station(s)\n";
        manifest.set("year", *year);
        manifest.set("succeeded", report.succeeded());
        manifest.set("failures", failures);
        manifest.write(a.out, a.out / "fetch_manifest.json");
        return report.succeeded() > 0 ? kExitOk : kExitDegraded;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------

struct ModelInputs {
    fs::path atr_dir;
    fs::path atr_list;
    std::optional<fs::path> mapping;
    std::optional<int> year;
    std::size_t max_days_per_station = 0; // 0 = every complete day
};

struct LoadedTraining {
    GroupMapping mapping;
    int year = 0;
    std::vector<AtrYearData> atr;
    TrainingSets sets;
};

inline LoadedTraining load_training(const ModelInputs& in, RunManifest& manifest, std::ostream& err)
{
    manifest.input("atr_dir", in.atr_dir);
    manifest.input("atr_list", in.atr_list);
    LoadedTraining t;
    t.mapping = GroupMapping::defaults();
    if (in.mapping) {
        manifest.input("mapping", *in.mapping);
        t.mapping = parse_group_mapping(read_text_file(*in.mapping));
    }
    const auto stations = parse_atr_list(read_text_file(in.atr_list));
    t.year = in.year ? *in.year : infer_atr_year(in.atr_dir, stations);
    auto loaded = load_atr_year(in.atr_dir, stations, t.year);
    for (const auto& w : loaded.warnings) err << "warning: " << w << "\n";
    t.atr = std::move(loaded.stations);
    t.sets = build_training_set(t.atr, stations, t.mapping, in.max_days_per_station);
    manifest.set("year", t.year);
    manifest.set("max_days_per_station", in.max_days_per_station);
    nlohmann::json sizes = nlohmann::json::object();
    for (ModelGroup g : kAllGroups) sizes[std::string(group_name(g))] = t.sets[group_index(g)].size();
    manifest.set("training_samples", sizes);
    return t;
}

struct TrainArgs {
    ModelInputs inputs;
    std::optional<fs::path> params_in;
    bool grid = false;
    fs::path params_out;
    tuning::GridSpec spec; // seed is filled from AADT_SEED unless seed_set
    bool seed_set = false;
};

inline int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err)
{
    try {
        if (a.grid == a.params_in.has_value()) {
            err << "error: give exactly one of --params-in or --grid\n";
            return kExitError;
        }
        RunManifest manifest("train");
        tuning::GridSpec spec = a.spec;
        if (!a.seed_set) spec.seed = default_seed();

        TrainingPlan plan = spec;
        if (a.params_in) {
            manifest.input("params_in", *a.params_in);
            plan = parse_hyperparams(read_text_file(*a.params_in));
        }
        const auto t = load_training(a.inputs, manifest, err);
        manifest.stage("load");

        PercentPrinter pct(err);
        TrainResult result = train_suite(t.sets, plan, TrainProgress{std::ref(pct)}, spec.epsilon, spec.tol);
        pct(1, 1);
        manifest.stage(a.grid ? "grid_search_and_fit" : "fit");

        for (ModelGroup g : kAllGroups) {
            const auto& hp = result.params[g];
            out << group_name(g) << ": C=" << csv::format_double(hp.c) << " gamma=" << csv::format_double(hp.gamma);
            if (result.suite.trained(g)) {
                const auto& m = result.suite.model(g);
                out << " samples=" << m.training_size << " support_vectors=" << m.support_vectors.size();
            } else {
                out << " (untrained: " << result.suite.untrained_reason[group_index(g)] << ")";
            }
            out << "\n";
        }
        write_text_file(a.params_out, write_hyperparams(result.params));
        out << "wrote " << a.params_out.string() << "\n";

        if (a.grid) {
            manifest.set("seed", spec.seed);
            manifest.set("grid_step", spec.step);
            manifest.set("folds", spec.folds);
            manifest.set("max_iterations", spec.max_iterations);
            nlohmann::json searches = nlohmann::json::object();
            for (ModelGroup g : kAllGroups) {
                const auto& cv = result.searches[group_index(g)];
                if (!cv) continue;
                std::size_t skipped = 0;
                for (const auto& c : cv->cells) skipped += c.converged ? 0 : 1;
                searches[std::string(group_name(g))] = {{"best_mse", cv->best.mse}, {"cells", cv->cells.size()},
                                                        {"non_converged_cells", skipped}};
            }
            manifest.set("grid", searches);
        }
        manifest.stage("write");
        manifest.write(a.params_out, fs::path(a.params_out.string() + ".manifest.json"));
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
    fs::path counts;
    fs::path factors;
    fs::path params;
    ModelInputs inputs;
    fs::path out_dir;
    std::optional<Timestamp> timestamp; // defaults to the local time
};

inline int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err)
{
    try {
        RunManifest manifest("estimate");
        manifest.input("counts", a.counts);
        manifest.input("factors", a.factors);
        manifest.input("params", a.params);
        const auto records = parse_short_term_counts(read_text_file(a.counts));
        const auto factors = parse_expansion_factors(read_text_file(a.factors));
        const auto params = parse_hyperparams(read_text_file(a.params));
        manifest.stage("read_inputs");

        std::vector<EstimateRecord> rows;
        if (!records.empty()) {
            const auto t = load_training(a.inputs, manifest, err);
            manifest.stage("load_atr");
            const TrainResult trained = train_suite(t.sets, params);
            manifest.stage("fit");
            rows = aggregate_estimates(estimate_records(records, trained.suite, t.mapping, factors));
            manifest.stage("estimate");
        }
        fs::create_directories(a.out_dir);
        const auto path = write_output(rows, a.timestamp.value_or(Timestamp::now()), a.out_dir);
        manifest.set("records", records.size());
        manifest.set("stations", rows.size());
        manifest.write(path, fs::path(path.string() + ".manifest.json"));
        out << path.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    fs::path predictions;
    fs::path truth;
    fs::path out;
    std::optional<fs::path> mapping;
    bool round_per_row = false;
};

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err)
{
    try {
        RunManifest manifest("evaluate");
        manifest.input("predictions", a.predictions);
        manifest.input("truth", a.truth);
        GroupMapping mapping = GroupMapping::defaults();
        if (a.mapping) {
            manifest.input("mapping", *a.mapping);
            mapping = parse_group_mapping(read_text_file(*a.mapping));
        }
        const auto estimates = parse_output(read_text_file(a.predictions));
        const auto truth = parse_truth(read_text_file(a.truth));
        const auto rows = eval::join_with_truth(estimates, truth, mapping);
        const std::string report = eval::format_report(eval::summarize(rows, a.round_per_row));
        if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
        write_text_file(a.out, report);
        manifest.set("round_per_row", a.round_per_row);
        manifest.set("rows", rows.size());
        manifest.stage("evaluate");
        manifest.write(a.out, fs::path(a.out.string() + ".manifest.json"));
        out << report;
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace aadt::cli
