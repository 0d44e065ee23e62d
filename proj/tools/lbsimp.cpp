// lbsimp: point-set simplification toolkit.
//
// Subcommands: gen, simplify, metrics, eig, hks, embed.
// Exit codes: 0 success, 1 runtime/pipeline failure, 2 usage/validation.
// Option precedence: command-line flags > --config JSON > built-in defaults.

#include "lbs/dataset.hpp"
#include "lbs/feature.hpp"
#include "lbs/knn.hpp"
#include "lbs/laplacian.hpp"
#include "lbs/metrics.hpp"
#include "lbs/parallel.hpp"
#include "lbs/pca.hpp"
#include "lbs/simplify.hpp"
#include "lbs/spectrum.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using lbs::Index;

// Thrown for bad option values; mapped to exit code 2 like parse errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

lbs::DataFormat parse_format(const std::string& name) {
    if (name == "csv") return lbs::DataFormat::Csv;
    if (name == "raw-f64") return lbs::DataFormat::RawF64;
    throw UsageError("unknown format '" + name + "' (expected csv or raw-f64)");
}

lbs::StopRule parse_stop(const std::string& text) {
    lbs::StopRule rule;
    if (text.empty()) return rule;  // budget mode
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw UsageError("stop rule must look like rate=0.2, dkl=0.1 or "
                         "dh=0.5, got '" + text + "'");
    }
    const std::string key = text.substr(0, eq);
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(text.substr(eq + 1), &used);
        if (used != text.size() - eq - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw UsageError("stop threshold is not a number in '" + text + "'");
    }
    if (key == "rate") {
        rule.kind = lbs::StopRule::Kind::Rate;
    } else if (key == "dkl") {
        rule.kind = lbs::StopRule::Kind::DKl;
    } else if (key == "dh") {
        rule.kind = lbs::StopRule::Kind::DH;
    } else {
        throw UsageError("unknown stop rule '" + key +
                         "' (expected rate, dkl or dh)");
    }
    rule.threshold = value;
    return rule;
}

// Bandwidth option: the string "auto" or a positive real.
double parse_bandwidth(const std::string& text) {
    if (text == "auto") return 0.0;
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("");
        if (!(value > 0.0)) {
            throw UsageError("bandwidth must be positive, got '" + text + "'");
        }
        return value;
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("bandwidth must be 'auto' or a positive number, "
                         "got '" + text + "'");
    }
}

void require(const std::string& value, const std::string& flag) {
    if (value.empty()) throw UsageError("missing required option " + flag);
}

// ---------------------------------------------------------------------------
// config file support

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw UsageError("malformed config file " + path + ": " + e.what());
    }
    if (!cfg.is_object()) {
        throw UsageError("config file must hold a JSON object: " + path);
    }
    return cfg;
}

// Pre-scan so config values can seed defaults before CLI11 parses flags.
std::string find_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) {
            return arg.substr(std::string("--config=").size());
        }
    }
    return {};
}

template <typename T>
void seed(const json& cfg, const char* key, T& field) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) return;
    try {
        field = it->get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("config key '") + key +
                         "' has the wrong type");
    }
}

// ---------------------------------------------------------------------------
// manifest

class Manifest {
  public:
    explicit Manifest(std::string command) {
        j_["command"] = std::move(command);
        j_["warnings"] = json::array();
        j_["outputs"] = json::array();
        j_["inputs"] = json::object();
        j_["timings_seconds"] = json::object();
    }

    json& config() { return j_["config"]; }

    void input(const std::string& path) {
        j_["inputs"][path] = lbs::file_fnv1a64(path);
    }
    void timing(const std::string& stage, double secs) {
        j_["timings_seconds"][stage] = secs;
    }
    void warning(const std::string& text) { j_["warnings"].push_back(text); }
    void output(const std::string& path) { j_["outputs"].push_back(path); }
    void extra(const std::string& key, json value) {
        j_[key] = std::move(value);
    }

    void write(const std::string& path) {
        j_["outputs"].push_back(path);
        std::ofstream out(path);
        if (!out) {
            throw std::runtime_error("cannot open file for writing: " + path);
        }
        out << j_.dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed: " + path);
    }

  private:
    json j_;
};

std::string default_manifest_path(const std::string& primary_out) {
    return primary_out + ".manifest.json";
}

// ---------------------------------------------------------------------------
// small output helpers

void write_csv(const std::string& path,
                       const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out << ',';
        out << header[c];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << row[c];
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string fmt(double v) { return lbs::format_double(v); }

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
    std::int64_t n = 0;
    double noise = 0.0;
    std::int64_t seed = 0;
    std::string out;
    std::string format = "csv";
    std::string manifest;
};

int cmd_gen(const GenArgs& args) {
    require(args.out, "--out");
    const auto start = Clock::now();
    lbs::DataSet data = lbs::generate_swiss_roll(
        static_cast<Index>(args.n), args.noise,
        static_cast<std::uint64_t>(args.seed));
    lbs::save_dataset(data, args.out, parse_format(args.format));

    Manifest manifest("gen");
    manifest.config() = {{"n", args.n},
                         {"noise", args.noise},
                         {"seed", args.seed},
                         {"out", args.out},
                         {"format", args.format}};
    manifest.timing("total", seconds_since(start));
    manifest.output(args.out);
    if (parse_format(args.format) == lbs::DataFormat::RawF64) {
        manifest.output(args.out + ".json");
    }
    manifest.write(args.manifest.empty() ? default_manifest_path(args.out)
                                         : args.manifest);
    return 0;
}

// ---------------------------------------------------------------------------
// simplify

struct SimplifyArgs {
    std::string in;
    std::string format = "csv";
    std::int64_t k = 10;
    std::string bandwidth = "auto";
    std::int64_t eigs = 30;
    std::string stop;
    std::int64_t bins = 100;
    std::string out_dir;
    std::string manifest;
};

int cmd_simplify(const SimplifyArgs& args) {
    require(args.in, "--in");
    require(args.out_dir, "--out-dir");

    lbs::SimplificationConfig config;
    config.k = static_cast<Index>(args.k);
    config.bandwidth = parse_bandwidth(args.bandwidth);
    config.max_eigenvectors = static_cast<Index>(args.eigs);
    config.stop = parse_stop(args.stop);
    config.kl_bins = static_cast<Index>(args.bins);
    lbs::validate_config(config);

    const lbs::DataSet data = lbs::load_dataset(args.in, parse_format(args.format));
    const lbs::SimplificationResult result = lbs::simplify(data, config);

    const std::string dir =
        args.out_dir.back() == '/' ? args.out_dir : args.out_dir + "/";

    Manifest manifest("simplify");
    manifest.config() = {{"in", args.in},       {"format", args.format},
                         {"k", args.k},         {"bandwidth", args.bandwidth},
                         {"eigs", args.eigs},   {"stop", args.stop},
                         {"bins", args.bins},   {"out-dir", args.out_dir}};
    manifest.input(args.in);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t s = 0; s < result.steps.size(); ++s) {
        const auto& step = result.steps[s];
        std::vector<std::string> row;
        row.push_back(std::to_string(s + 1));
        row.push_back(std::to_string(step.eigenvector_index));
        row.push_back(std::to_string(step.cumulative.size()));
        row.push_back(fmt(static_cast<double>(step.cumulative.size()) /
                          static_cast<double>(data.size())));
        if (step.metrics) {
            row.push_back(fmt(step.metrics->d_kl));
            row.push_back(fmt(step.metrics->d_h));
            row.push_back(fmt(step.metrics->d_cov));
        } else {
            row.insert(row.end(), {"", "", ""});
        }
        rows.push_back(std::move(row));

        char name[32];
        std::snprintf(name, sizeof(name), "subset_eig%03lld.csv",
                      static_cast<long long>(step.eigenvector_index));
        const std::string subset_path = dir + name;
        lbs::save_subset(data, step.cumulative, subset_path);
        manifest.output(subset_path);
    }
    const std::string steps_path = dir + "steps.csv";
    write_csv(steps_path,
                      {"step", "eigenvector_index", "subset_size", "rate",
                       "d_kl", "d_h", "d_cov"},
                      rows);
    manifest.output(steps_path);

    manifest.timing("knn", result.timings.knn_seconds);
    manifest.timing("eigen", result.timings.eigen_seconds);
    manifest.timing("simplification", result.timings.simplification_seconds);
    for (const auto& w : result.warnings) manifest.warning(w);
    manifest.extra("eigenvalues", result.eigenvalues);
    manifest.extra("budget_exhausted", result.budget_exhausted);
    manifest.extra("eigenvalue_indexing",
                   "1-based; lambda_1 = 0 belongs to the constant "
                   "eigenvector, which contributes no feature points");
    manifest.write(args.manifest.empty() ? dir + "manifest.json"
                                         : args.manifest);
    return 0;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
    std::string full;
    std::string subset;
    std::string format = "csv";
    std::int64_t bins = 100;
    std::string out;
    std::string manifest;
};

// Maps each subset row to a distinct row of the full set by exact value
// equality (duplicates consume the lowest unused index first).
lbs::IndexSubset match_rows(const lbs::Matrix& full, const lbs::Matrix& sub) {
    if (full.cols() != sub.cols()) {
        throw std::runtime_error(
            "subset is not a row-subset of the full set: column counts "
            "differ");
    }
    std::map<std::vector<double>, std::vector<Index>> lookup;
    for (Index i = full.rows() - 1; i >= 0; --i) {
        std::vector<double> key(full.row(i).begin(), full.row(i).end());
        lookup[std::move(key)].push_back(i);  // descending; back() = lowest
    }
    std::vector<Index> indices;
    indices.reserve(static_cast<std::size_t>(sub.rows()));
    for (Index i = 0; i < sub.rows(); ++i) {
        std::vector<double> key(sub.row(i).begin(), sub.row(i).end());
        auto it = lookup.find(key);
        if (it == lookup.end() || it->second.empty()) {
            throw std::runtime_error(
                "subset is not a row-subset of the full set: row " +
                std::to_string(i) + " has no unused match");
        }
        indices.push_back(it->second.back());
        it->second.pop_back();
    }
    return lbs::IndexSubset::from_indices(std::move(indices));
}

int cmd_metrics(const MetricsArgs& args) {
    require(args.full, "--full");
    require(args.subset, "--subset");
    if (args.bins < 1) throw UsageError("--bins must be >= 1");

    const auto start = Clock::now();
    const lbs::DataFormat format = parse_format(args.format);
    const lbs::DataSet full = lbs::load_dataset(args.full, format);
    const lbs::DataSet sub = lbs::load_dataset(args.subset, format);
    const lbs::IndexSubset rows = match_rows(full.points, sub.points);
    const lbs::MetricReport report =
        lbs::compute_metrics(full, rows, static_cast<Index>(args.bins));

    const json report_json = lbs::report_to_json(report);
    if (args.out.empty()) {
        std::cout << report_json.dump(2) << '\n';
    } else {
        std::ofstream out(args.out);
        if (!out) {
            throw std::runtime_error("cannot open file for writing: " +
                                     args.out);
        }
        out << report_json.dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed: " + args.out);
    }

    Manifest manifest("metrics");
    manifest.config() = {{"full", args.full},
                         {"subset", args.subset},
                         {"format", args.format},
                         {"bins", args.bins},
                         {"out", args.out}};
    manifest.input(args.full);
    manifest.input(args.subset);
    manifest.timing("total", seconds_since(start));
    manifest.extra("report", report_json);
    if (!args.out.empty()) manifest.output(args.out);
    manifest.write(args.manifest.empty()
                       ? default_manifest_path(
                             args.out.empty() ? args.subset : args.out)
                       : args.manifest);
    return 0;
}

// ---------------------------------------------------------------------------
// eig

struct EigArgs {
    std::string in;
    std::string format = "csv";
    std::int64_t k = 10;
    std::string bandwidth = "auto";
    std::int64_t m = 10;
    std::string out;
    std::string manifest;
};

int cmd_eig(const EigArgs& args) {
    require(args.in, "--in");
    require(args.out, "--out");
    if (args.k < 1) throw UsageError("--k must be >= 1");
    if (args.m < 1) throw UsageError("--m must be >= 1");

    const lbs::DataSet data = lbs::load_dataset(args.in, parse_format(args.format));

    auto stage = Clock::now();
    const lbs::NeighborGraph graph =
        lbs::build_knn(data.points, static_cast<Index>(args.k));
    const double knn_seconds = seconds_since(stage);

    stage = Clock::now();
    const double t = [&] {
        const double explicit_t = parse_bandwidth(args.bandwidth);
        return explicit_t > 0.0 ? explicit_t : lbs::choose_bandwidth(graph);
    }();
    const lbs::LaplacianPair pair = lbs::build_laplacian(data.points, graph, t);
    const lbs::Spectrum spectrum =
        lbs::solve_spectrum(pair, static_cast<Index>(args.m));
    const double eigen_seconds = seconds_since(stage);

    std::vector<std::string> header;
    for (Index i = 1; i <= spectrum.size(); ++i) {
        header.push_back("phi_" + std::to_string(i));
    }
    std::vector<std::vector<std::string>> rows(
        static_cast<std::size_t>(data.size()));
    for (Index r = 0; r < data.size(); ++r) {
        auto& row = rows[static_cast<std::size_t>(r)];
        row.reserve(static_cast<std::size_t>(spectrum.size()));
        for (Index c = 0; c < spectrum.size(); ++c) {
            row.push_back(fmt(spectrum.eigenvectors(r, c)));
        }
    }
    write_csv(args.out, header, rows);

    json sidecar;
    sidecar["eigenvalues"] = spectrum.eigenvalues;
    sidecar["normalization"] = spectrum.normalization;
    sidecar["indexing"] = "1-based; lambda_1 = 0";
    sidecar["bandwidth"] = t;
    sidecar["k"] = args.k;
    sidecar["dense_fallback"] = spectrum.dense_fallback;
    {
        std::ofstream out(args.out + ".json");
        if (!out) {
            throw std::runtime_error("cannot open file for writing: " +
                                     args.out + ".json");
        }
        out << sidecar.dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed: " + args.out + ".json");
    }

    Manifest manifest("eig");
    manifest.config() = {{"in", args.in},   {"format", args.format},
                         {"k", args.k},     {"bandwidth", args.bandwidth},
                         {"m", args.m},     {"out", args.out}};
    manifest.input(args.in);
    manifest.timing("knn", knn_seconds);
    manifest.timing("eigen", eigen_seconds);
    for (const auto& w : pair.warnings) manifest.warning(w);
    manifest.output(args.out);
    manifest.output(args.out + ".json");
    manifest.write(args.manifest.empty() ? default_manifest_path(args.out)
                                         : args.manifest);
    return 0;
}

// ---------------------------------------------------------------------------
// hks

struct HksArgs {
    std::string spectrum;
    double t = 1.0;
    std::string out;
    std::string manifest;
};

int cmd_hks(const HksArgs& args) {
    require(args.spectrum, "--spectrum");
    require(args.out, "--out");
    if (!(args.t > 0.0)) throw UsageError("--t must be positive");

    const auto start = Clock::now();
    const lbs::DataSet vectors =
        lbs::load_dataset(args.spectrum, lbs::DataFormat::Csv);

    const std::string sidecar_path = args.spectrum + ".json";
    std::ifstream sidecar_in(sidecar_path);
    if (!sidecar_in) {
        throw std::runtime_error("missing eigenvalue sidecar: " + sidecar_path);
    }
    json sidecar;
    try {
        sidecar_in >> sidecar;
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed eigenvalue sidecar " +
                                 sidecar_path + ": " + e.what());
    }
    if (!sidecar.contains("eigenvalues")) {
        throw std::runtime_error("eigenvalue sidecar lacks 'eigenvalues': " +
                                 sidecar_path);
    }
    lbs::Spectrum spectrum;
    spectrum.eigenvalues = sidecar["eigenvalues"].get<std::vector<double>>();
    if (static_cast<Index>(spectrum.eigenvalues.size()) != vectors.dim()) {
        throw std::runtime_error(
            "eigenvalue count does not match eigenvector columns");
    }
    spectrum.eigenvectors = vectors.points;

    const lbs::ScalarField field = lbs::hks_diag(spectrum, args.t);
    std::vector<std::vector<std::string>> rows(
        static_cast<std::size_t>(field.size()));
    for (Index i = 0; i < field.size(); ++i) {
        rows[static_cast<std::size_t>(i)].push_back(fmt(field.values[i]));
    }
    write_csv(args.out, {"hks"}, rows);

    Manifest manifest("hks");
    manifest.config() = {
        {"spectrum", args.spectrum}, {"t", args.t}, {"out", args.out}};
    manifest.input(args.spectrum);
    manifest.input(sidecar_path);
    manifest.timing("total", seconds_since(start));
    manifest.output(args.out);
    manifest.write(args.manifest.empty() ? default_manifest_path(args.out)
                                         : args.manifest);
    return 0;
}

// ---------------------------------------------------------------------------
// embed

struct EmbedArgs {
    std::string fit_on;
    std::string project;
    std::string format = "csv";
    std::int64_t p = 2;
    std::string out;
    std::string compare;
    std::string hist_out;
    std::string distances_out;
    std::int64_t bins = 50;
    std::string manifest;
};

int cmd_embed(const EmbedArgs& args) {
    require(args.fit_on, "--fit-on");
    require(args.project, "--project");
    require(args.out, "--out");
    if (args.p < 1) throw UsageError("--p must be >= 1");
    if (args.bins < 1) throw UsageError("--bins must be >= 1");

    const lbs::DataFormat format = parse_format(args.format);
    const lbs::DataSet fit_data = lbs::load_dataset(args.fit_on, format);
    const lbs::DataSet project_data = lbs::load_dataset(args.project, format);

    auto stage = Clock::now();
    const lbs::PcaModel model =
        lbs::pca_fit(fit_data.points, static_cast<Index>(args.p));
    const double fit_seconds = seconds_since(stage);

    stage = Clock::now();
    const lbs::Matrix coords = lbs::pca_project(model, project_data.points);
    const double project_seconds = seconds_since(stage);

    std::vector<std::string> header;
    for (Index c = 1; c <= coords.cols(); ++c) {
        header.push_back("pc" + std::to_string(c));
    }
    std::vector<std::vector<std::string>> rows(
        static_cast<std::size_t>(coords.rows()));
    for (Index r = 0; r < coords.rows(); ++r) {
        auto& row = rows[static_cast<std::size_t>(r)];
        for (Index c = 0; c < coords.cols(); ++c) {
            row.push_back(fmt(coords(r, c)));
        }
    }
    write_csv(args.out, header, rows);

    Manifest manifest("embed");
    manifest.config() = {{"fit-on", args.fit_on}, {"project", args.project},
                         {"format", args.format}, {"p", args.p},
                         {"out", args.out},       {"compare", args.compare},
                         {"bins", args.bins}};
    manifest.input(args.fit_on);
    manifest.input(args.project);
    manifest.timing("fit", fit_seconds);
    manifest.timing("projection", project_seconds);
    manifest.output(args.out);
    manifest.extra("explained_variances",
                   std::vector<double>(model.explained.data(),
                                       model.explained.data() +
                                           model.explained.size()));

    if (!args.compare.empty()) {
        const lbs::DataSet other =
            lbs::load_dataset(args.compare, lbs::DataFormat::Csv);
        manifest.input(args.compare);
        const lbs::CorrespondenceResult corr = lbs::correspondence_error(
            coords, other.points, static_cast<Index>(args.bins));
        if (!args.distances_out.empty()) {
            std::vector<std::vector<std::string>> drows(
                corr.distances.size());
            for (std::size_t i = 0; i < corr.distances.size(); ++i) {
                drows[i].push_back(fmt(corr.distances[i]));
            }
            write_csv(args.distances_out, {"distance"}, drows);
            manifest.output(args.distances_out);
        }
        if (!args.hist_out.empty()) {
            std::vector<std::vector<std::string>> hrows(
                corr.histogram.size());
            for (std::size_t i = 0; i < corr.histogram.size(); ++i) {
                hrows[i].push_back(fmt(corr.histogram[i].low));
                hrows[i].push_back(fmt(corr.histogram[i].high));
                hrows[i].push_back(std::to_string(corr.histogram[i].count));
            }
            write_csv(args.hist_out, {"bin_low", "bin_high", "count"},
                              hrows);
            manifest.output(args.hist_out);
        }
    }
    manifest.write(args.manifest.empty() ? default_manifest_path(args.out)
                                         : args.manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Point-set simplification via spectral feature points"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON file with default option values");
    std::int64_t threads = 0;
    app.add_option("--threads", threads,
                   "worker thread cap (0 = hardware concurrency)")
        ->envname("LBSIMP_THREADS");

    json cfg = json::object();

    GenArgs gen_args;
    SimplifyArgs simplify_args;
    MetricsArgs metrics_args;
    EigArgs eig_args;
    HksArgs hks_args;
    EmbedArgs embed_args;

    try {
        const std::string pre_config = find_config_path(argc, argv);
        if (!pre_config.empty()) cfg = load_config_file(pre_config);
        seed(cfg, "threads", threads);

        // gen
        seed(cfg, "n", gen_args.n);
        seed(cfg, "noise", gen_args.noise);
        seed(cfg, "seed", gen_args.seed);
        seed(cfg, "format", gen_args.format);
        auto* gen_cmd = app.add_subcommand("gen", "generate a swiss roll");
        gen_cmd->add_option("--n", gen_args.n, "point count");
        gen_cmd->add_option("--noise", gen_args.noise,
                            "Gaussian noise standard deviation");
        gen_cmd->add_option("--seed", gen_args.seed, "generator seed");
        gen_cmd->add_option("--out", gen_args.out, "output dataset path");
        gen_cmd->add_option("--format", gen_args.format, "csv or raw-f64");
        gen_cmd->add_option("--manifest", gen_args.manifest, "manifest path");

        // simplify
        seed(cfg, "format", simplify_args.format);
        seed(cfg, "k", simplify_args.k);
        seed(cfg, "bandwidth", simplify_args.bandwidth);
        seed(cfg, "eigs", simplify_args.eigs);
        seed(cfg, "stop", simplify_args.stop);
        seed(cfg, "bins", simplify_args.bins);
        auto* simplify_cmd =
            app.add_subcommand("simplify", "run the full pipeline");
        simplify_cmd->add_option("--in", simplify_args.in, "input dataset");
        simplify_cmd->add_option("--format", simplify_args.format,
                                 "csv or raw-f64");
        simplify_cmd->add_option("--k", simplify_args.k, "neighbor count");
        simplify_cmd->add_option("--bandwidth", simplify_args.bandwidth,
                                 "'auto' or a positive value");
        simplify_cmd->add_option("--eigs", simplify_args.eigs,
                                 "eigenvector budget");
        simplify_cmd->add_option("--stop", simplify_args.stop,
                                 "rate=<x>, dkl=<x> or dh=<x>");
        simplify_cmd->add_option("--bins", simplify_args.bins,
                                 "histogram bins for d_kl");
        simplify_cmd->add_option("--out-dir", simplify_args.out_dir,
                                 "output directory (created beforehand)");
        simplify_cmd->add_option("--manifest", simplify_args.manifest,
                                 "manifest path");

        // metrics
        seed(cfg, "format", metrics_args.format);
        seed(cfg, "bins", metrics_args.bins);
        auto* metrics_cmd =
            app.add_subcommand("metrics", "fidelity of a subset file");
        metrics_cmd->add_option("--full", metrics_args.full, "full dataset");
        metrics_cmd->add_option("--subset", metrics_args.subset,
                                "subset dataset (rows of the full set)");
        metrics_cmd->add_option("--format", metrics_args.format,
                                "csv or raw-f64");
        metrics_cmd->add_option("--bins", metrics_args.bins,
                                "histogram bins for d_kl");
        metrics_cmd->add_option("--out", metrics_args.out,
                                "report path (default: stdout)");
        metrics_cmd->add_option("--manifest", metrics_args.manifest,
                                "manifest path");

        // eig
        seed(cfg, "format", eig_args.format);
        seed(cfg, "k", eig_args.k);
        seed(cfg, "bandwidth", eig_args.bandwidth);
        seed(cfg, "m", eig_args.m);
        auto* eig_cmd = app.add_subcommand("eig", "export the spectrum");
        eig_cmd->add_option("--in", eig_args.in, "input dataset");
        eig_cmd->add_option("--format", eig_args.format, "csv or raw-f64");
        eig_cmd->add_option("--k", eig_args.k, "neighbor count");
        eig_cmd->add_option("--bandwidth", eig_args.bandwidth,
                            "'auto' or a positive value");
        eig_cmd->add_option("--m", eig_args.m, "eigenpair count");
        eig_cmd->add_option("--out", eig_args.out,
                            "eigenvector CSV path (JSON sidecar added)");
        eig_cmd->add_option("--manifest", eig_args.manifest, "manifest path");

        // hks
        seed(cfg, "t", hks_args.t);
        auto* hks_cmd =
            app.add_subcommand("hks", "heat-trace values from a spectrum");
        hks_cmd->add_option("--spectrum", hks_args.spectrum,
                            "eigenvector CSV written by eig");
        hks_cmd->add_option("--t", hks_args.t, "diffusion time");
        hks_cmd->add_option("--out", hks_args.out, "output CSV");
        hks_cmd->add_option("--manifest", hks_args.manifest, "manifest path");

        // embed
        seed(cfg, "format", embed_args.format);
        seed(cfg, "p", embed_args.p);
        seed(cfg, "bins", embed_args.bins);
        auto* embed_cmd =
            app.add_subcommand("embed", "PCA fit, projection, comparison");
        embed_cmd->add_option("--fit-on", embed_args.fit_on,
                              "dataset the model is fit on");
        embed_cmd->add_option("--project", embed_args.project,
                              "dataset to project");
        embed_cmd->add_option("--format", embed_args.format,
                              "csv or raw-f64");
        embed_cmd->add_option("--p", embed_args.p, "component count");
        embed_cmd->add_option("--out", embed_args.out, "coords CSV");
        embed_cmd->add_option("--compare", embed_args.compare,
                              "coords CSV to align and compare against");
        embed_cmd->add_option("--hist-out", embed_args.hist_out,
                              "correspondence histogram CSV");
        embed_cmd->add_option("--distances-out", embed_args.distances_out,
                              "per-point correspondence distances CSV");
        embed_cmd->add_option("--bins", embed_args.bins,
                              "correspondence histogram bins");
        embed_cmd->add_option("--manifest", embed_args.manifest,
                              "manifest path");

        app.parse(argc, argv);

        if (threads < 0) throw UsageError("--threads must be >= 0");
        lbs::set_max_threads(static_cast<int>(threads));

        if (gen_cmd->parsed()) return cmd_gen(gen_args);
        if (simplify_cmd->parsed()) return cmd_simplify(simplify_args);
        if (metrics_cmd->parsed()) return cmd_metrics(metrics_args);
        if (eig_cmd->parsed()) return cmd_eig(eig_args);
        if (hks_cmd->parsed()) return cmd_hks(hks_args);
        if (embed_cmd->parsed()) return cmd_embed(embed_args);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        // Prints help for --help (exit 0); usage errors map to exit 2.
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
