#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lbs/dataset.hpp"

#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// LBSIMP_PATH is injected by the build: the absolute path of the CLI binary.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

class TempDir {
  public:
    explicit TempDir(const std::string& name)
        : path_(fs::temp_directory_path() / ("lbsimp_cli_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }
    std::string dir(const std::string& name) const {
        const fs::path sub = path_ / name;
        fs::create_directories(sub);
        return sub.string();
    }

    // Runs the CLI with the given argument string; stdout/stderr are
    // captured through shell redirection inside this directory.
    RunResult run(const std::string& args,
                  const std::string& env_prefix = "") const {
        const std::string out_path = (path_ / ".stdout").string();
        const std::string err_path = (path_ / ".stderr").string();
        std::string cmd = env_prefix;
        if (!cmd.empty()) cmd += ' ';
        cmd += std::string(LBSIMP_PATH) + ' ' + args + " > " + out_path +
               " 2> " + err_path;
        const int status = std::system(cmd.c_str());
        RunResult result;
        result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        result.out = read_file(out_path);
        result.err = read_file(err_path);
        return result;
    }

  private:
    fs::path path_;
};

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

json parse_json_file(const std::string& path) {
    return json::parse(read_file(path));
}

constexpr const char kStepsHeader[] =
    "step,eigenvector_index,subset_size,rate,d_kl,d_h,d_cov";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and argument errors") {
    TempDir tmp("help");

    const RunResult help = tmp.run("--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("gen") != std::string::npos);
    CHECK(help.out.find("simplify") != std::string::npos);

    CHECK(tmp.run("").code == 2);                       // no subcommand
    CHECK(tmp.run("gen --bogus 1").code == 2);          // unknown option
    CHECK(tmp.run("frobnicate").code == 2);             // unknown subcommand

    const RunResult missing = tmp.run("gen --n 10");
    CHECK(missing.code == 2);
    CHECK(missing.err.find("--out") != std::string::npos);
}

TEST_CASE("gen writes a loadable dataset with a manifest") {
    TempDir tmp("gen");
    const std::string out = tmp.file("roll.csv");

    const RunResult run =
        tmp.run("gen --n 40 --noise 0.1 --seed 5 --out " + out);
    REQUIRE(run.code == 0);

    const lbs::DataSet data = lbs::load_dataset(out, lbs::DataFormat::Csv);
    CHECK(data.size() == 40);
    CHECK(data.dim() == 3);

    const json manifest = parse_json_file(out + ".manifest.json");
    CHECK(manifest.at("command") == "gen");
    CHECK(manifest.at("config").at("n") == 40);
    CHECK(manifest.at("config").at("seed") == 5);
    bool listed = false;
    for (const auto& entry : manifest.at("outputs")) {
        if (entry == out) listed = true;
    }
    CHECK(listed);
    CHECK(manifest.at("timings_seconds").contains("total"));

    SUBCASE("same seed, same bytes; new seed, new bytes") {
        const std::string again = tmp.file("again.csv");
        REQUIRE(tmp.run("gen --n 40 --noise 0.1 --seed 5 --out " + again)
                    .code == 0);
        CHECK(read_file(again) == read_file(out));

        const std::string other = tmp.file("other.csv");
        REQUIRE(tmp.run("gen --n 40 --noise 0.1 --seed 6 --out " + other)
                    .code == 0);
        CHECK(read_file(other) != read_file(out));
    }
}

TEST_CASE("gen raw-f64 output feeds back into the pipeline") {
    TempDir tmp("raw");
    const std::string out = tmp.file("roll.bin");
    REQUIRE(tmp.run("gen --n 80 --seed 2 --format raw-f64 --out " + out)
                .code == 0);
    CHECK(fs::exists(out));
    CHECK(fs::exists(out + ".json"));

    const std::string run_dir = tmp.dir("run");
    const RunResult simplify =
        tmp.run("simplify --in " + out +
                " --format raw-f64 --k 8 --eigs 2 --out-dir " + run_dir);
    CHECK(simplify.code == 0);
    CHECK(fs::exists(run_dir + "/steps.csv"));
}

TEST_CASE("simplify produces the documented files, byte-stable") {
    TempDir tmp("simplify");
    const std::string roll = tmp.file("roll.csv");
    REQUIRE(tmp.run("gen --n 150 --seed 3 --out " + roll).code == 0);

    const std::string dir_a = tmp.dir("a");
    const std::string dir_b = tmp.dir("b");
    const std::string args =
        " --k 10 --eigs 4 --bandwidth auto --in " + roll + " --out-dir ";
    REQUIRE(tmp.run("simplify" + args + dir_a).code == 0);
    REQUIRE(tmp.run("simplify" + args + dir_b).code == 0);

    const std::string steps_text = read_file(dir_a + "/steps.csv");
    const auto lines = lines_of(steps_text);
    REQUIRE(lines.size() == 5);  // header + one row per eigenvector
    CHECK(lines[0] == kStepsHeader);

    double last_dh = std::numeric_limits<double>::infinity();
    double last_rate = 0.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        REQUIRE(cells.size() == 7);
        CHECK(cells[0] == std::to_string(i));
        CHECK(cells[1] == std::to_string(i + 1));  // phi_2 onward
        const double size = std::stod(cells[2]);
        const double rate = std::stod(cells[3]);
        CHECK(rate == doctest::Approx(size / 150.0).epsilon(1e-12));
        CHECK(rate >= last_rate);
        last_rate = rate;
        if (!cells[5].empty()) {
            const double dh = std::stod(cells[5]);
            CHECK(dh <= last_dh);
            last_dh = dh;
        }
        // Each step has its cumulative subset file.
        char name[32];
        std::snprintf(name, sizeof(name), "subset_eig%03zu.csv", i + 1);
        CHECK(fs::exists(dir_a + "/" + name));
    }

    SUBCASE("two runs are byte-identical") {
        CHECK(read_file(dir_b + "/steps.csv") == steps_text);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "subset_eig%03zu.csv", i + 1);
            CHECK(read_file(dir_a + "/" + std::string(name)) ==
                  read_file(dir_b + "/" + std::string(name)));
        }
    }

    SUBCASE("manifest carries the spectrum and stage timings") {
        const json manifest = parse_json_file(dir_a + "/manifest.json");
        CHECK(manifest.at("command") == "simplify");
        REQUIRE(manifest.at("eigenvalues").size() == 5);
        CHECK(manifest.at("eigenvalues")[0].get<double>() == 0.0);
        CHECK(manifest.at("budget_exhausted") == false);
        CHECK(manifest.at("timings_seconds").contains("knn"));
        CHECK(manifest.at("timings_seconds").contains("eigen"));
        CHECK(manifest.at("timings_seconds").contains("simplification"));
        CHECK(manifest.at("inputs").contains(roll));
        CHECK(manifest.at("inputs").at(roll) == lbs::file_fnv1a64(roll));
    }

    SUBCASE("rate stop rule halts the run") {
        const std::string dir_c = tmp.dir("c");
        REQUIRE(tmp.run("simplify --k 10 --eigs 6 --stop rate=0.05 --in " +
                        roll + " --out-dir " + dir_c)
                    .code == 0);
        const auto stopped = lines_of(read_file(dir_c + "/steps.csv"));
        REQUIRE(stopped.size() >= 2);
        const auto last = split_csv(stopped.back());
        CHECK(std::stod(last[3]) >= 0.05);
        const json manifest = parse_json_file(dir_c + "/manifest.json");
        CHECK(manifest.at("budget_exhausted") == false);
    }

    SUBCASE("malformed stop rules are usage errors") {
        CHECK(tmp.run("simplify --stop bogus=1 --in " + roll +
                      " --out-dir " + tmp.dir("d"))
                  .code == 2);
        CHECK(tmp.run("simplify --stop rate=-1 --in " + roll +
                      " --out-dir " + tmp.dir("e"))
                  .code == 2);
        CHECK(tmp.run("simplify --bandwidth nope --in " + roll +
                      " --out-dir " + tmp.dir("f"))
                  .code == 2);
    }
}

TEST_CASE("metrics reports JSON and validates subset membership") {
    TempDir tmp("metrics");
    const std::string roll = tmp.file("roll.csv");
    REQUIRE(tmp.run("gen --n 120 --seed 8 --out " + roll).code == 0);

    SUBCASE("a set against itself is perfect") {
        const RunResult run =
            tmp.run("metrics --full " + roll + " --subset " + roll);
        REQUIRE(run.code == 0);
        const json report = json::parse(run.out);
        CHECK(report.at("d_kl").get<double>() == 0.0);
        CHECK(report.at("d_h").get<double>() == 0.0);
        CHECK(report.at("d_cov").get<double>() == 0.0);
        CHECK(report.at("rate").get<double>() == 1.0);
    }

    SUBCASE("subset files from simplify round-trip through metrics") {
        const std::string run_dir = tmp.dir("run");
        REQUIRE(tmp.run("simplify --k 10 --eigs 3 --in " + roll +
                        " --out-dir " + run_dir)
                    .code == 0);
        const auto steps = lines_of(read_file(run_dir + "/steps.csv"));
        REQUIRE(steps.size() == 4);
        const auto last_row = split_csv(steps.back());
        REQUIRE(!last_row[4].empty());

        const std::string report_path = tmp.file("report.json");
        const RunResult run = tmp.run("metrics --full " + roll +
                                      " --subset " + run_dir +
                                      "/subset_eig004.csv --out " +
                                      report_path);
        REQUIRE(run.code == 0);
        const json report = parse_json_file(report_path);
        // The metrics command must reproduce the pipeline's own numbers.
        CHECK(report.at("d_kl").get<double>() == std::stod(last_row[4]));
        CHECK(report.at("d_h").get<double>() == std::stod(last_row[5]));
        CHECK(report.at("d_cov").get<double>() == std::stod(last_row[6]));
        CHECK(report.at("rate").get<double>() ==
              doctest::Approx(std::stod(last_row[3])).epsilon(1e-15));
    }

    SUBCASE("a foreign dataset is rejected as not a subset") {
        const std::string other = tmp.file("other.csv");
        REQUIRE(tmp.run("gen --n 30 --seed 99 --out " + other).code == 0);
        const RunResult run =
            tmp.run("metrics --full " + roll + " --subset " + other);
        CHECK(run.code == 1);
        CHECK(run.err.find("not a row-subset") != std::string::npos);
    }
}

TEST_CASE("eig exports the spectrum; hks consumes it") {
    TempDir tmp("eig");
    const std::string roll = tmp.file("roll.csv");
    REQUIRE(tmp.run("gen --n 100 --seed 4 --out " + roll).code == 0);

    const std::string spec = tmp.file("spectrum.csv");
    REQUIRE(tmp.run("eig --in " + roll + " --k 8 --m 4 --out " + spec).code ==
            0);

    const auto lines = lines_of(read_file(spec));
    REQUIRE(lines.size() == 101);
    CHECK(lines[0] == "phi_1,phi_2,phi_3,phi_4");
    // phi_1 is constant: its formatted value repeats on every row.
    const std::string first_value = split_csv(lines[1])[0];
    CHECK(split_csv(lines[50])[0] == first_value);
    CHECK(split_csv(lines[100])[0] == first_value);

    const json sidecar = parse_json_file(spec + ".json");
    REQUIRE(sidecar.at("eigenvalues").size() == 4);
    CHECK(sidecar.at("eigenvalues")[0].get<double>() == 0.0);
    CHECK(sidecar.at("indexing") == "1-based; lambda_1 = 0");
    CHECK(sidecar.at("normalization") == "A-orthonormal");
    CHECK(sidecar.contains("dense_fallback"));
    CHECK(sidecar.at("bandwidth").get<double>() > 0.0);

    SUBCASE("hks computes one value per point") {
        const std::string hks = tmp.file("hks.csv");
        REQUIRE(tmp.run("hks --spectrum " + spec + " --t 0.5 --out " + hks)
                    .code == 0);
        const auto hks_lines = lines_of(read_file(hks));
        REQUIRE(hks_lines.size() == 101);
        CHECK(hks_lines[0] == "hks");
        for (std::size_t i = 1; i < hks_lines.size(); ++i) {
            CHECK(std::stod(hks_lines[i]) > 0.0);
        }
    }

    SUBCASE("hks without the eigenvalue sidecar fails cleanly") {
        const std::string bare = tmp.file("bare.csv");
        std::ofstream(bare) << read_file(spec);
        const RunResult run =
            tmp.run("hks --spectrum " + bare + " --t 1 --out " +
                    tmp.file("h.csv"));
        CHECK(run.code == 1);
        CHECK(run.err.find("json") != std::string::npos);
    }

    SUBCASE("hks rejects non-positive times") {
        CHECK(tmp.run("hks --spectrum " + spec + " --t 0 --out " +
                      tmp.file("h.csv"))
                  .code == 2);
    }
}

TEST_CASE("embed fits, projects, and compares coordinate sets") {
    TempDir tmp("embed");
    const std::string roll = tmp.file("roll.csv");
    REQUIRE(tmp.run("gen --n 90 --seed 12 --out " + roll).code == 0);

    const std::string full_coords = tmp.file("full.csv");
    REQUIRE(tmp.run("embed --fit-on " + roll + " --project " + roll +
                    " --p 2 --out " + full_coords)
                .code == 0);
    const auto full_lines = lines_of(read_file(full_coords));
    REQUIRE(full_lines.size() == 91);
    CHECK(full_lines[0] == "pc1,pc2");

    const std::string run_dir = tmp.dir("run");
    REQUIRE(tmp.run("simplify --k 10 --eigs 3 --in " + roll + " --out-dir " +
                    run_dir)
                .code == 0);

    const std::string sub_coords = tmp.file("sub.csv");
    const std::string hist = tmp.file("hist.csv");
    const std::string dist = tmp.file("dist.csv");
    const RunResult run = tmp.run(
        "embed --fit-on " + run_dir + "/subset_eig004.csv --project " + roll +
        " --p 2 --out " + sub_coords + " --compare " + full_coords +
        " --hist-out " + hist + " --distances-out " + dist + " --bins 10");
    REQUIRE(run.code == 0);

    CHECK(lines_of(read_file(sub_coords)).size() == 91);
    const auto dist_lines = lines_of(read_file(dist));
    REQUIRE(dist_lines.size() == 91);
    CHECK(dist_lines[0] == "distance");

    const auto hist_lines = lines_of(read_file(hist));
    REQUIRE(hist_lines.size() == 11);
    CHECK(hist_lines[0] == "bin_low,bin_high,count");
    long long total = 0;
    for (std::size_t i = 1; i < hist_lines.size(); ++i) {
        total += std::stoll(split_csv(hist_lines[i])[2]);
    }
    CHECK(total == 90);

    const json manifest = parse_json_file(sub_coords + ".manifest.json");
    REQUIRE(manifest.at("explained_variances").size() == 2);
    CHECK(manifest.at("explained_variances")[0].get<double>() >=
          manifest.at("explained_variances")[1].get<double>());

    SUBCASE("mismatched comparison shapes are rejected") {
        const RunResult bad = tmp.run(
            "embed --fit-on " + roll + " --project " + roll + " --p 2 --out " +
            tmp.file("x.csv") + " --compare " + run_dir +
            "/subset_eig004.csv");
        CHECK(bad.code == 2);
    }
}

TEST_CASE("config file seeds defaults; flags win") {
    TempDir tmp("config");
    const std::string roll = tmp.file("roll.csv");
    REQUIRE(tmp.run("gen --n 150 --seed 3 --out " + roll).code == 0);

    const std::string config = tmp.file("config.json");
    std::ofstream(config) << R"({"eigs": 2, "k": 10, "threads": 2})";

    const std::string dir_a = tmp.dir("a");
    REQUIRE(tmp.run("--config " + config + " simplify --in " + roll +
                    " --out-dir " + dir_a)
                .code == 0);
    CHECK(lines_of(read_file(dir_a + "/steps.csv")).size() == 3);  // 2 steps

    const std::string dir_b = tmp.dir("b");
    REQUIRE(tmp.run("--config " + config + " simplify --eigs 3 --in " + roll +
                    " --out-dir " + dir_b)
                .code == 0);
    CHECK(lines_of(read_file(dir_b + "/steps.csv")).size() == 4);  // flag wins

    SUBCASE("a missing config file is a usage error") {
        CHECK(tmp.run("--config " + tmp.file("absent.json") +
                      " simplify --in " + roll + " --out-dir " + tmp.dir("c"))
                  .code == 2);
    }
}

TEST_CASE("thread cap plumbing") {
    TempDir tmp("threads");
    const std::string out = tmp.file("roll.csv");
    CHECK(tmp.run("--threads 2 gen --n 30 --seed 1 --out " + out).code == 0);
    CHECK(tmp.run("gen --n 30 --seed 1 --out " + tmp.file("b.csv"),
                  "LBSIMP_THREADS=3")
              .code == 0);
    CHECK(read_file(tmp.file("b.csv")) == read_file(out));
    CHECK(tmp.run("--threads -1 gen --n 30 --seed 1 --out " +
                  tmp.file("c.csv"))
              .code == 2);
}

}  // TEST_SUITE
