#include "lbs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace lbs {

namespace {

constexpr double kPi = 3.14159265358979323846;

// True when the whole token parses as a double (including nan/inf spellings,
// which strtod consumes). Used for header auto-detection and cell parsing.
bool parse_double(const std::string& token, double& out) {
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin) return false;
    // Trailing whitespace is fine; any other residue means "not a number".
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    out = v;
    return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // Trim surrounding whitespace.
        auto b = field.find_first_not_of(" \t\r");
        auto e = field.find_last_not_of(" \t\r");
        if (b == std::string::npos) {
            fields.emplace_back();
        } else {
            fields.emplace_back(field.substr(b, e - b + 1));
        }
    }
    // A trailing comma yields an empty final field that getline drops; treat
    // "a,b," as malformed by re-adding it so column counts mismatch loudly.
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string sidecar_path(const std::string& path) { return path + ".json"; }

DataSet load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // Skip blank lines anywhere; they carry no cells.
        bool blank = true;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                blank = false;
                break;
            }
        }
        if (!blank) lines.push_back(line);
    }
    if (lines.empty()) throw std::runtime_error("empty dataset: " + path);

    // Header detection: the first row is a header iff any of its fields
    // fails to parse as a number.
    auto first_fields = split_csv_line(lines[0]);
    bool has_header = false;
    for (const auto& f : first_fields) {
        double unused;
        if (!parse_double(f, unused)) {
            has_header = true;
            break;
        }
    }

    DataSet data;
    std::size_t start = 0;
    if (has_header) {
        data.column_names = first_fields;
        start = 1;
        if (lines.size() == 1) throw std::runtime_error("empty dataset: " + path);
    }

    const std::size_t rows = lines.size() - start;
    const std::size_t cols = split_csv_line(lines[start]).size();
    if (cols == 0) throw std::runtime_error("empty dataset: " + path);
    if (has_header && first_fields.size() != cols) {
        throw std::runtime_error("inconsistent column count at row 2");
    }

    Matrix points(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        auto fields = split_csv_line(lines[start + r]);
        if (fields.size() != cols) {
            // Rows are reported 1-based counting every line in the file,
            // header included, matching how editors number lines.
            throw std::runtime_error("inconsistent column count at row " +
                                     std::to_string(start + r + 1));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            double v;
            if (!parse_double(fields[c], v)) {
                throw std::runtime_error("malformed number at (" +
                                         std::to_string(r) + "," +
                                         std::to_string(c) + "): '" +
                                         fields[c] + "'");
            }
            if (!std::isfinite(v)) {
                throw std::runtime_error("non-finite value at (" +
                                         std::to_string(r) + "," +
                                         std::to_string(c) + ")");
            }
            points(static_cast<Index>(r), static_cast<Index>(c)) = v;
        }
    }
    data.points = std::move(points);
    data.source_format = DataFormat::Csv;
    return data;
}

DataSet load_raw_f64(const std::string& path) {
    std::ifstream meta(sidecar_path(path));
    if (!meta) {
        throw std::runtime_error("missing shape sidecar: " + sidecar_path(path));
    }
    nlohmann::json j;
    try {
        meta >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed shape sidecar: " +
                                 sidecar_path(path) + ": " + e.what());
    }
    if (!j.contains("rows") || !j.contains("cols")) {
        throw std::runtime_error("shape sidecar must contain rows and cols: " +
                                 sidecar_path(path));
    }
    const auto rows = j.at("rows").get<std::int64_t>();
    const auto cols = j.at("cols").get<std::int64_t>();
    if (rows <= 0 || cols <= 0) {
        throw std::runtime_error("empty dataset: " + path);
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    Matrix points(rows, cols);
    const std::size_t want = static_cast<std::size_t>(rows) *
                             static_cast<std::size_t>(cols) * sizeof(double);
    in.read(reinterpret_cast<char*>(points.data()),
            static_cast<std::streamsize>(want));
    if (static_cast<std::size_t>(in.gcount()) != want) {
        throw std::runtime_error("truncated raw-f64 file: " + path);
    }
    char extra;
    if (in.read(&extra, 1)) {
        throw std::runtime_error("raw-f64 file larger than sidecar shape: " +
                                 path);
    }
    for (Index r = 0; r < points.rows(); ++r) {
        for (Index c = 0; c < points.cols(); ++c) {
            if (!std::isfinite(points(r, c))) {
                throw std::runtime_error("non-finite value at (" +
                                         std::to_string(r) + "," +
                                         std::to_string(c) + ")");
            }
        }
    }
    DataSet data;
    data.points = std::move(points);
    data.source_format = DataFormat::RawF64;
    return data;
}

void save_csv(const Matrix& points,
              const std::optional<std::vector<std::string>>& column_names,
              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    if (column_names) {
        for (std::size_t c = 0; c < column_names->size(); ++c) {
            if (c) out << ',';
            out << (*column_names)[c];
        }
        out << '\n';
    }
    for (Index r = 0; r < points.rows(); ++r) {
        for (Index c = 0; c < points.cols(); ++c) {
            if (c) out << ',';
            out << format_double(points(r, c));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void save_raw_f64(const Matrix& points, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot open file for writing: " + path);
        }
        out.write(reinterpret_cast<const char*>(points.data()),
                  static_cast<std::streamsize>(
                      static_cast<std::size_t>(points.size()) * sizeof(double)));
        if (!out) throw std::runtime_error("write failed: " + path);
    }
    nlohmann::json j;
    j["rows"] = points.rows();
    j["cols"] = points.cols();
    std::ofstream meta(sidecar_path(path));
    if (!meta) {
        throw std::runtime_error("cannot open file for writing: " +
                                 sidecar_path(path));
    }
    meta << j.dump(2) << '\n';
    if (!meta) throw std::runtime_error("write failed: " + sidecar_path(path));
}

}  // namespace

void validate_dataset(const DataSet& data) {
    if (data.points.rows() == 0 || data.points.cols() == 0) {
        throw std::invalid_argument("dataset must be non-empty");
    }
    for (Index r = 0; r < data.points.rows(); ++r) {
        for (Index c = 0; c < data.points.cols(); ++c) {
            if (!std::isfinite(data.points(r, c))) {
                throw std::invalid_argument("non-finite value at (" +
                                            std::to_string(r) + "," +
                                            std::to_string(c) + ")");
            }
        }
    }
    if (data.row_ids && static_cast<Index>(data.row_ids->size()) !=
                            data.points.rows()) {
        throw std::invalid_argument("row_ids length must match point count");
    }
    if (data.column_names && static_cast<Index>(data.column_names->size()) !=
                                 data.points.cols()) {
        throw std::invalid_argument(
            "column_names length must match dimension");
    }
}

IndexSubset IndexSubset::from_indices(std::vector<Index> raw) {
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    return IndexSubset{std::move(raw)};
}

void validate_subset(const IndexSubset& subset, Index n) {
    Index prev = -1;
    for (Index i : subset.indices) {
        if (i < 0 || i >= n) {
            throw std::invalid_argument("subset index out of range: " +
                                        std::to_string(i));
        }
        if (i <= prev) {
            throw std::invalid_argument(
                "subset indices must be strictly increasing");
        }
        prev = i;
    }
}

DataSet load_dataset(const std::string& path, DataFormat format) {
    DataSet data = (format == DataFormat::Csv) ? load_csv(path)
                                               : load_raw_f64(path);
    validate_dataset(data);
    return data;
}

void save_dataset(const DataSet& data, const std::string& path,
                  DataFormat format) {
    validate_dataset(data);
    if (format == DataFormat::Csv) {
        save_csv(data.points, data.column_names, path);
    } else {
        save_raw_f64(data.points, path);
    }
}

void save_subset(const DataSet& data, const IndexSubset& subset,
                 const std::string& path) {
    validate_dataset(data);
    validate_subset(subset, data.size());
    Matrix rows = select_rows(data.points, subset);
    if (data.source_format == DataFormat::Csv) {
        save_csv(rows, data.column_names, path);
    } else {
        save_raw_f64(rows, path);
    }
}

Matrix select_rows(const Matrix& points, const IndexSubset& subset) {
    Matrix out(subset.size(), points.cols());
    for (Index r = 0; r < subset.size(); ++r) {
        out.row(r) = points.row(subset.indices[static_cast<std::size_t>(r)]);
    }
    return out;
}

namespace {

// Explicit transforms (instead of std::uniform_real_distribution /
// std::normal_distribution) so that a given seed produces identical
// doubles on every platform and standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace

DataSet generate_swiss_roll(Index n, double noise_sd, std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("point count must be positive");
    if (noise_sd < 0.0) {
        throw std::invalid_argument("noise standard deviation must be >= 0");
    }
    Rng rng(seed);
    Matrix points(n, 3);
    for (Index i = 0; i < n; ++i) {
        const double t = 1.5 * kPi * (1.0 + 2.0 * rng.uniform());
        const double h = 21.0 * rng.uniform();
        // Noise variates are always drawn so that noise_sd only scales the
        // perturbation without changing the underlying sample sequence.
        const double nx = rng.normal();
        const double ny = rng.normal();
        const double nz = rng.normal();
        points(i, 0) = t * std::cos(t) + noise_sd * nx;
        points(i, 1) = h + noise_sd * ny;
        points(i, 2) = t * std::sin(t) + noise_sd * nz;
    }
    DataSet data;
    data.points = std::move(points);
    data.source_format = DataFormat::Csv;
    return data;
}

NormalizedData normalize_columns(const DataSet& data) {
    validate_dataset(data);
    NormalizedData out;
    out.ranges.resize(static_cast<std::size_t>(data.dim()));
    for (Index c = 0; c < data.dim(); ++c) {
        out.ranges[static_cast<std::size_t>(c)] = {
            data.points.col(c).minCoeff(), data.points.col(c).maxCoeff()};
    }
    out.data = data;
    out.data.points = apply_column_ranges(data.points, out.ranges);
    return out;
}

Matrix apply_column_ranges(const Matrix& points,
                           const std::vector<ColumnRange>& ranges) {
    if (static_cast<Index>(ranges.size()) != points.cols()) {
        throw std::invalid_argument("range count must match dimension");
    }
    Matrix out(points.rows(), points.cols());
    for (Index c = 0; c < points.cols(); ++c) {
        const auto& rg = ranges[static_cast<std::size_t>(c)];
        const double span = rg.max - rg.min;
        if (span == 0.0) {
            out.col(c).setZero();
        } else {
            out.col(c) = (points.col(c).array() - rg.min) / span;
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) {
        throw std::runtime_error("number formatting failed");
    }
    return std::string(buf, res.ptr);
}

std::string file_fnv1a64(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(hash));
    return std::string(out, 16);
}

}  // namespace lbs
