#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lbs {

// Row-major so a point (one row) is contiguous in memory.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

enum class DataFormat { Csv, RawF64 };

// An unorganized point set: one point per row, all entries finite.
struct DataSet {
    Matrix points;
    std::optional<std::vector<std::string>> row_ids;
    std::optional<std::vector<std::string>> column_names;
    DataFormat source_format = DataFormat::Csv;

    Index size() const { return points.rows(); }
    Index dim() const { return points.cols(); }
};

// Throws std::invalid_argument if any DataSet invariant is violated.
void validate_dataset(const DataSet& data);

// Sorted, duplicate-free row indices into a DataSet.
struct IndexSubset {
    std::vector<Index> indices;

    Index size() const { return static_cast<Index>(indices.size()); }
    bool empty() const { return indices.empty(); }

    // Sorts and deduplicates arbitrary index sequences.
    static IndexSubset from_indices(std::vector<Index> raw);
};

// Throws if the subset is not strictly increasing or exceeds n.
void validate_subset(const IndexSubset& subset, Index n);

DataSet load_dataset(const std::string& path, DataFormat format);
void save_dataset(const DataSet& data, const std::string& path,
                  DataFormat format);

// Writes exactly the selected rows, in index order, in the format the
// DataSet was loaded from (CSV for generated/constructed sets).
void save_subset(const DataSet& data, const IndexSubset& subset,
                 const std::string& path);

// Extracts the selected rows as a standalone matrix.
Matrix select_rows(const Matrix& points, const IndexSubset& subset);

// Classic swiss roll: (t cos t, h, t sin t) with t ~ U[1.5pi, 4.5pi],
// h ~ U[0, 21], plus isotropic Gaussian noise of the given standard
// deviation. The generator is fully specified (mt19937_64 + explicit
// uniform/Box-Muller transforms) so a seed pins the output bit-for-bit.
DataSet generate_swiss_roll(Index n, double noise_sd, std::uint64_t seed);

struct ColumnRange {
    double min = 0.0;
    double max = 0.0;
};

struct NormalizedData {
    DataSet data;
    std::vector<ColumnRange> ranges;
};

// Affinely maps each column onto [0, 1]; constant columns map to all zeros.
NormalizedData normalize_columns(const DataSet& data);

// Applies ranges captured from another set. Values are NOT clamped here;
// callers that need [0, 1] (histogramming) clamp themselves.
Matrix apply_column_ranges(const Matrix& points,
                           const std::vector<ColumnRange>& ranges);

// Shortest round-trip decimal representation (<= 17 significant digits).
std::string format_double(double v);

// FNV-1a 64-bit of a file's bytes, as 16 hex digits. Used in run manifests.
std::string file_fnv1a64(const std::string& path);

}  // namespace lbs
