#pragma once

// Point file formats and synthetic data sets.
//
// Points CSV: one point per line, `x,y` or `x,y,z`, '.' decimal separator.
// Grid JSON:  {"rows": m1, "cols": m2, "points": [[x,y,z], ...]} row-major;
//             "points" may also be a list of rows.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "piafit/points.hpp"

namespace piafit::io {

enum class DataFormat { csv, json };

DataFormat parse_format(std::string_view name);
const char* to_string(DataFormat f);

using PointData = std::variant<PointSet, PointGrid>;

/// Throws ParseError (with line numbers for CSV) or DegenerateInputError for
/// ragged grids.
PointSet parse_points_csv(std::string_view text);
PointGrid parse_grid_json(std::string_view text);
PointData load_points(const std::filesystem::path& path, DataFormat format);

/// Shortest decimal string that parses back to exactly x.
std::string format_double(double x);

std::string points_csv(const PointSet& pts);
/// Row-major grid points, one per line.
std::string grid_points_csv(const PointGrid& grid);
std::string grid_json(const PointGrid& grid);

/// Write to a sibling temporary file and rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Curve sets: airfoil-like, incenter-like, polar-sin4, gfont-like, random.
/// Grid sets: face-like, random.
const std::vector<std::string>& example_names();
bool is_grid_example(std::string_view name);

/// polar-sin4 is the polar curve r = sin(theta/4), theta uniform on [0, 8 pi].
/// The other named sets are synthetic stand-ins. random draws m points
/// uniformly from [-1, 1]^dim.
PointSet gen_curve_example(std::string_view name, std::size_t m, std::uint64_t seed = 0, std::size_t dim = 2);
PointGrid gen_grid_example(std::string_view name, std::size_t rows, std::size_t cols, std::uint64_t seed = 0);

/// Uniform doubles in [0, 1) from the top 53 bits of a 64-bit Mersenne
/// twister; identical on every platform.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed);
    double next();
    double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace piafit::io
