#include "piafit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "piafit/errors.hpp"

namespace piafit::io {

using nlohmann::json;

DataFormat parse_format(std::string_view name) {
    if (name == "csv") return DataFormat::csv;
    if (name == "json") return DataFormat::json;
    throw ConfigError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

const char* to_string(DataFormat f) { return f == DataFormat::csv ? "csv" : "json"; }

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string at_line(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

double parse_field(std::string_view field, std::size_t line) {
    field = trim(field);
    if (field.empty()) throw ParseError(at_line(line, "empty coordinate"));
    // from_chars rejects a leading '+'
    if (field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError(at_line(line, "cannot parse '" + std::string(field) + "' as a number"));
    if (!std::isfinite(v)) throw ParseError(at_line(line, "non-finite coordinate"));
    return v;
}

}  // namespace

PointSet parse_points_csv(std::string_view text) {
    std::vector<Point> pts;
    std::size_t dim = 0;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 2 && fields.size() != 3)
            throw ParseError(at_line(line_no, "expected 2 or 3 coordinates, found " + std::to_string(fields.size())));
        if (dim == 0) dim = fields.size();
        if (fields.size() != dim)
            throw ParseError(at_line(line_no, "expected " + std::to_string(dim) + " coordinates like the first point, found " +
                                                  std::to_string(fields.size())));
        Point p(dim);
        for (std::size_t c = 0; c < dim; ++c) p[c] = parse_field(fields[c], line_no);
        pts.push_back(p);
    }
    if (pts.empty()) throw ParseError("no points in input");
    return PointSet::from_points(pts);
}

namespace {

Point json_point(const json& j, std::size_t dim, const std::string& where) {
    if (!j.is_array() || (j.size() != 2 && j.size() != 3))
        throw ParseError(where + ": a point must be an array of 2 or 3 numbers");
    if (dim != 0 && j.size() != dim)
        throw ParseError(where + ": expected " + std::to_string(dim) + " coordinates, found " + std::to_string(j.size()));
    Point p(j.size());
    for (std::size_t c = 0; c < j.size(); ++c) {
        if (!j[c].is_number()) throw ParseError(where + ": coordinate " + std::to_string(c) + " is not a number");
        p[c] = j[c].get<double>();
        if (!std::isfinite(p[c])) throw ParseError(where + ": non-finite coordinate");
    }
    return p;
}

std::size_t positive_count(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ParseError(std::string("grid JSON is missing \"") + key + "\"");
    const json& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0)
        throw ParseError(std::string("\"") + key + "\" must be a positive integer");
    return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace

PointGrid parse_grid_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("grid JSON must be an object");
    const std::size_t rows = positive_count(doc, "rows");
    const std::size_t cols = positive_count(doc, "cols");
    if (!doc.contains("points") || !doc.at("points").is_array()) throw ParseError("grid JSON needs a \"points\" array");
    const json& pts = doc.at("points");
    if (pts.empty()) throw ParseError("grid has no points");

    const bool nested = pts[0].is_array() && !pts[0].empty() && pts[0][0].is_array();
    std::vector<Point> flat;
    flat.reserve(rows * cols);
    std::size_t dim = 0;
    if (nested) {
        if (pts.size() != rows)
            throw DegenerateInputError("grid declares " + std::to_string(rows) + " rows but lists " +
                                       std::to_string(pts.size()));
        for (std::size_t i = 0; i < rows; ++i) {
            if (!pts[i].is_array() || pts[i].size() != cols)
                throw DegenerateInputError("ragged grid: row " + std::to_string(i) + " has " +
                                           std::to_string(pts[i].is_array() ? pts[i].size() : 0) + " points, expected " +
                                           std::to_string(cols));
            for (std::size_t j = 0; j < cols; ++j) {
                flat.push_back(json_point(pts[i][j], dim, "point (" + std::to_string(i) + ", " + std::to_string(j) + ")"));
                dim = flat.back().dim();
            }
        }
    } else {
        if (pts.size() != rows * cols) {
            const std::size_t short_row = std::min(pts.size() / cols, rows - 1);
            throw DegenerateInputError("ragged grid: row " + std::to_string(short_row) + " is incomplete (" +
                                       std::to_string(pts.size()) + " points for " + std::to_string(rows) + " x " +
                                       std::to_string(cols) + ")");
        }
        for (std::size_t k = 0; k < pts.size(); ++k) {
            flat.push_back(json_point(pts[k], dim, "point " + std::to_string(k) + " (row " + std::to_string(k / cols) + ")"));
            dim = flat.back().dim();
        }
    }
    PointGrid grid(rows, cols, dim);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) grid.set_point(i, j, flat[i * cols + j]);
    return grid;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PointData load_points(const std::filesystem::path& path, DataFormat format) {
    const std::string text = read_file(path);
    try {
        if (format == DataFormat::csv) return parse_points_csv(text);
        return parse_grid_json(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_double(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw NumericalError("cannot format number");
    return std::string(buf, ptr);
}

namespace {

void append_point(std::string& out, const Point& p) {
    for (std::size_t c = 0; c < p.dim(); ++c) {
        if (c) out += ',';
        out += format_double(p[c]);
    }
    out += '\n';
}

}  // namespace

std::string points_csv(const PointSet& pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) append_point(out, pts.point(i));
    return out;
}

std::string grid_points_csv(const PointGrid& grid) {
    std::string out;
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j) append_point(out, grid.point(i, j));
    return out;
}

std::string grid_json(const PointGrid& grid) {
    json pts = json::array();
    for (std::size_t i = 0; i < grid.rows(); ++i)
        for (std::size_t j = 0; j < grid.cols(); ++j) {
            json p = json::array();
            for (std::size_t c = 0; c < grid.dim(); ++c) p.push_back(grid.at(i, j, c));
            pts.push_back(std::move(p));
        }
    json doc{{"rows", grid.rows()}, {"cols", grid.cols()}, {"points", std::move(pts)}};
    return doc.dump() + "\n";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ConfigError("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

const std::vector<std::string>& example_names() {
    static const std::vector<std::string> names{"airfoil-like", "incenter-like", "polar-sin4",
                                                "gfont-like",   "face-like",     "random"};
    return names;
}

bool is_grid_example(std::string_view name) { return name == "face-like"; }

UniformSource::UniformSource(std::uint64_t seed) : engine_(seed) {}

double UniformSource::next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

namespace {

constexpr double pi = std::numbers::pi;

void check_size(std::size_t m) {
    if (m < 4) throw ConfigError("example size must be at least 4");
}

// Symmetric four-digit profile of 12% thickness with a closed trailing edge.
PointSet airfoil(std::size_t m) {
    PointSet out(m, 2);
    for (std::size_t j = 0; j < m; ++j) {
        const double th = 2.0 * pi * static_cast<double>(j) / static_cast<double>(m - 1);
        const double x = 0.5 * (1.0 + std::cos(th));
        const double half = 0.6 * (0.2969 * std::sqrt(x) - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x -
                                   0.1036 * x * x * x * x);
        out.at(j, 0) = x;
        out.at(j, 1) = std::sin(th) >= 0.0 ? half : -half;
    }
    out.at(m - 1, 1) = 0.0;
    out.at(0, 1) = 0.0;
    return out;
}

// Closed wavy outline r = 1 + 0.25 cos(5 theta), the last sample stopping
// short of the first.
PointSet incenter(std::size_t m) {
    PointSet out(m, 2);
    for (std::size_t j = 0; j < m; ++j) {
        const double th = 2.0 * pi * static_cast<double>(j) / static_cast<double>(m);
        const double r = 1.0 + 0.25 * std::cos(5.0 * th);
        out.at(j, 0) = r * std::cos(th);
        out.at(j, 1) = r * std::sin(th);
    }
    return out;
}

PointSet polar_sin4(std::size_t m) {
    PointSet out(m, 2);
    for (std::size_t j = 0; j < m; ++j) {
        const double th = 8.0 * pi * static_cast<double>(j) / static_cast<double>(m - 1);
        const double r = std::sin(th / 4.0);
        out.at(j, 0) = r * std::cos(th);
        out.at(j, 1) = r * std::sin(th);
    }
    return out;
}

// Letter G: unit arc from 45 degrees round to 360, then the bar inward.
PointSet gfont(std::size_t m) {
    const double a0 = 0.25 * pi;
    const double arc = 2.0 * pi - a0;
    const double bar = 0.7;
    const double total = arc + bar;
    PointSet out(m, 2);
    for (std::size_t j = 0; j < m; ++j) {
        const double s = total * static_cast<double>(j) / static_cast<double>(m - 1);
        if (s <= arc) {
            out.at(j, 0) = std::cos(a0 + s);
            out.at(j, 1) = std::sin(a0 + s);
        } else {
            out.at(j, 0) = 1.0 - (s - arc);
            out.at(j, 1) = 0.0;
        }
    }
    return out;
}

double bump(double x, double y, double cx, double cy, double sx, double sy) {
    const double dx = (x - cx) / sx;
    const double dy = (y - cy) / sy;
    return std::exp(-(dx * dx + dy * dy));
}

PointGrid face(std::size_t rows, std::size_t cols) {
    PointGrid out(rows, cols, 3);
    for (std::size_t i = 0; i < rows; ++i) {
        const double y = -1.2 + 2.4 * static_cast<double>(i) / static_cast<double>(rows - 1);
        for (std::size_t j = 0; j < cols; ++j) {
            const double x = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(cols - 1);
            double z = 0.6 * bump(x, y, 0.0, 0.0, 0.75, 0.95);
            z += 0.22 * bump(x, y, 0.0, -0.05, 0.12, 0.25);  // nose
            z -= 0.08 * bump(x, y, -0.35, 0.3, 0.14, 0.1);   // eyes
            z -= 0.08 * bump(x, y, 0.35, 0.3, 0.14, 0.1);
            z += 0.05 * bump(x, y, 0.0, 0.55, 0.5, 0.12);    // brow
            z -= 0.04 * bump(x, y, 0.0, -0.5, 0.25, 0.05);   // mouth
            out.at(i, j, 0) = x;
            out.at(i, j, 1) = y;
            out.at(i, j, 2) = z;
        }
    }
    return out;
}

}  // namespace

PointSet gen_curve_example(std::string_view name, std::size_t m, std::uint64_t seed, std::size_t dim) {
    check_size(m);
    if (name == "airfoil-like") return airfoil(m);
    if (name == "incenter-like") return incenter(m);
    if (name == "polar-sin4") return polar_sin4(m);
    if (name == "gfont-like") return gfont(m);
    if (name == "random") {
        if (dim != 2 && dim != 3) throw ConfigError("random points need dimension 2 or 3");
        UniformSource rng(seed);
        PointSet out(m, dim);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < dim; ++c) out.at(i, c) = rng.uniform(-1.0, 1.0);
        return out;
    }
    if (name == "face-like") throw ConfigError("face-like is a grid example");
    throw ConfigError("unknown example '" + std::string(name) + "'");
}

PointGrid gen_grid_example(std::string_view name, std::size_t rows, std::size_t cols, std::uint64_t seed) {
    check_size(rows);
    check_size(cols);
    if (name == "face-like") return face(rows, cols);
    if (name == "random") {
        UniformSource rng(seed);
        PointGrid out(rows, cols, 3);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                for (std::size_t c = 0; c < 3; ++c) out.at(i, j, c) = rng.uniform(-1.0, 1.0);
        return out;
    }
    for (const auto& n : example_names())
        if (n == name) throw ConfigError(std::string(name) + " is a curve example");
    throw ConfigError("unknown example '" + std::string(name) + "'");
}

}  // namespace piafit::io
