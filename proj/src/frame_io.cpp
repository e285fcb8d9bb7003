#include "fsp/frame_io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fsp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw IoError("cannot parse number '" + s + "' in " + context);
    }
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

// Reads just the `# frame_id=... timestamp=...` header line.
void parse_frame_header(const std::string& line, const std::string& path,
                        std::int64_t& frame_id, double& timestamp) {
    long long id = 0;
    double ts = 0.0;
    if (std::sscanf(line.c_str(), "# frame_id=%lld timestamp=%lf", &id, &ts) != 2) {
        throw IoError("bad frame header in " + path + ": '" + line + "'");
    }
    frame_id = static_cast<std::int64_t>(id);
    timestamp = ts;
}

}  // namespace

PointCloudFrame read_frame_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open frame file " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty frame file " + path);

    PointCloudFrame frame;
    parse_frame_header(line, path, frame.frame_id, frame.timestamp);
    if (!std::isfinite(frame.timestamp)) throw IoError("non-finite timestamp in " + path);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        Point3 p;
        std::istringstream ss(line);
        if (!(ss >> p.x >> p.y >> p.z)) {
            throw IoError("bad point on line " + std::to_string(line_no) + " of " + path);
        }
        std::string rest;
        if (ss >> rest) {
            throw IoError("trailing data on line " + std::to_string(line_no) + " of " + path);
        }
        if (!is_finite(p)) {
            throw IoError("non-finite point on line " + std::to_string(line_no) + " of " + path);
        }
        frame.points.push_back(p);
    }
    return frame;
}

void write_frame_file(const PointCloudFrame& frame, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot write frame file " + path + ": " + std::strerror(errno));
    std::fprintf(f, "# frame_id=%lld timestamp=%.6f\n",
                 static_cast<long long>(frame.frame_id), frame.timestamp);
    for (const Point3& p : frame.points) {
        std::fprintf(f, "%.6f %.6f %.6f\n", p.x, p.y, p.z);
    }
    std::fclose(f);
}

std::vector<std::string> list_frame_files(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    std::vector<std::pair<std::int64_t, std::string>> entries;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string path = e.path().string();
        std::ifstream in(path);
        std::string header;
        if (!in || !std::getline(in, header)) {
            throw IoError("cannot read frame header of " + path);
        }
        std::int64_t id = 0;
        double ts = 0.0;
        parse_frame_header(header, path, id, ts);
        entries.emplace_back(id, path);
    }
    std::sort(entries.begin(), entries.end());
    std::vector<std::string> paths;
    paths.reserve(entries.size());
    for (auto& [id, p] : entries) paths.push_back(std::move(p));
    return paths;
}

std::vector<RawCorrespondence> read_correspondence_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open correspondence CSV " + path);
    std::vector<RawCorrespondence> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line) || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw IoError("expected 6 CSV fields on line " + std::to_string(line_no) + " of " +
                          path);
        }
        const std::string ctx = path + ":" + std::to_string(line_no);
        RawCorrespondence c;
        c.lidar = {parse_double(fields[0], ctx), parse_double(fields[1], ctx),
                   parse_double(fields[2], ctx)};
        c.geodetic = {parse_double(fields[3], ctx), parse_double(fields[4], ctx),
                      parse_double(fields[5], ctx)};
        out.push_back(c);
    }
    return out;
}

std::vector<std::pair<double, GeodeticCoord>> read_gps_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open GPS trajectory CSV " + path);
    std::vector<std::pair<double, GeodeticCoord>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line) || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw IoError("expected 4 CSV fields on line " + std::to_string(line_no) + " of " +
                          path);
        }
        const std::string ctx = path + ":" + std::to_string(line_no);
        out.emplace_back(parse_double(fields[0], ctx),
                         GeodeticCoord{parse_double(fields[1], ctx), parse_double(fields[2], ctx),
                                       parse_double(fields[3], ctx)});
    }
    return out;
}

std::vector<std::pair<double, Point3>> read_lidar_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open LiDAR trajectory CSV " + path);
    std::vector<std::pair<double, Point3>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line) || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw IoError("expected 4 CSV fields on line " + std::to_string(line_no) + " of " +
                          path);
        }
        const std::string ctx = path + ":" + std::to_string(line_no);
        out.emplace_back(parse_double(fields[0], ctx),
                         Point3{parse_double(fields[1], ctx), parse_double(fields[2], ctx),
                                parse_double(fields[3], ctx)});
    }
    return out;
}

std::vector<TimingSample> read_timing_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open timing CSV " + path);
    std::vector<TimingSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line) || line[0] == '#') continue;
        if (line_no == 1 && line.rfind("frame_id", 0) == 0) continue;  // header
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw IoError("expected 3 CSV fields on line " + std::to_string(line_no) + " of " +
                          path);
        }
        const std::string ctx = path + ":" + std::to_string(line_no);
        TimingSample s;
        s.frame_id = static_cast<std::int64_t>(parse_double(fields[0], ctx));
        s.foreground_point_count = static_cast<std::int64_t>(parse_double(fields[1], ctx));
        s.processing_seconds = parse_double(fields[2], ctx);
        out.push_back(s);
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace fsp
