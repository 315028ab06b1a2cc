#include "nta/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nta {

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, p);
}

TrafficMatrix parse_link_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    struct Row {
        double t;
        std::string link;
        double bytes;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!saw_header) {
            if (line != "t,link_id,bytes")
                throw std::runtime_error("link csv: line 1: expected header t,link_id,bytes");
            saw_header = true;
            continue;
        }
        auto c1 = line.find(',');
        auto c2 = (c1 == std::string::npos) ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos)
            throw std::runtime_error("link csv: line " + std::to_string(line_no) +
                                     ": expected 3 fields");
        Row r;
        try {
            std::size_t used = 0;
            r.t = std::stod(line.substr(0, c1), &used);
            if (used != c1) throw std::invalid_argument("t");
            r.link = line.substr(c1 + 1, c2 - c1 - 1);
            std::string bs = line.substr(c2 + 1);
            r.bytes = std::stod(bs, &used);
            if (used != bs.size()) throw std::invalid_argument("bytes");
        } catch (const std::exception&) {
            throw std::runtime_error("link csv: line " + std::to_string(line_no) +
                                     ": bad numeric field");
        }
        if (!std::isfinite(r.t) || !std::isfinite(r.bytes))
            throw std::runtime_error("link csv: line " + std::to_string(line_no) +
                                     ": non-finite value");
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error("link csv: no data rows");

    std::vector<double> times;
    std::map<std::string, std::size_t> col_of;
    for (const auto& r : rows) {
        times.push_back(r.t);
        col_of.emplace(r.link, 0);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::size_t next = 0;
    for (auto& [k, idx] : col_of) idx = next++;

    TrafficMatrix tm;
    tm.t0 = times.front();
    tm.bin_width = times.size() > 1 ? times[1] - times[0] : 300.0;
    tm.values = Mat(times.size(), col_of.size());
    tm.series_ids.resize(col_of.size());
    for (const auto& [k, idx] : col_of) tm.series_ids[idx] = k;
    for (const auto& r : rows) {
        auto it = std::lower_bound(times.begin(), times.end(), r.t);
        std::size_t i = static_cast<std::size_t>(it - times.begin());
        tm.values(i, col_of[r.link]) += r.bytes;
    }
    return tm;
}

void write_link_csv(std::ostream& out, const TrafficMatrix& tm) {
    out << "t,link_id,bytes\n";
    for (std::size_t i = 0; i < tm.values.rows; ++i) {
        double t = tm.t0 + tm.bin_width * static_cast<double>(i);
        for (std::size_t j = 0; j < tm.values.cols; ++j)
            out << format_double(t) << ',' << tm.series_ids[j] << ','
                << format_double(tm.values(i, j)) << '\n';
    }
}

Mat parse_routing_matrix(std::istream& in) {
    std::size_t m = 0, n = 0;
    if (!(in >> m >> n) || m == 0 || n == 0)
        throw std::runtime_error("routing matrix: bad header, expected `m n`");
    Mat a(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!(in >> a(i, j)))
                throw std::runtime_error("routing matrix: row " + std::to_string(i + 1) +
                                         ": expected " + std::to_string(n) + " values");
    return a;
}

void write_routing_matrix(std::ostream& out, const Mat& a) {
    out << a.rows << ' ' << a.cols << '\n';
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            if (j) out << ' ';
            out << format_double(a(i, j));
        }
        out << '\n';
    }
}

}  // namespace nta
