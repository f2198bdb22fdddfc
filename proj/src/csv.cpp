#include "vgs/io/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace vgs::io {

namespace fs = std::filesystem;

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> Table::column_values(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw DataError("missing column '" + name + "'");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
    return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return out;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

}  // namespace

Table read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    Table t;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " fields");
        std::vector<double> row;
        for (const auto& c : cells) {
            char* end = nullptr;
            errno = 0;
            const double x = std::strtod(c.c_str(), &end);
            if (c.empty() || *end != '\0')
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": not a number '" + c + "'");
            row.push_back(x);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw DataError(path.string() + ": empty file");
    return t;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_snapshot(const fs::path& path, const State& s, const Grid& grid) {
    s.check(grid, "write_snapshot");
    auto out = open_out(path);
    out << "x,u,v,p,y\n";
    for (Eigen::Index i = 0; i < s.size(); ++i)
        out << format_number(grid.center(i)) << ',' << format_number(s.u[i]) << ',' << format_number(s.v[i]) << ','
            << format_number(s.p[i]) << ',' << format_number(s.y[i]) << '\n';
}

void write_trajectory(const fs::path& path, const std::vector<Record>& records) {
    auto out = open_out(path);
    out << "t,amp_u,amp_v,u_probe,v_probe,mass_u,mass_v,total_mass,free_energy\n";
    for (const auto& r : records)
        out << format_number(r.t) << ',' << format_number(r.amp_u) << ',' << format_number(r.amp_v) << ','
            << format_number(r.u_probe) << ',' << format_number(r.v_probe) << ',' << format_number(r.mass_u) << ','
            << format_number(r.mass_v) << ',' << format_number(r.total_mass) << ','
            << format_number(r.free_energy) << '\n';
}

void write_profile(const fs::path& path, const ProfileSteadyState& p, const Grid& grid) {
    check_shape(p.u, grid, "write_profile");
    auto out = open_out(path);
    out << "x,u,v\n";
    for (Eigen::Index i = 0; i < p.u.size(); ++i)
        out << format_number(grid.center(i)) << ',' << format_number(p.u[i]) << ',' << format_number(p.v[i]) << '\n';
}

void write_scan(const fs::path& path, const ScanCurve& c) {
    auto out = open_out(path);
    out << "delta,energy,dE,d2E,feasible\n";
    for (std::size_t i = 0; i < c.deltas.size(); ++i)
        out << format_number(c.deltas[i]) << ',' << format_number(c.energies[i]) << ','
            << format_number(c.first_derivs[i]) << ',' << format_number(c.second_derivs[i]) << ','
            << (c.feasible[i] ? 1 : 0) << '\n';
}

void write_sweep(const fs::path& path, const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << "eps,T,censored\n";
    for (const auto& r : rows)
        out << format_number(r.eps) << ',' << format_number(r.t_persist) << ',' << (r.censored ? 1 : 0) << '\n';
}

std::vector<fs::path> write_library(const fs::path& dir, const PatternLibrary& lib, const Grid& grid) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    std::ostringstream index;
    index << "id,residual,stability,pulse_count,provenance\n";
    for (std::size_t id = 0; id < lib.profiles.size(); ++id) {
        const auto& p = lib.profiles[id];
        const fs::path file = dir / ("profile_" + std::to_string(id) + ".csv");
        write_profile(file, p, grid);
        written.push_back(file);
        std::string prov = p.provenance;
        for (char& ch : prov)
            if (ch == ',' || ch == '\n') ch = ';';
        index << id << ',' << format_number(p.residual_norm) << ',' << to_string(p.stability) << ','
              << p.pulse_count << ',' << prov << '\n';
    }
    write_file_atomic(dir / "index.csv", index.str());
    written.push_back(dir / "index.csv");
    return written;
}

State read_state(const fs::path& path, const Grid& grid, double p0, double y0) {
    const Table t = read_csv(path);
    if (t.rows.size() != static_cast<std::size_t>(grid.n_cells()))
        throw DataError(path.string() + ": has " + std::to_string(t.rows.size()) + " rows but the grid has " +
                        std::to_string(grid.n_cells()) + " cells");
    auto field = [&](const std::string& name, double fallback) {
        Field f(grid.n_cells());
        if (t.column(name) < 0) {
            f.setConstant(fallback);
            return f;
        }
        const auto vals = t.column_values(name);
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            if (!std::isfinite(vals[i]) || vals[i] < 0)
                throw DataError(path.string() + ": column " + name + " must be finite and nonnegative");
            f[i] = vals[i];
        }
        return f;
    };
    if (t.column("u") < 0 || t.column("v") < 0) throw DataError(path.string() + ": needs columns u and v");
    return State(field("u", 0), field("v", 0), field("p", p0), field("y", y0));
}

State read_library_entry(const fs::path& dir, int id, const Grid& grid, double p0, double y0) {
    return read_state(dir / ("profile_" + std::to_string(id) + ".csv"), grid, p0, y0);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace vgs::io
