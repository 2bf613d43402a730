#include "stripbloch/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stripbloch/errors.hpp"

namespace stripbloch {

std::string format_g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string bands_csv(const std::vector<EigenCurve>& curves) {
    std::ostringstream out;
    out << "k,band_index,E,dE_dk,embedded,sigma_min,residual,multiplicity\n";
    for (const EigenCurve& c : curves)
        for (size_t i = 0; i < c.samples.size(); ++i) {
            if (!c.samples[i].valid) continue;
            const FiberEigenpair& p = c.samples[i].pair;
            out << format_g12(c.k_grid[i]) << ',' << c.band_index << ','
                << format_g12(p.E) << ',' << format_g12(c.dEdk[i]) << ','
                << (p.embedded ? 1 : 0) << ',' << format_g12(p.sigma_min) << ','
                << format_g12(p.residual) << ',' << p.multiplicity << '\n';
        }
    return out.str();
}

std::string singular_points_csv(const std::vector<EigenCurve>& curves) {
    std::ostringstream out;
    out << "k,band_index,reason\n";
    for (const EigenCurve& c : curves)
        for (const SingularPoint& s : c.singular_points)
            out << format_g12(s.k) << ',' << c.band_index << ',' << s.reason << '\n';
    return out.str();
}

std::string bands_dat(const std::vector<EigenCurve>& curves) {
    std::ostringstream out;
    bool first = true;
    for (const EigenCurve& c : curves) {
        if (!first) out << '\n';
        first = false;
        out << "# band " << c.band_index << "\n";
        for (size_t i = 0; i < c.samples.size(); ++i) {
            if (!c.samples[i].valid) continue;
            out << format_g12(c.k_grid[i]) << ' ' << format_g12(c.samples[i].pair.E)
                << ' ' << format_g12(c.dEdk[i]) << '\n';
        }
    }
    return out.str();
}

namespace {

std::string transport_table(const TimeSeries& series, char sep, bool header) {
    std::ostringstream out;
    if (header) {
        out << 't' << sep << "mean_X" << sep << "mean_Y" << sep << "var_X" << sep
            << "var_Y" << sep << "norm" << sep << "boundary_mass";
        for (double v : series.chi_velocities) {
            // column names like chi_mass_v0.5, chi_mass_v1.0
            char tag[32];
            if (v == std::floor(v))
                std::snprintf(tag, sizeof tag, "%.1f", v);
            else
                std::snprintf(tag, sizeof tag, "%.12g", v);
            out << sep << "chi_mass_v" << tag;
        }
        out << '\n';
    }
    for (const TimeSample& s : series.samples) {
        out << format_g12(s.t) << sep << format_g12(s.mean_x) << sep
            << format_g12(s.mean_y) << sep << format_g12(s.var_x) << sep
            << format_g12(s.var_y) << sep << format_g12(s.norm) << sep
            << format_g12(s.boundary_mass);
        for (double m : s.chi_mass) out << sep << format_g12(m);
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::string transport_csv(const TimeSeries& series) {
    return transport_table(series, ',', true);
}

std::string transport_dat(const TimeSeries& series) {
    std::string head = transport_table(series, ' ', true);
    return "# " + head;
}

std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << body;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace stripbloch
