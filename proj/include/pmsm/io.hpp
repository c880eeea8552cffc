/**
 * @file io.hpp
 * @brief System files and run configuration.
 *
 * System file (an XYZ superset):
 *
 *     <atom count>
 *     <comment; may contain box=Lx,Ly,Lz>
 *     <element> <x> <y> <z> <charge> <mass> [<vx> <vy> <vz>]   (one per atom)
 *     BOND <i> <j> <k> <r0>                                     (optional)
 *
 * Blank lines and lines starting with '#' after the header are ignored.
 * Configuration files hold one "key = value" pair per line.
 */
#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace pmsm {

struct ParseError : Error {
    ParseError(const std::string& what, long line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
    long line;
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline double to_double(const std::string& tok, long line, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("invalid ") + what + " '" + tok + "'", line);
    }
}

inline long to_long(const std::string& tok, long line, const char* what) {
    try {
        std::size_t used = 0;
        const long v = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("invalid ") + what + " '" + tok + "'", line);
    }
}
}  // namespace detail

inline ParticleSystem parse_system(std::istream& in) {
    std::string line;
    long lineno = 0;
    const auto next = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++lineno;
        return true;
    };
    if (!next()) throw ParseError("missing atom count", 1);
    const long n = detail::to_long(detail::trim(line), lineno, "atom count");
    if (n < 1) throw ParseError("atom count must be >= 1", lineno);
    if (!next()) throw ParseError("missing comment line", 2);
    const std::string comment = line;

    ParticleSystem s;
    while (long(s.size()) < n) {
        if (!next()) throw ParseError("expected " + std::to_string(n) + " atoms, found " + std::to_string(s.size()), lineno + 1);
        const auto t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto tok = detail::split_ws(t);
        if (tok.size() != 6 && tok.size() != 9)
            throw ParseError("atom line needs 6 or 9 fields, got " + std::to_string(tok.size()), lineno);
        const Vec3 r{detail::to_double(tok[1], lineno, "x"), detail::to_double(tok[2], lineno, "y"),
                     detail::to_double(tok[3], lineno, "z")};
        const double q = detail::to_double(tok[4], lineno, "charge");
        const double m = detail::to_double(tok[5], lineno, "mass");
        Vec3 v{};
        if (tok.size() == 9)
            v = {detail::to_double(tok[6], lineno, "vx"), detail::to_double(tok[7], lineno, "vy"),
                 detail::to_double(tok[8], lineno, "vz")};
        if (!isfinite(r) || !isfinite(v) || !std::isfinite(q)) throw ParseError("non-finite value", lineno);
        if (!(m > 0)) throw ParseError("mass must be positive", lineno);
        for (std::size_t j = 0; j < s.size(); ++j)
            if (norm(s.positions[j] - r) < COINCIDENCE_TOL)
                throw ParseError("atom coincides with atom " + std::to_string(j), lineno);
        s.elements.push_back(tok[0]);
        s.positions.push_back(r);
        s.velocities.push_back(v);
        s.charges.push_back(q);
        s.masses.push_back(m);
    }
    while (next()) {
        const auto t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto tok = detail::split_ws(t);
        if (tok[0] != "BOND" || tok.size() != 5) throw ParseError("expected 'BOND i j k r0'", lineno);
        const long i = detail::to_long(tok[1], lineno, "bond index");
        const long j = detail::to_long(tok[2], lineno, "bond index");
        if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw ParseError("bond indices out of range", lineno);
        s.bonds.push_back({std::size_t(i), std::size_t(j), detail::to_double(tok[3], lineno, "bond k"),
                           detail::to_double(tok[4], lineno, "bond r0")});
    }

    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& r : s.positions)
        for (std::size_t d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], r[d]);
            hi[d] = std::max(hi[d], r[d]);
        }
    s.box = hi - lo;
    if (const auto pos = comment.find("box="); pos != std::string::npos) {
        std::string spec = comment.substr(pos + 4);
        spec = spec.substr(0, spec.find_first_of(" \t"));
        std::replace(spec.begin(), spec.end(), ',', ' ');
        const auto tok = detail::split_ws(spec);
        if (tok.size() != 3) throw ParseError("box= needs three comma-separated lengths", 2);
        s.box = {detail::to_double(tok[0], 2, "box"), detail::to_double(tok[1], 2, "box"),
                 detail::to_double(tok[2], 2, "box")};
    }
    return s;
}

inline ParticleSystem parse_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open system file '" + path + "'", 0);
    return parse_system(in);
}

/// Writes @p s with 17 significant digits so parsing restores it exactly.
inline void write_system(std::ostream& out, const ParticleSystem& s, const std::string& comment = "") {
    out << s.size() << '\n';
    out << "box=" << std::setprecision(17) << s.box.x << ',' << s.box.y << ',' << s.box.z;
    if (!comment.empty()) out << ' ' << comment;
    out << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& r = s.positions[i];
        const auto& v = s.velocities[i];
        out << (s.elements.empty() ? std::string("X") : s.elements[i]) << ' ' << r.x << ' ' << r.y << ' ' << r.z << ' '
            << s.charges[i] << ' ' << s.masses[i] << ' ' << v.x << ' ' << v.y << ' ' << v.z << '\n';
    }
    for (const auto& b : s.bonds) out << "BOND " << b.i << ' ' << b.j << ' ' << b.k << ' ' << b.r0 << '\n';
}

/// Appends one plain XYZ frame (element x y z).
inline void write_xyz_frame(std::ostream& out, const ParticleSystem& s, const std::string& comment) {
    out << s.size() << '\n' << comment << '\n' << std::setprecision(10);
    for (std::size_t i = 0; i < s.size(); ++i)
        out << (s.elements.empty() ? std::string("X") : s.elements[i]) << ' ' << s.positions[i].x << ' '
            << s.positions[i].y << ' ' << s.positions[i].z << '\n';
}

// ---------------------------------------------------------------------------
// key = value configuration
// ---------------------------------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const auto t = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
        const auto key = detail::trim(t.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", lineno);
        kv[key] = detail::trim(t.substr(eq + 1));
    }
    return kv;
}

inline KeyValues parse_key_values_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'", 0);
    return parse_key_values(in);
}

}  // namespace pmsm
