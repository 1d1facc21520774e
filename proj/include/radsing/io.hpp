#ifndef RADSING_IO_HPP
#define RADSING_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "radsing/asymptotics.hpp"
#include "radsing/ode.hpp"
#include "radsing/series.hpp"
#include "radsing/systems.hpp"

namespace radsing {

using json = nlohmann::json;

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Profile CSV: fixed header, 17 significant digits, LF line endings, no
// timestamps -- identical configs produce byte-identical files.
inline void write_profile_csv(const Profile& prof, std::ostream& os) {
    os << "r,u,du,residual\n";
    for (std::size_t i = 0; i < prof.size(); ++i)
        os << fmt17(prof.r[i]) << ',' << fmt17(prof.u[i]) << ',' << fmt17(prof.p[i]) << ','
           << fmt17(prof.residual[i]) << '\n';
}

inline void write_profile_csv(const Profile& prof, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_profile_csv(prof, f);
}

inline Profile read_profile_csv(const std::string& path, const Params& prm) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    Profile prof;
    prof.params = prm;
    std::string line;
    if (!std::getline(f, line) || line.rfind("r,u,du", 0) != 0)
        throw IoError("missing CSV header in " + path);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        double vals[4] = {0, 0, 0, 0};
        for (int k = 0; k < 4 && std::getline(ss, cell, ','); ++k) vals[k] = std::stod(cell);
        prof.r.push_back(vals[0]);
        prof.u.push_back(vals[1]);
        prof.p.push_back(vals[2]);
        prof.residual.push_back(vals[3]);
    }
    if (prof.size() < 2) throw IoError("profile has fewer than 2 samples: " + path);
    return prof;
}

inline json to_json(const Params& prm) {
    return json{{"N", prm.N}, {"M", prm.M}, {"q", prm.q}};
}

inline json to_json(const Termination& t) {
    json j{{"kind", to_string(t.kind)}};
    if (t.kind == TerminationKind::BlowUpDetected || t.kind == TerminationKind::EventHit)
        j["r_star"] = t.r_star;
    if (!t.label.empty()) j["label"] = t.label;
    return j;
}

inline json profile_metadata(const Profile& prof) {
    return json{
        {"params", to_json(prof.params)},
        {"direction", prof.direction == Direction::Outward ? "outward" : "inward"},
        {"termination", to_json(prof.termination)},
        {"samples", prof.size()},
        {"r_min", prof.r_min()},
        {"r_max", prof.r_max()},
        {"steps_accepted", prof.steps_accepted},
    };
}

inline json to_json(const Classification& c) {
    json j{{"regime", to_string(c.regime)},
           {"residual", c.residual},
           {"window", {c.window_lo, c.window_hi}}};
    if (std::isfinite(c.constant)) j["constant"] = c.constant;
    if (std::isfinite(c.constant2)) j["constant2"] = c.constant2;
    return j;
}

inline json to_json(const EquilibriumReport& rep) {
    json eigs = json::array();
    json vecs = json::array();
    for (int i = 0; i < rep.dim; ++i) {
        eigs.push_back({{"re", rep.eigenvalues[i].real()}, {"im", rep.eigenvalues[i].imag()}});
        json v = json::array();
        for (int kcomp = 0; kcomp < rep.dim; ++kcomp)
            v.push_back({{"re", rep.eigenvectors[i](kcomp).real()},
                         {"im", rep.eigenvectors[i](kcomp).imag()}});
        vecs.push_back(v);
    }
    json loc = json::array();
    for (int i = 0; i < rep.dim; ++i) loc.push_back(rep.location[i]);
    return json{{"system", to_string(rep.tag)},
                {"frozen_limit", rep.frozen_limit},
                {"location", loc},
                {"rhs_residual", rep.rhs_residual},
                {"eigenvalues", eigs},
                {"eigenvectors", vecs},
                {"classification", to_string(rep.classification)}};
}

inline json to_json(const Expansion& e) {
    return json{{"params", to_json(e.params)},
                {"order", e.order},
                {"A", e.A},
                {"B", e.B},
                {"C", e.C},
                {"a", e.a},
                {"b", e.b},
                {"normalization",
                 {{"internal_M", 1.0},
                  {"lambda", e.rescale_lambda},
                  {"shift", e.rescale_shift}}}};
}

}  // namespace radsing

#endif
