#ifndef RADSING_CLI_HPP
#define RADSING_CLI_HPP

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "radsing/asymptotics.hpp"
#include "radsing/constructors.hpp"
#include "radsing/io.hpp"
#include "radsing/series.hpp"

namespace radsing {

namespace cli_detail {

inline std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json provenance_header(int argc, const char* const* argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return json{{"tool", {{"name", "radsing"}, {"version", "0.1.0"}}},
                {"generated_at", iso_now()},
                {"command", cmd}};
}

inline void write_json(const json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << j.dump(2) << '\n';
}

inline json error_json(const std::string& code, const std::string& message) {
    return json{{"error", {{"type", code}, {"message", message}}}};
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (!cell.empty()) out.push_back(std::stod(cell));
    return out;
}

inline SystemTag parse_tag(const std::string& name) {
    for (SystemTag tag :
         {SystemTag::EmdenPlane, SystemTag::NonAutX, SystemTag::NonAutXq, SystemTag::TripleV,
          SystemTag::TripleXV, SystemTag::TripleTheta, SystemTag::LotkaVolterra, SystemTag::HJ,
          SystemTag::OneD, SystemTag::ZofU, SystemTag::AppendixVarpi})
        if (to_string(tag) == name) return tag;
    throw InvalidParams("unknown system tag '" + name + "'");
}

struct SweepRow {
    double N = 0, M = 0, q = 0;
    std::string regime = "Error";
    double constant = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::infinity();
};

}  // namespace cli_detail

// Command-line driver; returns the process exit code.  Exit map: 0 success /
// ReachedBound, 2 BlowUpDetected, 3 StepUnderflow, 64 usage, 65 parameter
// window violation, 70 other module errors (JSON error object on stderr).
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    using cli_detail::error_json;
    namespace fs = std::filesystem;

    CLI::App app{"radsing: radial solutions of -u'' - (N-1)/r u' + M|u'|^q = e^u"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value configuration file (flags override)");

    int N = 3;
    double M = 1.0, q = 3.0;
    std::string outdir = ".";
    double rel_tol = 1e-10, abs_tol = 1e-12;
    app.add_option("--N", N, "spatial dimension (integer >= 1)");
    app.add_option("--M", M, "gradient coefficient (> 0)");
    app.add_option("--q", q, "gradient exponent (> 1, != 2)");
    app.add_option("--out", outdir, "output directory");
    app.add_option("--rel-tol", rel_tol, "integrator relative tolerance");
    app.add_option("--abs-tol", abs_tol, "integrator absolute tolerance");

    // ---- solve ----
    auto* solve = app.add_subcommand("solve", "integrate from a seed or explicit data");
    std::string seed_spec, data_spec;
    double from_r = 0.0, to_r = 0.0;
    double blowup_threshold = 1e12;
    solve->add_option("--seed", seed_spec, "eikonal | regular:u0=<value>");
    solve->add_option("--data", data_spec, "explicit start 'r,u,du'");
    solve->add_option("--from", from_r, "start radius (seed eikonal) / seed radius override");
    solve->add_option("--to", to_r, "end radius")->required();
    solve->add_option("--blowup-threshold", blowup_threshold, "|u|+|u'| threshold");

    // ---- construct ----
    auto* construct = app.add_subcommand("construct", "build a singular solution profile");
    std::string theorem_tag;
    construct->add_option("tag", theorem_tag, "emden | hj | dirac | eikonal | gradient-singular")
        ->required();
    double rwin_lo = 1e-6, rwin_hi = 1e-2;
    double xi0 = 0.0, eta0 = 0.0, t0 = -3.0;
    double gamma = -0.01, rho = 0.1;
    double ctol = 1e-12, rmin = 1e-4;
    double u0_target = 0.0;
    construct->add_option("--r-lo", rwin_lo, "inner window radius (emden)");
    construct->add_option("--r-hi", rwin_hi, "outer window radius (emden)");
    construct->add_option("--xi0", xi0, "scaled datum xi_bar0 (hj)");
    construct->add_option("--eta0", eta0, "scaled datum eta_bar0 (hj)");
    construct->add_option("--t0", t0, "anchor log-radius (hj)");
    construct->add_option("--gamma", gamma, "Dirac datum, gamma < 0");
    construct->add_option("--rho", rho, "Dirac boundary radius");
    construct->add_option("--ctol", ctol, "shooting bracket tolerance (eikonal)");
    construct->add_option("--rmin", rmin, "window bottom (eikonal N >= 2)");
    construct->add_option("--u0-target", u0_target, "target value at 0 (gradient-singular)");

    // ---- classify ----
    auto* classify = app.add_subcommand("classify", "classify a stored profile");
    std::string in_csv, end = "origin";
    classify->add_option("--in", in_csv, "profile CSV path")->required();
    classify->add_option("--end", end, "origin | infinity");

    // ---- expand ----
    auto* expand_cmd = app.add_subcommand("expand", "eikonal-type series expansion (q > 2)");
    int order = 3;
    expand_cmd->add_option("--order", order, "expansion order (1..12)");

    // ---- phase ----
    auto* phase = app.add_subcommand("phase", "equilibria and eigen-structure of a system");
    std::string tag_name;
    int lv_sign = +1;
    phase->add_option("tag", tag_name, "system tag, e.g. triple-theta")->required();
    phase->add_option("--sign", lv_sign, "sign flag for the quadratic system");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "parameter sweep with one CSV row per triple");
    std::string Ns = "3", Ms = "1", qs = "1.5,3", task = "exterior";
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    sweep->add_option("--Ns", Ns, "comma list of N values");
    sweep->add_option("--Ms", Ms, "comma list of M values");
    sweep->add_option("--qs", qs, "comma list of q values");
    sweep->add_option("--task", task,
                      "exterior | construct-emden | construct-hj | construct-dirac | "
                      "construct-eikonal | construct-gradient-singular");
    sweep->add_option("--jobs", jobs, "worker pool size");

    // ---- selftest ----
    auto* selftest = app.add_subcommand("selftest", "arithmetic and transform self-checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_json("UsageError", e.what()).dump() << '\n';
        return 64;
    }

    try {
        const Params prm = Params::checked(N, M, q);
        fs::create_directories(outdir);
        json prov = cli_detail::provenance_header(argc, argv);
        prov["params"] = to_json(prm);
        json cfg{{"rel_tol", rel_tol}, {"abs_tol", abs_tol}, {"out", outdir}};

        if (*solve) {
            RadialState start;
            if (!data_spec.empty()) {
                auto v = cli_detail::parse_list(data_spec);
                if (v.size() != 3) throw InvalidParams("--data expects 'r,u,du'");
                start = {v[0], v[1], v[2]};
                cfg["seed"] = {{"kind", "data"}, {"r", v[0]}, {"u", v[1]}, {"du", v[2]}};
            } else if (seed_spec == "eikonal") {
                if (!(from_r > 0.0)) throw InvalidParams("--seed eikonal requires --from");
                start = eikonal_profile(prm, from_r);
                cfg["seed"] = {{"kind", "eikonal"}, {"from", from_r}};
            } else if (seed_spec.rfind("regular:u0=", 0) == 0) {
                const double u0 = std::stod(seed_spec.substr(11));
                const double eps = from_r > 0.0 ? from_r : 1e-3 * std::exp(-u0 / 2.0);
                start = seed_regular(prm, u0, eps);
                cfg["seed"] = {{"kind", "regular"}, {"u0", u0}, {"eps", eps}};
            } else {
                throw InvalidParams("provide --seed eikonal, --seed regular:u0=..., or --data");
            }
            IntegratorConfig icfg;
            icfg.rel_tol = rel_tol;
            icfg.abs_tol = abs_tol;
            icfg.blowup_threshold = blowup_threshold;
            cfg["blowup_threshold"] = blowup_threshold;
            cfg["to"] = to_r;
            Profile prof = integrate(prm, start, to_r, icfg);

            write_profile_csv(prof, outdir + "/solve_profile.csv");
            prov["config"] = cfg;
            prov["profile"] = profile_metadata(prof);
            cli_detail::write_json(prov, outdir + "/solve_provenance.json");
            out << "solve: " << prof.size() << " samples, termination "
                << to_string(prof.termination.kind) << "\n";
            switch (prof.termination.kind) {
                case TerminationKind::BlowUpDetected: return 2;
                case TerminationKind::StepUnderflow: return 3;
                default: return 0;
            }
        }

        if (*construct) {
            Profile prof;
            json meta;
            if (theorem_tag == "emden") {
                EmdenOptions eo;
                eo.rel_tol = rel_tol;
                eo.abs_tol = abs_tol;
                auto c = construct_emden_singular(prm, rwin_lo, rwin_hi, eo);
                prof = std::move(c.profile);
                meta = {{"theorem", "emden"},
                        {"seed", {c.seed[0], c.seed[1], c.seed[2]}},
                        {"amplitude", c.amplitude},
                        {"inner_x_dev", c.inner_x_dev},
                        {"inner_phi_dev", c.inner_phi_dev}};
            } else if (theorem_tag == "hj") {
                auto c = construct_hj_subcritical(prm, xi0, eta0, t0);
                prof = std::move(c.profile);
                meta = {{"theorem", "hj"},
                        {"xi_bar0", c.xi_bar0},
                        {"eta_bar0", c.eta_bar0},
                        {"t0", c.t0},
                        {"xi_bar_end", c.xi_bar_end}};
            } else if (theorem_tag == "dirac") {
                auto c = construct_dirac(prm, gamma, rho);
                prof = std::move(c.profile);
                meta = {{"theorem", "dirac"},
                        {"gamma", c.gamma},
                        {"rho", c.rho},
                        {"iterations", c.picard.iterations},
                        {"measured_ratio", c.picard.measured_ratio},
                        {"harmonic_dev", c.harmonic_dev}};
            } else if (theorem_tag == "eikonal") {
                if (prm.N == 1) {
                    auto c = shoot_eikonal_1d(prm, ctol);
                    prof = std::move(c.profile);
                    json trials = json::array();
                    for (const auto& tr : c.record.trials)
                        trials.push_back({{"c", tr.c}, {"regular", tr.regular}});
                    meta = {{"theorem", "eikonal-1d"},
                            {"c_star", c.c_star},
                            {"bracket", {c.record.c_lo, c.record.c_hi}},
                            {"crossing_slope", c.crossing_slope},
                            {"u0_used", c.u0_used},
                            {"trials", trials}};
                } else {
                    auto c = shoot_eikonal_nd(prm, rmin);
                    prof = std::move(c.profile);
                    meta = {{"theorem", "eikonal-nd"},
                            {"u0_sequence", c.u0_sequence},
                            {"gaps", c.gaps}};
                }
            } else if (theorem_tag == "gradient-singular") {
                auto c = construct_gradient_singular(prm, u0_target);
                prof = std::move(c.profile);
                meta = {{"theorem", "gradient-singular"},
                        {"u0_realized", c.u0_realized},
                        {"prefactor_fit", c.prefactor_fit},
                        {"prefactor_expected", c.prefactor_expected}};
                if (prm.N == 1) meta["k0"] = c.k0;
            } else {
                throw InvalidParams("unknown construction tag '" + theorem_tag + "'");
            }

            const std::string base = outdir + "/construct_" + theorem_tag;
            write_profile_csv(prof, base + "_profile.csv");
            prov["config"] = cfg;
            prov["construction"] = meta;
            prov["profile"] = profile_metadata(prof);
            try {
                prov["classification"] = to_json(classify_origin(prof, prm));
            } catch (const WindowTooShort&) {
                prov["classification"] = nullptr;
            }
            cli_detail::write_json(prov, base + "_provenance.json");
            out << "construct " << theorem_tag << ": " << prof.size() << " samples, regime "
                << (prov["classification"].is_null()
                        ? std::string("n/a")
                        : prov["classification"]["regime"].get<std::string>())
                << "\n";
            return 0;
        }

        if (*classify) {
            Profile prof = read_profile_csv(in_csv, prm);
            Classification c = end == "infinity" ? classify_infinity(prof, prm)
                                                 : classify_origin(prof, prm);
            json j = to_json(c);
            out << j.dump(2) << '\n';
            cli_detail::write_json(j, outdir + "/classification.json");
            return 0;
        }

        if (*expand_cmd) {
            Expansion e = expand(prm, order);
            json j = to_json(e);
            out << j.dump(2) << '\n';
            cli_detail::write_json(j, outdir + "/expansion.json");
            return 0;
        }

        if (*phase) {
            auto reports = equilibria(prm, cli_detail::parse_tag(tag_name), lv_sign);
            json arr = json::array();
            for (const auto& rep : reports) arr.push_back(to_json(rep));
            out << arr.dump(2) << '\n';
            cli_detail::write_json(arr, outdir + "/phase_" + tag_name + ".json");
            return 0;
        }

        if (*sweep) {
            auto Nv = cli_detail::parse_list(Ns);
            auto Mv = cli_detail::parse_list(Ms);
            auto qv = cli_detail::parse_list(qs);
            struct Triple {
                int N;
                double M, q;
            };
            std::vector<Triple> triples;
            for (double n : Nv)
                for (double m : Mv)
                    for (double qq : qv) triples.push_back({static_cast<int>(n), m, qq});

            std::vector<cli_detail::SweepRow> rows(triples.size());
            std::atomic<std::size_t> next{0};
            auto worker = [&]() {
                for (std::size_t i; (i = next.fetch_add(1)) < triples.size();) {
                    const auto& tp = triples[i];
                    cli_detail::SweepRow row;
                    row.N = tp.N;
                    row.M = tp.M;
                    row.q = tp.q;
                    try {
                        const Params p = Params::checked(tp.N, tp.M, tp.q);
                        Classification c;
                        if (task == "exterior") {
                            Profile prof = detail::regular_profile(p, 0.0, 1e3, rel_tol);
                            c = classify_infinity(prof, p);
                        } else if (task == "construct-emden") {
                            c = classify_origin(construct_emden_singular(p).profile, p);
                        } else if (task == "construct-hj") {
                            c = classify_origin(construct_hj_subcritical(p, 0, 0).profile, p);
                        } else if (task == "construct-dirac") {
                            c = classify_origin(construct_dirac(p, gamma, rho).profile, p);
                        } else if (task == "construct-eikonal") {
                            Profile prof = p.N == 1 ? shoot_eikonal_1d(p, ctol).profile
                                                    : shoot_eikonal_nd(p, rmin).profile;
                            c = classify_origin(prof, p);
                        } else if (task == "construct-gradient-singular") {
                            c = classify_origin(
                                construct_gradient_singular(p, u0_target).profile, p);
                        } else {
                            throw InvalidParams("unknown sweep task '" + task + "'");
                        }
                        row.regime = to_string(c.regime);
                        row.constant = c.constant;
                        row.residual = c.residual;
                    } catch (const Error& e) {
                        row.regime = "Error(" + e.code() + ")";
                    }
                    rows[i] = row;
                }
            };
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < std::min<std::size_t>(jobs, triples.size()); ++w)
                pool.emplace_back(worker);
            for (auto& th : pool) th.join();

            std::ofstream f(outdir + "/sweep.csv", std::ios::binary);
            if (!f) throw IoError("cannot open sweep.csv for writing");
            f << "N,M,q,regime,constant,residual\n";
            for (const auto& row : rows)
                f << fmt17(row.N) << ',' << fmt17(row.M) << ',' << fmt17(row.q) << ','
                  << row.regime << ',' << fmt17(row.constant) << ',' << fmt17(row.residual)
                  << '\n';
            out << "sweep: " << rows.size() << " rows -> " << outdir << "/sweep.csv\n";
            return 0;
        }

        if (*selftest) {
            auto rep = series_self_test();
            out << "series reciprocal err " << rep.max_reciprocal_err << "\n";
            out << "series power err      " << rep.max_power_err << "\n";
            out << "series compose err    " << rep.max_compose_err << "\n";
            bool ok = rep.ok;

            // transform round trips on a fixed sample of states
            double max_rt = 0.0;
            std::mt19937 rng(7);
            std::uniform_real_distribution<double> ur(-2.0, 2.0);
            for (int i = 0; i < 50; ++i) {
                RadialState s{std::exp(ur(rng)), ur(rng), ur(rng) - 2.0};
                if (s.p == 0.0) s.p = -1.0;
                const double t = std::log(s.r);
                for (SystemTag tag : {SystemTag::EmdenPlane, SystemTag::NonAutXq,
                                      SystemTag::TripleV, SystemTag::TripleXV,
                                      SystemTag::TripleTheta, SystemTag::LotkaVolterra,
                                      SystemTag::HJ, SystemTag::OneD}) {
                    RadialState back = from_phase(prm, to_phase(prm, s, tag), t);
                    max_rt = std::max({max_rt, std::abs(back.u - s.u) / (1 + std::abs(s.u)),
                                       std::abs(back.p - s.p) / (1 + std::abs(s.p))});
                }
            }
            out << "transform roundtrip err " << max_rt << "\n";
            ok = ok && max_rt < 1e-12;

            double max_res = 0.0;
            for (SystemTag tag : {SystemTag::EmdenPlane, SystemTag::TripleTheta,
                                  SystemTag::LotkaVolterra})
                for (const auto& rep2 : equilibria(prm, tag))
                    max_res = std::max(max_res, rep2.rhs_residual);
            out << "equilibrium residual " << max_res << "\n";
            ok = ok && max_res < 1e-12;

            out << (ok ? "selftest: PASS\n" : "selftest: FAIL\n");
            return ok ? 0 : 1;
        }
        (void)selftest;
        return 64;
    } catch (const WindowViolation& e) {
        err << error_json(e.code(), e.what()).dump() << '\n';
        return 65;
    } catch (const InvalidParams& e) {
        err << error_json(e.code(), e.what()).dump() << '\n';
        return 64;
    } catch (const Error& e) {
        err << error_json(e.code(), e.what()).dump() << '\n';
        return 70;
    } catch (const std::exception& e) {
        err << error_json("InternalError", e.what()).dump() << '\n';
        return 70;
    }
}

}  // namespace radsing

#endif
