// Command-line front end: exact diagonalization, loop-gas cluster expansion,
// convergence verification, closed-form bounds, and phase-diagram scans.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 a checked bound was violated.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bhm/bounds.hpp"
#include "bhm/fock.hpp"
#include "bhm/loops.hpp"
#include "bhm/phasemap.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitBoundViolation = 4;

// ---------------------------------------------------------------------------
// Config file: flat key=value lines mirrored 1:1 by long flags; flags win.
// Merging happens before CLI parsing by synthesizing "--key value" arguments
// for every config key not already present on the command line, so unknown
// config keys are rejected by the same machinery as unknown flags.

std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                     ": empty key");
        kv[key] = val;
    }
    return kv;
}

std::vector<std::string> merge_config_args(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;
    auto kv = load_config(config_path);
    std::vector<std::string> merged;
    if (!args.empty()) merged.push_back(args[0]);  // subcommand stays first
    for (const auto& [key, val] : kv) {  // std::map order keeps runs deterministic
        if (key == "config") continue;
        bool on_cmdline = false;
        for (const auto& a : args)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) on_cmdline = true;
        if (on_cmdline) continue;
        if (val == "true") {
            merged.push_back("--" + key);
        } else if (val == "false") {
            // omitted: flags default to off
        } else {
            merged.push_back("--" + key);
            merged.push_back(val);
        }
    }
    for (std::size_t i = 1; i < args.size(); ++i) merged.push_back(args[i]);
    return merged;
}

// ---------------------------------------------------------------------------
// Output plumbing. Every numeric row names the pipeline that produced it.

struct Row {
    std::string quantity;
    double value = 0;
    std::string provenance;
};

struct OutputOpts {
    std::string out;     // empty = stdout
    std::string format = "csv";
    long seed = 0;
};

void add_output_flags(CLI::App* cmd, OutputOpts& o, std::string& config_path) {
    cmd->add_option("--config", config_path, "flat key=value config file; flags win");
    cmd->add_option("--out", o.out, "output path (default: stdout)");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", o.seed, "seed recorded with the output");
}

void write_text(const OutputOpts& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file: " + o.out);
    f << text;
}

std::string rows_csv(const std::vector<Row>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "quantity,value,provenance\n";
    for (const auto& r : rows) os << r.quantity << ',' << r.value << ',' << r.provenance << '\n';
    return os.str();
}

void emit_rows(const OutputOpts& o, const std::string& command, const nlohmann::json& params,
               const std::vector<Row>& rows) {
    if (o.format == "csv") {
        write_text(o, rows_csv(rows));
        return;
    }
    nlohmann::json j;
    j["command"] = command;
    j["seed"] = o.seed;
    j["params"] = params;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
        j["rows"].push_back(
            {{"quantity", r.quantity}, {"value", r.value}, {"provenance", r.provenance}});
    write_text(o, j.dump(2) + "\n");
}

void emit_bound_reports(const OutputOpts& o, const std::string& command,
                        const nlohmann::json& params,
                        const std::vector<std::pair<bhm::BoundReport, std::string>>& reports) {
    if (o.format == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "name,lhs,rhs,satisfied,hypotheses_ok,provenance\n";
        for (const auto& [r, prov] : reports)
            os << r.name << ',' << r.lhs << ',' << r.rhs << ',' << (r.satisfied ? 1 : 0) << ','
               << (r.hypotheses_ok ? 1 : 0) << ',' << prov << '\n';
        write_text(o, os.str());
        return;
    }
    nlohmann::json j;
    j["command"] = command;
    j["seed"] = o.seed;
    j["params"] = params;
    j["rows"] = nlohmann::json::array();
    for (const auto& [r, prov] : reports)
        j["rows"].push_back({{"name", r.name},
                             {"lhs", r.lhs},
                             {"rhs", r.rhs},
                             {"satisfied", r.satisfied},
                             {"hypotheses_ok", r.hypotheses_ok},
                             {"provenance", prov}});
    write_text(o, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared model flags.

struct ModelFlags {
    int d = 1, L = 4, nmax = 2;
    std::string bc = "periodic";
    double t = 0.01, U = 1.0, mu = 0.0, beta = 10.0;
    bool hardcore = false;

    void add(CLI::App* cmd) {
        cmd->add_option("--d", d, "lattice dimension");
        cmd->add_option("--L", L, "linear extent");
        cmd->add_option("--bc", bc, "boundary condition")
            ->check(CLI::IsMember({"periodic", "open"}));
        cmd->add_option("--nmax", nmax, "occupation cap per site");
        cmd->add_option("--t", t, "hopping amplitude");
        cmd->add_option("--U", U, "on-site repulsion");
        cmd->add_option("--mu", mu, "chemical potential");
        cmd->add_option("--beta", beta, "inverse temperature");
        cmd->add_flag("--hardcore", hardcore, "occupation cap 1, infinite repulsion");
    }

    bhm::ModelParams params() const {
        bhm::ModelParams p;
        p.lattice = {d, L, bc == "open" ? bhm::Boundary::open : bhm::Boundary::periodic};
        p.t = t;
        p.U = U;
        p.mu = mu;
        p.beta = beta;
        p.u_infinite = hardcore;
        p.n_max = hardcore ? 1 : nmax;
        p.validate();
        return p;
    }

    nlohmann::json json() const {
        return {{"d", d},   {"L", L},   {"bc", bc},     {"nmax", nmax},       {"t", t},
                {"U", U},   {"mu", mu}, {"beta", beta}, {"hardcore", hardcore}};
    }
};

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_ed(const ModelFlags& mf, const OutputOpts& o) {
    auto p = mf.params();
    double press = bhm::pressure_ed(p);
    double rho = bhm::density_ed(p);
    int n_sites = p.lattice.sites();
    std::vector<Row> rows{
        {"pressure", press, "exact_diagonalization"},
        {"density", rho, "exact_diagonalization"},
        {"log_partition", press * n_sites, "exact_diagonalization"},
        {"sites", double(n_sites), "exact_diagonalization"},
        {"solver_residual", 0.0, "exact_diagonalization"},  // dense solve is exact
    };
    emit_rows(o, "ed", mf.json(), rows);
    return kExitOk;
}

int cmd_expand(const ModelFlags& mf, const OutputOpts& o, int jumps, int order, bool check_ed) {
    auto p = mf.params();
    auto rep = bhm::truncated_pressure_loops(p, jumps, order);
    std::vector<Row> rows{
        {"pressure", rep.pressure, "cluster_expansion"},
        {"log_partition_excitations", rep.log_partition_excitations, "cluster_expansion"},
        {"n_polymers", double(rep.n_polymers), "cluster_expansion"},
        {"truncation_bound", rep.truncation_bound, "truncation_estimate"},
        {"density_deviation_bound", rep.density_deviation_bound, "truncation_estimate"},
        {"kp_satisfied", rep.kp.satisfied ? 1.0 : 0.0, "convergence_criterion"},
        {"kp_slack", rep.kp.slack, "convergence_criterion"},
        {"series_diverging", rep.series.diverging ? 1.0 : 0.0, "convergence_criterion"},
    };
    bool violated = false;
    if (check_ed) {
        double pe = bhm::pressure_ed(p);
        double gap = std::abs(rep.pressure - pe);
        rows.push_back({"pressure_reference", pe, "exact_diagonalization"});
        rows.push_back({"pressure_gap", gap, "exact_diagonalization"});
        violated = std::isfinite(rep.truncation_bound) && gap > rep.truncation_bound;
    }
    emit_rows(o, "expand", mf.json(), rows);
    if (rep.series.diverging) return kExitNumerical;
    return violated ? kExitBoundViolation : kExitOk;
}

int cmd_kp_verify(const ModelFlags& mf, const OutputOpts& o, int jumps, int order,
                  int sigma_jumps, int radius) {
    auto p = mf.params();
    auto rep = bhm::truncated_pressure_loops(p, jumps, order);
    std::vector<std::pair<bhm::BoundReport, std::string>> reports;

    bhm::BoundReport kp;
    kp.name = "kp_excess";  // max over loop classes of (dressed neighbor sum) - a
    kp.lhs = -rep.kp.slack;
    kp.rhs = 0.0;
    kp.satisfied = rep.kp.satisfied;
    kp.slack = rep.kp.slack;
    reports.push_back({kp, "convergence_criterion"});

    for (const auto& r : bhm::loop_family_bounds(mf.d, mf.t, mf.U, mf.mu, mf.beta))
        reports.push_back({r, "loop_sum_bound"});

    double row_sum = bhm::sigma_row_sum(mf.d, mf.t, mf.U, sigma_jumps, radius);
    reports.push_back(
        {bhm::sigma_rowsum_bound(mf.d, mf.t, mf.U, mf.mu, row_sum), "walk_sum"});

    emit_bound_reports(o, "kp-verify", mf.json(), reports);
    for (const auto& [r, prov] : reports)
        if (r.hypotheses_ok && !r.satisfied) return kExitBoundViolation;
    return kExitOk;
}

int cmd_bounds(const ModelFlags& mf, const OutputOpts& o) {
    if (mf.t <= 0 || mf.U <= 0 || mf.d < 1)
        throw std::invalid_argument("bounds: requires t > 0, U > 0, d >= 1");
    auto r0 = bhm::density_bounds_rho0(mf.t, mf.mu, mf.d);
    auto r1 = bhm::density_bounds_rho1(mf.t, mf.mu, mf.U, mf.d);
    std::vector<Row> rows{
        {"dilute_density_min", r0.a, "closed_form_bound"},
        {"dilute_rate_min", r0.c, "closed_form_bound"},
        {"dilute_rate_argmin", r0.rho_star, "closed_form_bound"},
        {"hole_bound", r1.hole_bound, "closed_form_bound"},
        {"hole_numerator", r1.numerator, "closed_form_bound"},
        {"hole_denominator", r1.denominator, "closed_form_bound"},
        {"hole_threshold_constant", r1.threshold_constant, "closed_form_bound"},
        {"hole_threshold_condition", r1.threshold_condition ? 1.0 : 0.0, "closed_form_bound"},
        {"unit_mott_condition",
         bhm::unit_mott_condition(mf.t, mf.mu, mf.U, mf.d) ? 1.0 : 0.0, "closed_form_bound"},
        {"jump_series_ratio", bhm::geometric_loop_series_ratio(mf.d, mf.t, mf.U),
         "closed_form_bound"},
        {"jump_series_sum", bhm::geometric_loop_series_closed_form(mf.d, mf.t, mf.U),
         "closed_form_bound"},
        {"jump_weight_exponential", bhm::jump_weight_exponential(mf.d, mf.t, mf.U),
         "closed_form_bound"},
        {"sigma_rowsum_rhs", bhm::sigma_rowsum_rhs(mf.d, mf.t, mf.U), "closed_form_bound"},
    };
    emit_rows(o, "bounds", mf.json(), rows);
    return kExitOk;
}

struct PhaseFlags {
    double mu_min = -0.5, mu_max = 1.5, t_min = 0.001, t_max = 0.3, U = 1.0;
    int n_mu = 41, n_t = 31, d = 1;
    bool hardcore = false;

    void add(CLI::App* cmd) {
        cmd->add_option("--mu-min", mu_min, "chemical potential range start");
        cmd->add_option("--mu-max", mu_max, "chemical potential range end");
        cmd->add_option("--n-mu", n_mu, "grid points along mu");
        cmd->add_option("--t-min", t_min, "hopping range start");
        cmd->add_option("--t-max", t_max, "hopping range end");
        cmd->add_option("--n-t", n_t, "grid points along t");
        cmd->add_option("--U", U, "on-site repulsion");
        cmd->add_option("--d", d, "lattice dimension");
        cmd->add_flag("--hardcore", hardcore, "occupation cap 1, infinite repulsion");
    }
};

int cmd_phase_diagram(const PhaseFlags& pf, const OutputOpts& o, const std::string& svg_path) {
    if (pf.n_mu < 1 || pf.n_t < 1)
        throw std::invalid_argument("phase-diagram: grid sizes must be positive");
    if (pf.t_min <= 0) throw std::invalid_argument("phase-diagram: t range must be positive");
    bhm::PhaseGridSpec g;
    g.mu_min = pf.mu_min;
    g.mu_max = pf.mu_max;
    g.n_mu = pf.n_mu;
    g.t_min = pf.t_min;
    g.t_max = pf.t_max;
    g.n_t = pf.n_t;
    g.U = pf.U;
    g.d = pf.d;
    g.hard_core = pf.hardcore;
    auto scan = bhm::scan_grid(g);

    if (o.format == "csv") {
        // append the provenance column to the library CSV
        std::istringstream in(bhm::phase_scan_csv(scan));
        std::ostringstream os;
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            os << line << (header ? ",provenance" : ",phase_conditions") << '\n';
            header = false;
        }
        write_text(o, os.str());
    } else {
        nlohmann::json j = bhm::phase_scan_json(scan);
        j["command"] = "phase-diagram";
        j["seed"] = o.seed;
        j["provenance"] = "phase_conditions";
        write_text(o, j.dump(2) + "\n");
    }
    if (!svg_path.empty()) {
        std::ofstream f(svg_path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot open svg output file: " + svg_path);
        f << bhm::phase_scan_svg(scan);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice boson diagnostics: exact spectra, loop-gas expansions, "
                 "convergence checks, closed-form bounds, phase-diagram scans"};
    app.require_subcommand(0, 1);

    OutputOpts out;
    std::string config_path, svg_path;
    ModelFlags mf_ed, mf_expand, mf_kp, mf_bounds;
    PhaseFlags pf;
    int jumps = 2, order = 2, kp_jumps = 2, kp_order = 2, sigma_jumps = 6, radius = 3;
    bool check_ed = false;

    auto* ed = app.add_subcommand("ed", "exact diagonalization report");
    mf_ed.add(ed);
    add_output_flags(ed, out, config_path);

    auto* expand = app.add_subcommand("expand", "loop-gas cluster expansion report");
    mf_expand.add(expand);
    expand->add_option("--jumps", jumps, "max jumps per loop");
    expand->add_option("--order", order, "cluster order cutoff");
    expand->add_flag("--check-ed", check_ed, "compare against exact diagonalization");
    add_output_flags(expand, out, config_path);

    auto* kp = app.add_subcommand("kp-verify", "convergence criterion and loop-sum bounds");
    mf_kp.add(kp);
    kp->add_option("--jumps", kp_jumps, "max jumps per loop");
    kp->add_option("--order", kp_order, "cluster order cutoff");
    kp->add_option("--sigma-jumps", sigma_jumps, "max jumps per excursion walk");
    kp->add_option("--radius", radius, "excursion walk confinement radius");
    add_output_flags(kp, out, config_path);

    auto* bounds = app.add_subcommand("bounds", "closed-form density and series bounds");
    mf_bounds.add(bounds);
    add_output_flags(bounds, out, config_path);

    auto* phase = app.add_subcommand("phase-diagram", "phase classification over a grid");
    pf.add(phase);
    phase->add_option("--svg", svg_path, "write a self-contained SVG plot here");
    add_output_flags(phase, out, config_path);

    // merge config-file keys (flags win), then parse for real
    std::vector<std::string> raw(argv + 1, argv + argc);
    std::vector<std::string> merged;
    try {
        merged = merge_config_args(raw);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    std::vector<const char*> cargs{argv[0]};
    for (const auto& a : merged) cargs.push_back(a.c_str());
    try {
        app.parse(int(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (ed->parsed()) return cmd_ed(mf_ed, out);
        if (expand->parsed()) return cmd_expand(mf_expand, out, jumps, order, check_ed);
        if (kp->parsed()) return cmd_kp_verify(mf_kp, out, kp_jumps, kp_order, sigma_jumps, radius);
        if (bounds->parsed()) return cmd_bounds(mf_bounds, out);
        if (phase->parsed()) return cmd_phase_diagram(pf, out, svg_path);
        std::cout << app.help();
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
